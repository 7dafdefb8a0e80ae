#include "ministep/printer.hpp"

#include <cstdio>

#include "ministep/detail/overloaded.hpp"

namespace ministep {

using detail::overloaded;

std::string_view attribute_name(AnnotationKind kind) {
    return kind == AnnotationKind::Redex ? "stepper.redex" : "stepper.reduct";
}

std::string escape_string(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto c = static_cast<unsigned char>(s[i]);
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '\b': out += "\\b"; break;
            default:
                if (c >= 0x20 && c < 0x7F) {
                    out.push_back(static_cast<char>(c));
                } else {
                    char buf[5];
                    std::snprintf(buf, sizeof buf, "\\%03u", static_cast<unsigned>(c));
                    out += buf;
                }
        }
    }
    return out;
}

namespace {

// Binding strength of each syntactic position, loosest first.
enum Level : int {
    kSeq = 0,
    kTuple = 2,
    kOr = 3,
    kAnd = 4,
    kCmp = 5,
    kCons = 6,
    kAdd = 7,
    kMul = 8,
    kUnary = 9,
    kApp = 10,
    kAtom = 11,
};

int binop_level(BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: return kOr;
        case BinaryOp::And: return kAnd;
        case BinaryOp::Eq: case BinaryOp::Ne: case BinaryOp::Lt: case BinaryOp::Le:
        case BinaryOp::Gt: case BinaryOp::Ge:
            return kCmp;
        case BinaryOp::Add: case BinaryOp::Sub: case BinaryOp::Concat:
            return kAdd;
        case BinaryOp::Mul: case BinaryOp::Div:
            return kMul;
    }
    return kAtom;
}

// let/fun/if/match/try extend as far right as possible.
bool is_prefix_form(const Expr& e) {
    return e.is<Let>() || e.is<LetRec>() || e.is<RecClosure>() || e.is<Fun>() || e.is<If>() ||
           e.is<Match>() || e.is<Try>();
}

int level_of(const Expr& e) {
    return std::visit(overloaded{
                          [](const Seq&) { return int{kSeq}; },
                          [](const Tuple&) { return int{kTuple}; },
                          [](const BinOp& b) { return binop_level(b.op); },
                          [](const Cons&) { return int{kCons}; },
                          [](const UnOp& u) { return u.op == UnaryOp::Neg ? int{kUnary} : int{kApp}; },
                          [](const IntLit& i) { return i.value < 0 ? int{kUnary} : int{kAtom}; },
                          [](const App&) { return int{kApp}; },
                          [](const Raise&) { return int{kApp}; },
                          [](const auto&) { return int{kAtom}; },
                      },
                      e.node);
}

// ------------------------------
// patterns
// ------------------------------

void print_pattern(const Pattern& p, int ctx, std::string& out) {
    // 0: tuple, 1: cons / negative literal, 2: atom
    int own = p.is<PTuple>() ? 0
              : p.is<PCons>() || (p.is<PInt>() && p.as<PInt>()->value < 0) ? 1
                                                                            : 2;
    bool parens = own < ctx;
    if (parens) out += '(';
    std::visit(overloaded{
                   [&](const PVar& v) { out += v.name; },
                   [&](const PWild&) { out += '_'; },
                   [&](const PInt& i) { out += std::to_string(i.value); },
                   [&](const PBool& b) { out += b.value ? "true" : "false"; },
                   [&](const PStr& s) { out += '"' + escape_string(s.value) + '"'; },
                   [&](const PUnit&) { out += "()"; },
                   [&](const PNil&) { out += "[]"; },
                   [&](const PTag& t) { out += t.name; },
                   [&](const PCons& c) {
                       print_pattern(*c.head, 2, out);
                       out += " :: ";
                       print_pattern(*c.tail, 1, out);
                   },
                   [&](const PTuple& t) {
                       for (std::size_t i = 0; i < t.items.size(); ++i) {
                           if (i > 0) out += ", ";
                           print_pattern(*t.items[i], 1, out);
                       }
                   },
               },
               p.node);
    if (parens) out += ')';
}

// ------------------------------
// expressions
// ------------------------------

class Printer {
public:
    Printer(std::optional<Annotation> ann, bool inline_attribute)
        : ann_(ann), inline_attribute_(inline_attribute) {}

    std::string out;
    std::optional<SourceSpan> span;

    // `tail`: nothing follows this expression before the end of the enclosing
    // parenthesized region, so a trailing let/fun/match may stay unparenthesized.
    void expr(const Expr& e, int ctx, bool tail) {
        bool annotated = ann_ && ann_->target == &e;
        if (annotated && inline_attribute_) {
            out += '(';
            body(e, true);
            out += ")[@";
            out += attribute_name(ann_->kind);
            out += ']';
            return;
        }
        bool parens = is_prefix_form(e) ? !(tail && ctx <= kUnary) : level_of(e) < ctx;
        if (parens) out += '(';
        std::size_t start = out.size();
        body(e, parens || tail);
        if (annotated) {
            span = SourceSpan{start, out.size(), 1, static_cast<int>(start) + 1};
        }
        if (parens) out += ')';
    }

private:
    std::optional<Annotation> ann_;
    bool inline_attribute_;

    bool is_target(const Expr& e) const { return ann_ && ann_->target == &e; }

    void pattern(const Pattern& p, int ctx) { print_pattern(p, ctx, out); }

    void clauses(const Clauses& cs, bool tail) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (i > 0) out += " | ";
            pattern(*cs[i].pattern, 0);
            out += " -> ";
            expr(*cs[i].body, kSeq, tail && i + 1 == cs.size());
        }
    }

    // Items of a Nil-terminated Cons chain, unless an inner cell is annotated (its
    // extent would not be a contiguous subterm of the literal).
    std::optional<std::vector<const Expr*>> list_items(const Expr& e) const {
        std::vector<const Expr*> items;
        const Expr* cell = &e;
        while (const auto* c = cell->as<Cons>()) {
            if (cell != &e && is_target(*cell)) return std::nullopt;
            items.push_back(c->head.get());
            cell = c->tail.get();
        }
        if (!cell->is<Nil>() || is_target(*cell)) return std::nullopt;
        return items;
    }

    void body(const Expr& e, bool tail) {
        std::visit(
            overloaded{
                [&](const IntLit& i) { out += std::to_string(i.value); },
                [&](const BoolLit& b) { out += b.value ? "true" : "false"; },
                [&](const StrLit& s) {
                    out += '"';
                    out += escape_string(s.value);
                    out += '"';
                },
                [&](const Unit&) { out += "()"; },
                [&](const Nil&) { out += "[]"; },
                [&](const Var& v) { out += v.name; },
                [&](const GlobalRef& g) { out += g.name; },
                [&](const Tag& t) { out += t.name; },
                [&](const Fun& f) {
                    out += "fun ";
                    pattern(*f.param, 2);
                    out += " -> ";
                    expr(*f.body, kSeq, true);
                },
                [&](const App& a) {
                    expr(*a.fn, kApp, false);
                    out += ' ';
                    expr(*a.arg, kAtom, false);
                },
                [&](const Raise& r) {
                    out += "raise ";
                    expr(*r.payload, kAtom, false);
                },
                [&](const UnOp& u) {
                    if (u.op == UnaryOp::Not) {
                        out += "not ";
                        expr(*u.operand, kAtom, false);
                        return;
                    }
                    const Expr& operand = *u.operand;
                    const auto* lit = operand.as<IntLit>();
                    if (lit != nullptr && lit->value >= 0) {
                        // `-3` would read back as a literal
                        out += "-(";
                        expr(operand, kSeq, true);
                        out += ')';
                        return;
                    }
                    bool leading_minus = (lit != nullptr) || (operand.is<UnOp>() &&
                                                              operand.as<UnOp>()->op == UnaryOp::Neg);
                    out += leading_minus ? "- " : "-";
                    expr(operand, kUnary, tail);
                },
                [&](const BinOp& b) {
                    int level = binop_level(b.op);
                    expr(*b.left, level, false);
                    out += ' ';
                    out += symbol(b.op);
                    out += ' ';
                    expr(*b.right, level + 1, tail);
                },
                [&](const Cons& c) {
                    if (auto items = list_items(e)) {
                        out += '[';
                        for (std::size_t i = 0; i < items->size(); ++i) {
                            if (i > 0) out += "; ";
                            expr(*(*items)[i], kTuple, i + 1 == items->size());
                        }
                        out += ']';
                        return;
                    }
                    expr(*c.head, kCons + 1, false);
                    out += " :: ";
                    expr(*c.tail, kCons, tail);
                },
                [&](const Tuple& t) {
                    for (std::size_t i = 0; i < t.items.size(); ++i) {
                        if (i > 0) out += ", ";
                        expr(*t.items[i], kOr, tail && i + 1 == t.items.size());
                    }
                },
                [&](const Seq& s) {
                    expr(*s.first, kTuple, false);
                    out += "; ";
                    expr(*s.second, kSeq, tail);
                },
                [&](const If& i) {
                    out += "if ";
                    expr(*i.cond, kSeq, true);
                    out += " then ";
                    expr(*i.then_branch, kTuple, false);
                    out += " else ";
                    expr(*i.else_branch, kTuple, tail);
                },
                [&](const Let& l) {
                    out += "let ";
                    pattern(*l.binding, 0);
                    out += " = ";
                    expr(*l.bound, kSeq, true);
                    out += " in ";
                    expr(*l.body, kSeq, tail);
                },
                [&](const LetRec& l) {
                    out += "let rec " + l.name + ' ';
                    pattern(*l.param, 2);
                    out += " = ";
                    expr(*l.fbody, kSeq, true);
                    out += " in ";
                    expr(*l.body, kSeq, tail);
                },
                [&](const RecClosure& r) {
                    out += "let rec " + r.name + ' ';
                    pattern(*r.param, 2);
                    out += " = ";
                    expr(*r.fbody, kSeq, true);
                    out += " in " + r.name;
                },
                [&](const Match& m) {
                    out += "match ";
                    expr(*m.scrutinee, kSeq, true);
                    out += " with ";
                    clauses(m.clauses, tail);
                },
                [&](const Try& t) {
                    out += "try ";
                    expr(*t.tryee, kSeq, true);
                    out += " with ";
                    clauses(t.clauses, tail);
                },
            },
            e.node);
    }
};

}  // namespace

Printed print_expr(const Expr& e, std::optional<Annotation> ann) {
    Printer p(ann, false);
    p.expr(e, kSeq, true);
    return Printed{std::move(p.out), p.span};
}

std::string print_annotated_ocaml(const Expr& e, std::optional<Annotation> ann) {
    Printer p(ann, true);
    p.expr(e, kSeq, true);
    return std::move(p.out);
}

std::string to_string(const Pattern& p) {
    std::string out;
    print_pattern(p, 0, out);
    return out;
}

std::string print_program(const Program& p) {
    std::string out;
    for (const auto& item : p.items) {
        std::visit(overloaded{
                       [&](const Define& d) { out += "let " + d.name + " = " + to_string(*d.bound); },
                       [&](const DefineRec& d) {
                           std::string param;
                           print_pattern(*d.param, 2, param);
                           out += "let rec " + d.name + ' ' + param + " = " + to_string(*d.fbody);
                       },
                       [&](const Eval& ev) { out += to_string(*ev.expr); },
                   },
                   item);
        out += ";;\n";
    }
    return out;
}

}  // namespace ministep
