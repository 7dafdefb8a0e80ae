#include "ministep/ast.hpp"

#include <algorithm>

#include "ministep/detail/overloaded.hpp"

namespace ministep {

using detail::overloaded;

std::string_view symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "<>";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "&&";
        case BinaryOp::Or: return "||";
        case BinaryOp::Concat: return "^";
    }
    return "?";
}

std::string_view symbol(UnaryOp op) {
    return op == UnaryOp::Neg ? "-" : "not";
}

namespace {

void collect_pattern_vars(const Pattern& p, std::vector<std::string>& out) {
    std::visit(overloaded{
                   [&](const PVar& v) { out.push_back(v.name); },
                   [&](const PCons& c) {
                       collect_pattern_vars(*c.head, out);
                       collect_pattern_vars(*c.tail, out);
                   },
                   [&](const PTuple& t) {
                       for (const auto& item : t.items) collect_pattern_vars(*item, out);
                   },
                   [](const auto&) {},
               },
               p.node);
}

}  // namespace

std::vector<std::string> pattern_vars(const Pattern& p) {
    std::vector<std::string> out;
    collect_pattern_vars(p, out);
    return out;
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {"print_string", "print_int", "print_endline",
                                                   "print_newline"};
    return names;
}

bool is_builtin(std::string_view name) {
    const auto& names = builtin_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_known_tag(std::string_view name) {
    return name == kDivisionByZero || name == kMatchFailure || name == "Not_found" ||
           name == "Exit";
}

bool is_value(const Expr& e) {
    return std::visit(overloaded{
                          [](const IntLit&) { return true; },
                          [](const BoolLit&) { return true; },
                          [](const StrLit&) { return true; },
                          [](const Unit&) { return true; },
                          [](const Fun&) { return true; },
                          [](const RecClosure&) { return true; },
                          [](const GlobalRef&) { return true; },
                          [](const Nil&) { return true; },
                          [](const Tag&) { return true; },
                          [](const Cons& c) { return is_value(*c.head) && is_value(*c.tail); },
                          [](const Tuple& t) {
                              return std::all_of(t.items.begin(), t.items.end(),
                                                 [](const ExprPtr& x) { return is_value(*x); });
                          },
                          [](const auto&) { return false; },
                      },
                      e.node);
}

bool is_function(const Expr& e) {
    return e.is<Fun>() || e.is<RecClosure>() || e.is<GlobalRef>();
}

namespace {

using NameSet = std::set<std::string>;

void fv(const Expr& e, NameSet& out);

void fv_without(const Expr& e, const std::vector<std::string>& bound, NameSet& out) {
    NameSet inner;
    fv(e, inner);
    for (const auto& b : bound) inner.erase(b);
    out.insert(inner.begin(), inner.end());
}

void fv_clauses(const Clauses& clauses, NameSet& out) {
    for (const auto& c : clauses) fv_without(*c.body, pattern_vars(*c.pattern), out);
}

void fv(const Expr& e, NameSet& out) {
    std::visit(overloaded{
                   [&](const Var& v) { out.insert(v.name); },
                   [&](const Fun& f) { fv_without(*f.body, pattern_vars(*f.param), out); },
                   [&](const App& a) {
                       fv(*a.fn, out);
                       fv(*a.arg, out);
                   },
                   [&](const BinOp& b) {
                       fv(*b.left, out);
                       fv(*b.right, out);
                   },
                   [&](const UnOp& u) { fv(*u.operand, out); },
                   [&](const If& i) {
                       fv(*i.cond, out);
                       fv(*i.then_branch, out);
                       fv(*i.else_branch, out);
                   },
                   [&](const Let& l) {
                       fv(*l.bound, out);
                       fv_without(*l.body, pattern_vars(*l.binding), out);
                   },
                   [&](const LetRec& l) {
                       auto params = pattern_vars(*l.param);
                       params.push_back(l.name);
                       fv_without(*l.fbody, params, out);
                       fv_without(*l.body, {l.name}, out);
                   },
                   [&](const RecClosure& r) {
                       auto params = pattern_vars(*r.param);
                       params.push_back(r.name);
                       fv_without(*r.fbody, params, out);
                   },
                   [&](const Cons& c) {
                       fv(*c.head, out);
                       fv(*c.tail, out);
                   },
                   [&](const Tuple& t) {
                       for (const auto& item : t.items) fv(*item, out);
                   },
                   [&](const Match& m) {
                       fv(*m.scrutinee, out);
                       fv_clauses(m.clauses, out);
                   },
                   [&](const Try& t) {
                       fv(*t.tryee, out);
                       fv_clauses(t.clauses, out);
                   },
                   [&](const Raise& r) { fv(*r.payload, out); },
                   [&](const Seq& s) {
                       fv(*s.first, out);
                       fv(*s.second, out);
                   },
                   [](const auto&) {},
               },
               e.node);
}

bool equal_clauses(const Clauses& a, const Clauses& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!equal(*a[i].pattern, *b[i].pattern) || !equal(a[i].body, b[i].body)) return false;
    }
    return true;
}

}  // namespace

std::set<std::string> free_vars(const Expr& e) {
    NameSet out;
    fv(e, out);
    return out;
}

bool equal(const Pattern& a, const Pattern& b) {
    if (&a == &b) return true;
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const PVar& x) { return x.name == b.as<PVar>()->name; },
            [&](const PInt& x) { return x.value == b.as<PInt>()->value; },
            [&](const PBool& x) { return x.value == b.as<PBool>()->value; },
            [&](const PStr& x) { return x.value == b.as<PStr>()->value; },
            [&](const PTag& x) { return x.name == b.as<PTag>()->name; },
            [&](const PCons& x) {
                const auto* y = b.as<PCons>();
                return equal(*x.head, *y->head) && equal(*x.tail, *y->tail);
            },
            [&](const PTuple& x) {
                const auto* y = b.as<PTuple>();
                if (x.items.size() != y->items.size()) return false;
                for (std::size_t i = 0; i < x.items.size(); ++i) {
                    if (!equal(*x.items[i], *y->items[i])) return false;
                }
                return true;
            },
            [](const auto&) { return true; },
        },
        a.node);
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return equal(*a, *b);
}

bool equal(const Expr& a, const Expr& b) {
    if (&a == &b) return true;
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        overloaded{
            [&](const IntLit& x) { return x.value == b.as<IntLit>()->value; },
            [&](const BoolLit& x) { return x.value == b.as<BoolLit>()->value; },
            [&](const StrLit& x) { return x.value == b.as<StrLit>()->value; },
            [&](const Var& x) { return x.name == b.as<Var>()->name; },
            [&](const GlobalRef& x) { return x.name == b.as<GlobalRef>()->name; },
            [&](const Tag& x) { return x.name == b.as<Tag>()->name; },
            [&](const Fun& x) {
                const auto* y = b.as<Fun>();
                return equal(*x.param, *y->param) && equal(x.body, y->body);
            },
            [&](const App& x) {
                const auto* y = b.as<App>();
                return equal(x.fn, y->fn) && equal(x.arg, y->arg);
            },
            [&](const BinOp& x) {
                const auto* y = b.as<BinOp>();
                return x.op == y->op && equal(x.left, y->left) && equal(x.right, y->right);
            },
            [&](const UnOp& x) {
                const auto* y = b.as<UnOp>();
                return x.op == y->op && equal(x.operand, y->operand);
            },
            [&](const If& x) {
                const auto* y = b.as<If>();
                return equal(x.cond, y->cond) && equal(x.then_branch, y->then_branch) &&
                       equal(x.else_branch, y->else_branch);
            },
            [&](const Let& x) {
                const auto* y = b.as<Let>();
                return equal(*x.binding, *y->binding) && equal(x.bound, y->bound) &&
                       equal(x.body, y->body);
            },
            [&](const LetRec& x) {
                const auto* y = b.as<LetRec>();
                return x.name == y->name && equal(*x.param, *y->param) &&
                       equal(x.fbody, y->fbody) && equal(x.body, y->body);
            },
            [&](const RecClosure& x) {
                const auto* y = b.as<RecClosure>();
                return x.name == y->name && equal(*x.param, *y->param) &&
                       equal(x.fbody, y->fbody);
            },
            [&](const Cons& x) {
                const auto* y = b.as<Cons>();
                return equal(x.head, y->head) && equal(x.tail, y->tail);
            },
            [&](const Tuple& x) {
                const auto* y = b.as<Tuple>();
                if (x.items.size() != y->items.size()) return false;
                for (std::size_t i = 0; i < x.items.size(); ++i) {
                    if (!equal(x.items[i], y->items[i])) return false;
                }
                return true;
            },
            [&](const Match& x) {
                const auto* y = b.as<Match>();
                return equal(x.scrutinee, y->scrutinee) && equal_clauses(x.clauses, y->clauses);
            },
            [&](const Try& x) {
                const auto* y = b.as<Try>();
                return equal(x.tryee, y->tryee) && equal_clauses(x.clauses, y->clauses);
            },
            [&](const Raise& x) { return equal(x.payload, b.as<Raise>()->payload); },
            [&](const Seq& x) {
                const auto* y = b.as<Seq>();
                return equal(x.first, y->first) && equal(x.second, y->second);
            },
            [](const auto&) { return true; },
        },
        a.node);
}

std::size_t size(const Expr& e) {
    auto clauses_size = [](const Clauses& cs) {
        std::size_t n = 0;
        for (const auto& c : cs) n += size(*c.body);
        return n;
    };
    return 1 + std::visit(overloaded{
                              [](const Fun& f) { return size(*f.body); },
                              [](const App& a) { return size(*a.fn) + size(*a.arg); },
                              [](const BinOp& b) { return size(*b.left) + size(*b.right); },
                              [](const UnOp& u) { return size(*u.operand); },
                              [](const If& i) {
                                  return size(*i.cond) + size(*i.then_branch) +
                                         size(*i.else_branch);
                              },
                              [](const Let& l) { return size(*l.bound) + size(*l.body); },
                              [](const LetRec& l) { return size(*l.fbody) + size(*l.body); },
                              [](const RecClosure& r) { return size(*r.fbody); },
                              [](const Cons& c) { return size(*c.head) + size(*c.tail); },
                              [](const Tuple& t) {
                                  std::size_t n = 0;
                                  for (const auto& x : t.items) n += size(*x);
                                  return n;
                              },
                              [&](const Match& m) {
                                  return size(*m.scrutinee) + clauses_size(m.clauses);
                              },
                              [&](const Try& t) { return size(*t.tryee) + clauses_size(t.clauses); },
                              [](const Raise& r) { return size(*r.payload); },
                              [](const Seq& s) { return size(*s.first) + size(*s.second); },
                              [](const auto&) -> std::size_t { return 0; },
                          },
                          e.node);
}

}  // namespace ministep
