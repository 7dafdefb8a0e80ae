#include "ministep/subst.hpp"

#include <algorithm>
#include <cassert>

#include "ministep/detail/overloaded.hpp"

namespace ministep {

using detail::overloaded;

namespace {

// Rewrites a tree, sharing every subtree that comes back unchanged.
class Substituter {
public:
    explicit Substituter(Bindings vars, Bindings globals = {})
        : vars_(std::move(vars)), globals_(std::move(globals)) {}

    ExprPtr run(const ExprPtr& e) {
        if (vars_.empty() && globals_.empty()) return e;
        return std::visit(
            overloaded{
                [&](const Var& v) -> ExprPtr {
                    if (const ExprPtr* value = lookup(vars_, v.name)) return *value;
                    return e;
                },
                [&](const GlobalRef& g) -> ExprPtr {
                    if (const ExprPtr* value = lookup(globals_, g.name)) return *value;
                    return e;
                },
                [&](const Fun& f) -> ExprPtr {
                    ExprPtr body = under(pattern_vars(*f.param), f.body);
                    return body == f.body ? e : make(Fun{f.param, body});
                },
                [&](const App& a) -> ExprPtr {
                    ExprPtr fn = run(a.fn), arg = run(a.arg);
                    return fn == a.fn && arg == a.arg ? e : app(fn, arg);
                },
                [&](const BinOp& b) -> ExprPtr {
                    ExprPtr l = run(b.left), r = run(b.right);
                    return l == b.left && r == b.right ? e : binop(b.op, l, r);
                },
                [&](const UnOp& u) -> ExprPtr {
                    ExprPtr x = run(u.operand);
                    return x == u.operand ? e : make(UnOp{u.op, x});
                },
                [&](const If& i) -> ExprPtr {
                    ExprPtr c = run(i.cond), t = run(i.then_branch), f = run(i.else_branch);
                    if (c == i.cond && t == i.then_branch && f == i.else_branch) return e;
                    return make(If{c, t, f});
                },
                [&](const Let& l) -> ExprPtr {
                    ExprPtr bound = run(l.bound);
                    ExprPtr body = under(pattern_vars(*l.binding), l.body);
                    return bound == l.bound && body == l.body ? e
                                                              : make(Let{l.binding, bound, body});
                },
                [&](const LetRec& l) -> ExprPtr {
                    auto params = pattern_vars(*l.param);
                    params.push_back(l.name);
                    ExprPtr fbody = under(params, l.fbody);
                    ExprPtr body = under({l.name}, l.body);
                    if (fbody == l.fbody && body == l.body) return e;
                    return make(LetRec{l.name, l.param, fbody, body});
                },
                [&](const RecClosure& r) -> ExprPtr {
                    auto params = pattern_vars(*r.param);
                    params.push_back(r.name);
                    ExprPtr fbody = under(params, r.fbody);
                    return fbody == r.fbody ? e : make(RecClosure{r.name, r.param, fbody});
                },
                [&](const Cons& c) -> ExprPtr {
                    ExprPtr h = run(c.head), t = run(c.tail);
                    return h == c.head && t == c.tail ? e : cons(h, t);
                },
                [&](const Tuple& t) -> ExprPtr {
                    std::vector<ExprPtr> items;
                    items.reserve(t.items.size());
                    bool changed = false;
                    for (const auto& item : t.items) {
                        items.push_back(run(item));
                        changed = changed || items.back() != item;
                    }
                    return changed ? make(Tuple{std::move(items)}) : e;
                },
                [&](const Match& m) -> ExprPtr {
                    ExprPtr s = run(m.scrutinee);
                    auto [cs, changed] = clauses(m.clauses);
                    return s == m.scrutinee && !changed ? e : make(Match{s, std::move(cs)});
                },
                [&](const Try& t) -> ExprPtr {
                    ExprPtr body = run(t.tryee);
                    auto [cs, changed] = clauses(t.clauses);
                    return body == t.tryee && !changed ? e : make(Try{body, std::move(cs)});
                },
                [&](const Raise& r) -> ExprPtr {
                    ExprPtr x = run(r.payload);
                    return x == r.payload ? e : raise_expr(x);
                },
                [&](const Seq& s) -> ExprPtr {
                    ExprPtr a = run(s.first), b = run(s.second);
                    return a == s.first && b == s.second ? e : make(Seq{a, b});
                },
                [&](const auto&) -> ExprPtr { return e; },
            },
            e->node);
    }

private:
    Bindings vars_;
    Bindings globals_;

    static const ExprPtr* lookup(const Bindings& b, const std::string& name) {
        for (const auto& [key, value] : b) {
            if (key == name) return &value;
        }
        return nullptr;
    }

    // Substitutes under binders of `names`: those variables are shadowed.
    ExprPtr under(const std::vector<std::string>& names, const ExprPtr& e) {
        bool shadows = std::any_of(vars_.begin(), vars_.end(), [&](const auto& kv) {
            return std::find(names.begin(), names.end(), kv.first) != names.end();
        });
        if (!shadows) return run(e);
        Bindings saved = vars_;
        std::erase_if(vars_, [&](const auto& kv) {
            return std::find(names.begin(), names.end(), kv.first) != names.end();
        });
        ExprPtr result = run(e);
        vars_ = std::move(saved);
        return result;
    }

    std::pair<Clauses, bool> clauses(const Clauses& cs) {
        Clauses out;
        out.reserve(cs.size());
        bool changed = false;
        for (const auto& c : cs) {
            ExprPtr body = under(pattern_vars(*c.pattern), c.body);
            changed = changed || body != c.body;
            out.push_back(Clause{c.pattern, body});
        }
        return {std::move(out), changed};
    }
};

bool closed_value(const ExprPtr& v) {
    return is_value(*v) && free_vars(*v).empty();
}

bool match_into(const Pattern& p, const ExprPtr& v, Bindings& out) {
    return std::visit(
        overloaded{
            [&](const PVar& x) {
                out.emplace_back(x.name, v);
                return true;
            },
            [](const PWild&) { return true; },
            [&](const PInt& i) {
                const auto* n = v->as<IntLit>();
                return n != nullptr && n->value == i.value;
            },
            [&](const PBool& b) {
                const auto* x = v->as<BoolLit>();
                return x != nullptr && x->value == b.value;
            },
            [&](const PStr& s) {
                const auto* x = v->as<StrLit>();
                return x != nullptr && x->value == s.value;
            },
            [&](const PUnit&) { return v->is<Unit>(); },
            [&](const PNil&) { return v->is<Nil>(); },
            [&](const PTag& t) {
                const auto* x = v->as<Tag>();
                return x != nullptr && x->name == t.name;
            },
            [&](const PCons& c) {
                const auto* x = v->as<Cons>();
                return x != nullptr && match_into(*c.head, x->head, out) &&
                       match_into(*c.tail, x->tail, out);
            },
            [&](const PTuple& t) {
                const auto* x = v->as<Tuple>();
                if (x == nullptr || x->items.size() != t.items.size()) return false;
                for (std::size_t i = 0; i < t.items.size(); ++i) {
                    if (!match_into(*t.items[i], x->items[i], out)) return false;
                }
                return true;
            },
        },
        p.node);
}

}  // namespace

ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& v) {
    assert(closed_value(v));
    return Substituter({{x, v}}).run(e);
}

ExprPtr subst_many(const ExprPtr& e, const Bindings& b) {
    assert(std::all_of(b.begin(), b.end(), [](const auto& kv) { return closed_value(kv.second); }));
    return Substituter(b).run(e);
}

ExprPtr subst_global(const ExprPtr& e, const std::string& name, const ExprPtr& v) {
    assert(closed_value(v));
    return Substituter({}, {{name, v}}).run(e);
}

std::optional<Bindings> match_pattern(const Pattern& p, const ExprPtr& v) {
    assert(is_value(*v));
    Bindings out;
    if (!match_into(p, v, out)) return std::nullopt;
    return out;
}

std::optional<ExprPtr> select_clause(const Clauses& clauses, const ExprPtr& v) {
    for (const auto& c : clauses) {
        if (auto b = match_pattern(*c.pattern, v)) return subst_many(c.body, *b);
    }
    return std::nullopt;
}

}  // namespace ministep
