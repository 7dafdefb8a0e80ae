#include <cstdint>
#include <optional>

#include "ministep/detail/overloaded.hpp"
#include "ministep/engine.hpp"
#include "ministep/subst.hpp"

namespace ministep {

using detail::overloaded;

namespace {

struct Thrown { ExprPtr payload; };
struct Stuck { std::string reason; ExprPtr offending; };
struct OutOfFuel {};

ExprPtr exception(std::string_view name) { return tag(std::string(name)); }

// Three-way comparison; throws Stuck for functions or mismatched shapes.
int compare(const ExprPtr& a, const ExprPtr& b) {
    auto sign = [](auto x, auto y) { return (x > y) - (x < y); };
    if (is_function(*a) || is_function(*b)) throw Stuck{"compare: functional value", a};
    if (a->is<Nil>() && b->is<Nil>()) return 0;
    if (a->is<Nil>() && b->is<Cons>()) return -1;
    if (a->is<Cons>() && b->is<Nil>()) return 1;
    if (a->is<Unit>() && b->is<Unit>()) return 0;
    if (a->node.index() != b->node.index()) throw Stuck{"mismatched operand kinds", a};
    if (const auto* x = a->as<IntLit>()) return sign(x->value, b->as<IntLit>()->value);
    if (const auto* x = a->as<BoolLit>()) return sign(x->value, b->as<BoolLit>()->value);
    if (const auto* x = a->as<StrLit>()) return sign(x->value, b->as<StrLit>()->value);
    if (const auto* x = a->as<Tag>()) return sign(x->name, b->as<Tag>()->name);
    if (const auto* x = a->as<Cons>()) {
        const auto* y = b->as<Cons>();
        int h = compare(x->head, y->head);
        return h != 0 ? h : compare(x->tail, y->tail);
    }
    if (const auto* x = a->as<Tuple>()) {
        const auto* y = b->as<Tuple>();
        if (x->items.size() != y->items.size()) throw Stuck{"mismatched operand kinds", a};
        for (std::size_t i = 0; i < x->items.size(); ++i) {
            if (int c = compare(x->items[i], y->items[i]); c != 0) return c;
        }
        return 0;
    }
    throw Stuck{"mismatched operand kinds", a};
}

std::int64_t as_int(const ExprPtr& v, const char* what) {
    const auto* i = v->as<IntLit>();
    if (i == nullptr) throw Stuck{what, v};
    return i->value;
}

class Interpreter {
public:
    Interpreter(const Globals& globals, const EngineOptions& options)
        : globals_(globals), options_(options) {}

    ExprPtr eval(const ExprPtr& e) {
        if (++depth_ > options_.max_depth) throw Stuck{"stack overflow", e};
        struct Leave { std::size_t& d; ~Leave() { --d; } } leave{depth_};
        return std::visit(overloaded{
                              [&](const Var& v) -> ExprPtr {
                                  throw Stuck{"unbound variable: " + v.name, e};
                              },
                              [&](const GlobalRef& g) -> ExprPtr {
                                  if (globals_.count(g.name) == 0 && !is_builtin(g.name)) {
                                      throw Stuck{"unbound global: " + g.name, e};
                                  }
                                  return e;
                              },
                              [&](const App& a) -> ExprPtr {
                                  ExprPtr arg = eval(a.arg);
                                  ExprPtr fn = eval(a.fn);
                                  return call(fn, arg, e);
                              },
                              [&](const BinOp& b) -> ExprPtr { return binary(b, e); },
                              [&](const UnOp& u) -> ExprPtr {
                                  ExprPtr v = eval(u.operand);
                                  tick();
                                  if (u.op == UnaryOp::Neg) {
                                      auto n = static_cast<std::uint64_t>(
                                          as_int(v, "negation of a non-integer"));
                                      return int_lit(static_cast<std::int64_t>(0 - n));
                                  }
                                  const auto* t = v->as<BoolLit>();
                                  if (t == nullptr) throw Stuck{"not of a non-boolean", v};
                                  return bool_lit(!t->value);
                              },
                              [&](const If& i) -> ExprPtr {
                                  ExprPtr c = eval(i.cond);
                                  const auto* t = c->as<BoolLit>();
                                  if (t == nullptr) throw Stuck{"if on a non-boolean", c};
                                  tick();
                                  return eval(t->value ? i.then_branch : i.else_branch);
                              },
                              [&](const Let& l) -> ExprPtr {
                                  ExprPtr v = eval(l.bound);
                                  tick();
                                  auto b = match_pattern(*l.binding, v);
                                  if (!b) throw Thrown{exception(kMatchFailure)};
                                  return eval(subst_many(l.body, *b));
                              },
                              [&](const LetRec& l) -> ExprPtr {
                                  tick();
                                  ExprPtr closure = make(RecClosure{l.name, l.param, l.fbody});
                                  return eval(subst(l.body, l.name, closure));
                              },
                              [&](const Cons& k) -> ExprPtr {
                                  ExprPtr t = eval(k.tail);
                                  ExprPtr h = eval(k.head);
                                  return cons(h, t);
                              },
                              [&](const Tuple& t) -> ExprPtr {
                                  std::vector<ExprPtr> items(t.items.size());
                                  for (std::size_t i = items.size(); i-- > 0;) {
                                      items[i] = eval(t.items[i]);
                                  }
                                  return make(Tuple{std::move(items)});
                              },
                              [&](const Match& m) -> ExprPtr {
                                  ExprPtr v = eval(m.scrutinee);
                                  tick();
                                  auto body = select_clause(m.clauses, v);
                                  if (!body) throw Thrown{exception(kMatchFailure)};
                                  return eval(*body);
                              },
                              [&](const Try& t) -> ExprPtr {
                                  ExprPtr payload;
                                  try {
                                      return eval(t.tryee);
                                  } catch (Thrown& x) {
                                      payload = x.payload;
                                  }
                                  auto handler = select_clause(t.clauses, payload);
                                  if (!handler) throw Thrown{payload};
                                  tick();
                                  return eval(*handler);
                              },
                              [&](const Raise& r) -> ExprPtr { throw Thrown{eval(r.payload)}; },
                              [&](const Seq& s) -> ExprPtr {
                                  ExprPtr v = eval(s.first);
                                  if (!v->is<Unit>()) throw Stuck{"sequence on a non-unit value", v};
                                  tick();
                                  return eval(s.second);
                              },
                              [&](const auto&) -> ExprPtr { return e; },
                          },
                          e->node);
    }

    const std::string& output() const { return output_; }

private:
    const Globals& globals_;
    const EngineOptions& options_;
    std::size_t fuel_used_ = 0;
    std::size_t depth_ = 0;
    std::string output_;

    void tick() {
        if (fuel_used_ >= options_.max_steps) throw OutOfFuel{};
        ++fuel_used_;
    }

    ExprPtr binary(const BinOp& b, const ExprPtr& e) {
        if (b.op == BinaryOp::And || b.op == BinaryOp::Or) {
            ExprPtr l = eval(b.left);
            const auto* t = l->as<BoolLit>();
            if (t == nullptr) throw Stuck{"boolean operator on a non-boolean", e};
            tick();
            if (t->value == (b.op == BinaryOp::Or)) return l;
            return eval(b.right);
        }
        ExprPtr r = eval(b.right);
        ExprPtr l = eval(b.left);
        tick();
        auto wrap = [](std::uint64_t bits) { return int_lit(static_cast<std::int64_t>(bits)); };
        const char* arith = "arithmetic on non-integers";
        switch (b.op) {
            case BinaryOp::Add:
                return wrap(static_cast<std::uint64_t>(as_int(l, arith)) +
                            static_cast<std::uint64_t>(as_int(r, arith)));
            case BinaryOp::Sub:
                return wrap(static_cast<std::uint64_t>(as_int(l, arith)) -
                            static_cast<std::uint64_t>(as_int(r, arith)));
            case BinaryOp::Mul:
                return wrap(static_cast<std::uint64_t>(as_int(l, arith)) *
                            static_cast<std::uint64_t>(as_int(r, arith)));
            case BinaryOp::Div: {
                std::int64_t x = as_int(l, arith);
                std::int64_t y = as_int(r, arith);
                if (y == 0) throw Thrown{exception(kDivisionByZero)};
                if (y == -1) return wrap(0 - static_cast<std::uint64_t>(x));
                return int_lit(x / y);
            }
            case BinaryOp::Concat: {
                const auto* x = l->as<StrLit>();
                const auto* y = r->as<StrLit>();
                if (x == nullptr || y == nullptr) throw Stuck{"concatenation of non-strings", e};
                return str_lit(x->value + y->value);
            }
            case BinaryOp::Eq: return bool_lit(compare(l, r) == 0);
            case BinaryOp::Ne: return bool_lit(compare(l, r) != 0);
            case BinaryOp::Lt: return bool_lit(compare(l, r) < 0);
            case BinaryOp::Le: return bool_lit(compare(l, r) <= 0);
            case BinaryOp::Gt: return bool_lit(compare(l, r) > 0);
            case BinaryOp::Ge: return bool_lit(compare(l, r) >= 0);
            default: throw Stuck{"unsupported operator", e};
        }
    }

    ExprPtr call(ExprPtr fn, const ExprPtr& arg, const ExprPtr& site) {
        for (int hops = 0; hops < 64; ++hops) {
            const auto* g = fn->as<GlobalRef>();
            if (g == nullptr) break;
            auto it = globals_.find(g->name);
            if (it == globals_.end()) return builtin(g->name, arg);
            fn = it->second;
        }
        Bindings env;
        PatternPtr param;
        ExprPtr body;
        if (const auto* f = fn->as<Fun>()) {
            param = f->param;
            body = f->body;
        } else if (const auto* r = fn->as<RecClosure>()) {
            param = r->param;
            body = r->fbody;
            env.emplace_back(r->name, fn);
        } else {
            throw Stuck{"not a function", site};
        }
        tick();
        auto b = match_pattern(*param, arg);
        if (!b) throw Thrown{exception(kMatchFailure)};
        env.insert(env.end(), b->begin(), b->end());
        return eval(subst_many(body, env));
    }

    ExprPtr builtin(const std::string& name, const ExprPtr& arg) {
        if (name == "print_int") {
            const auto* i = arg->as<IntLit>();
            if (i == nullptr) throw Stuck{name + " expects an integer", arg};
            tick();
            output_ += std::to_string(i->value);
        } else if (name == "print_newline") {
            if (!arg->is<Unit>()) throw Stuck{name + " expects ()", arg};
            tick();
            output_ += '\n';
        } else if (name == "print_string" || name == "print_endline") {
            const auto* s = arg->as<StrLit>();
            if (s == nullptr) throw Stuck{name + " expects a string", arg};
            tick();
            output_ += s->value;
            if (name == "print_endline") output_ += '\n';
        } else {
            throw Stuck{"unbound global: " + name, arg};
        }
        return unit();
    }
};

// Evaluates the phrases of `p`; `main` controls whether main expressions run.
ReferenceRun run_phrases(const Program& p, const EngineOptions& options, bool main,
                         Globals* globals_out) {
    ReferenceRun run{RunResult{ValueOutcome{unit()}}, {}};
    Globals globals;
    Bindings inlined;
    Interpreter interp(globals, options);
    auto resolve = [&](ExprPtr e) {
        for (const auto& [name, value] : inlined) e = subst_global(e, name, value);
        return e;
    };
    for (const Item& item : p.items) {
        if (const auto* d = std::get_if<DefineRec>(&item)) {
            globals[d->name] = make(Fun{d->param, resolve(d->fbody)});
            continue;
        }
        const auto* def = std::get_if<Define>(&item);
        if (def == nullptr && !main) continue;
        try {
            ExprPtr v = interp.eval(resolve(def ? def->bound : std::get<Eval>(item).expr));
            if (def == nullptr) {
                run.result = RunResult{ValueOutcome{v}};
            } else if (is_function(*v)) {
                globals[def->name] = v;
            } else {
                inlined.emplace_back(def->name, v);
            }
        } catch (Thrown& x) {
            run.result = RunResult{ExceptionOutcome{x.payload}};
            break;
        } catch (Stuck& s) {
            run.result = RunResult{StuckOutcome{s.reason, s.offending, nullptr}};
            break;
        } catch (OutOfFuel&) {
            run.result = RunResult{LimitOutcome{}};
            break;
        }
    }
    run.output = interp.output();
    if (globals_out != nullptr) *globals_out = std::move(globals);
    return run;
}

}  // namespace

ReferenceRun reference_eval(const Program& p, const EngineOptions& options) {
    ReferenceRun run;
    run_with_large_stack([&] { run = run_phrases(p, options, true, nullptr); });
    return run;
}

ReferenceRun reference_eval_expr(const ExprPtr& e, const Globals& globals,
                                 const EngineOptions& options) {
    ReferenceRun run{RunResult{ValueOutcome{unit()}}, {}};
    run_with_large_stack([&] {
        Interpreter interp(globals, options);
        try {
            run.result = RunResult{ValueOutcome{interp.eval(e)}};
        } catch (Thrown& x) {
            run.result = RunResult{ExceptionOutcome{x.payload}};
        } catch (Stuck& s) {
            run.result = RunResult{StuckOutcome{s.reason, s.offending, nullptr}};
        } catch (OutOfFuel&) {
            run.result = RunResult{LimitOutcome{}};
        }
        run.output = interp.output();
    });
    return run;
}

Globals resolve_globals(const Program& p, const EngineOptions& options) {
    Globals globals;
    run_with_large_stack([&] { run_phrases(p, options, false, &globals); });
    return globals;
}

}  // namespace ministep
