#include "ministep/engine.hpp"

#include <cstdint>
#include <limits>
#include <optional>

#include "ministep/detail/overloaded.hpp"
#include "ministep/parser.hpp"
#include "ministep/printer.hpp"
#include "ministep/subst.hpp"

namespace ministep {

using detail::overloaded;

// ------------------------------
// outcomes
// ------------------------------

std::string final_program(const RunResult& r) {
    return std::visit(overloaded{
                          [](const ValueOutcome& v) { return to_string(*v.value); },
                          [](const ExceptionOutcome& x) { return to_string(*raise_expr(x.payload)); },
                          [](const StuckOutcome& s) {
                              return s.program ? to_string(*s.program) : std::string();
                          },
                          [](const LimitOutcome&) { return std::string(); },
                      },
                      r.outcome);
}

bool same_outcome(const RunResult& a, const RunResult& b) {
    if (a.kind() != b.kind()) return false;
    return std::visit(overloaded{
                          [&](const ValueOutcome& v) {
                              return equal(v.value, std::get<ValueOutcome>(b.outcome).value);
                          },
                          [&](const ExceptionOutcome& x) {
                              return equal(x.payload, std::get<ExceptionOutcome>(b.outcome).payload);
                          },
                          [&](const StuckOutcome& s) {
                              return s.reason == std::get<StuckOutcome>(b.outcome).reason;
                          },
                          [](const LimitOutcome&) { return true; },
                      },
                      a.outcome);
}

std::string describe(const RunResult& r) {
    return std::visit(overloaded{
                          [](const ValueOutcome& v) { return "value " + to_string(*v.value); },
                          [](const ExceptionOutcome& x) {
                              return "uncaught exception " + to_string(*x.payload);
                          },
                          [](const StuckOutcome& s) {
                              return "stuck (" + s.reason + ")" +
                                     (s.offending ? " at " + to_string(*s.offending) : "");
                          },
                          [](const LimitOutcome&) { return std::string("step limit exceeded"); },
                      },
                      r.outcome);
}

ResultSummary summarize(const RunResult& r) {
    ResultSummary s;
    s.kind = r.kind();
    s.text = final_program(r);
    if (const auto* st = std::get_if<StuckOutcome>(&r.outcome)) s.reason = st->reason;
    return s;
}

// ------------------------------
// trace builder
// ------------------------------

void TraceBuilder::on_step(const Step& step, const StepTrees& trees) {
    trace_.events.push_back(StepEvent{trace_.steps.size()});
    trace_.steps.push_back(step);
    if (forward_) forward_->on_step(step, trees);
}

void TraceBuilder::on_application_start(std::size_t app_id) {
    trace_.events.push_back(MarkerEvent{MarkerEvent::Kind::Start, app_id});
    if (forward_) forward_->on_application_start(app_id);
}

void TraceBuilder::on_application_end(std::size_t app_id) {
    trace_.events.push_back(MarkerEvent{MarkerEvent::Kind::End, app_id});
    if (forward_) forward_->on_application_end(app_id);
}

Trace TraceBuilder::take() {
    trace_.regions = regions_of(trace_.events);
    return std::move(trace_);
}

// ------------------------------
// primitive operations
// ------------------------------

namespace {

struct Delta {
    ExprPtr result;      // value, or `raise Tag` for run-time errors
    std::string stuck;   // non-empty when the operands are unsuitable
};

std::int64_t wrapping(std::uint64_t bits) { return static_cast<std::int64_t>(bits); }

// Structural ordering of values; nullopt with `error` set when undefined.
std::optional<int> compare_values(const Expr& a, const Expr& b, std::string& error) {
    if (is_function(a) || is_function(b)) {
        error = "compare: functional value";
        return std::nullopt;
    }
    if (const auto* x = a.as<IntLit>()) {
        if (const auto* y = b.as<IntLit>()) return (x->value > y->value) - (x->value < y->value);
    } else if (const auto* x = a.as<BoolLit>()) {
        if (const auto* y = b.as<BoolLit>()) return int{x->value} - int{y->value};
    } else if (const auto* x = a.as<StrLit>()) {
        if (const auto* y = b.as<StrLit>()) {
            int c = x->value.compare(y->value);
            return (c > 0) - (c < 0);
        }
    } else if (a.is<Unit>()) {
        if (b.is<Unit>()) return 0;
    } else if (const auto* x = a.as<Tag>()) {
        if (const auto* y = b.as<Tag>()) {
            int c = x->name.compare(y->name);
            return (c > 0) - (c < 0);
        }
    } else if (a.is<Nil>() || a.is<Cons>()) {
        if (b.is<Nil>()) return a.is<Nil>() ? 0 : 1;
        if (const auto* y = b.as<Cons>()) {
            const auto* x = a.as<Cons>();
            if (x == nullptr) return -1;
            auto head = compare_values(*x->head, *y->head, error);
            if (!head || *head != 0) return head;
            return compare_values(*x->tail, *y->tail, error);
        }
    } else if (const auto* x = a.as<Tuple>()) {
        const auto* y = b.as<Tuple>();
        if (y != nullptr && y->items.size() == x->items.size()) {
            for (std::size_t i = 0; i < x->items.size(); ++i) {
                auto c = compare_values(*x->items[i], *y->items[i], error);
                if (!c || *c != 0) return c;
            }
            return 0;
        }
    }
    error = "mismatched operand kinds";
    return std::nullopt;
}

Delta binary_delta(BinaryOp op, const Expr& l, const Expr& r) {
    const auto* li = l.as<IntLit>();
    const auto* ri = r.as<IntLit>();
    auto bits = [](std::int64_t v) { return static_cast<std::uint64_t>(v); };
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Div:
            if (li == nullptr || ri == nullptr) return {nullptr, "arithmetic on non-integers"};
            switch (op) {
                case BinaryOp::Add: return {int_lit(wrapping(bits(li->value) + bits(ri->value))), {}};
                case BinaryOp::Sub: return {int_lit(wrapping(bits(li->value) - bits(ri->value))), {}};
                case BinaryOp::Mul: return {int_lit(wrapping(bits(li->value) * bits(ri->value))), {}};
                default:
                    if (ri->value == 0) return {raise_expr(tag(std::string(kDivisionByZero))), {}};
                    if (ri->value == -1) return {int_lit(wrapping(0 - bits(li->value))), {}};
                    return {int_lit(li->value / ri->value), {}};
            }
        case BinaryOp::Concat: {
            const auto* ls = l.as<StrLit>();
            const auto* rs = r.as<StrLit>();
            if (ls == nullptr || rs == nullptr) return {nullptr, "concatenation of non-strings"};
            return {str_lit(ls->value + rs->value), {}};
        }
        case BinaryOp::Eq: case BinaryOp::Ne: case BinaryOp::Lt: case BinaryOp::Le:
        case BinaryOp::Gt: case BinaryOp::Ge: {
            std::string error;
            auto c = compare_values(l, r, error);
            if (!c) return {nullptr, error};
            bool v = false;
            switch (op) {
                case BinaryOp::Eq: v = *c == 0; break;
                case BinaryOp::Ne: v = *c != 0; break;
                case BinaryOp::Lt: v = *c < 0; break;
                case BinaryOp::Le: v = *c <= 0; break;
                case BinaryOp::Gt: v = *c > 0; break;
                default: v = *c >= 0; break;
            }
            return {bool_lit(v), {}};
        }
        case BinaryOp::And:
        case BinaryOp::Or:
            break;
    }
    return {nullptr, "unsupported operator"};
}

Delta unary_delta(UnaryOp op, const Expr& v) {
    if (op == UnaryOp::Neg) {
        const auto* i = v.as<IntLit>();
        if (i == nullptr) return {nullptr, "negation of a non-integer"};
        return {int_lit(wrapping(0 - static_cast<std::uint64_t>(i->value))), {}};
    }
    const auto* b = v.as<BoolLit>();
    if (b == nullptr) return {nullptr, "not of a non-boolean"};
    return {bool_lit(!b->value), {}};
}

ExprPtr fresh(const ExprPtr& e) { return std::make_shared<const Expr>(*e); }

ExprPtr match_failure() { return raise_expr(tag(std::string(kMatchFailure))); }

// Body of a function applied to `arg`, or `raise Match_failure`.
ExprPtr instantiate(const PatternPtr& param, const ExprPtr& body, const ExprPtr& arg,
                    Bindings extra = {}) {
    auto b = match_pattern(*param, arg);
    if (!b) return match_failure();
    extra.insert(extra.end(), b->begin(), b->end());
    return subst_many(body, extra);
}

struct DepthGuard {
    std::size_t& depth;
    explicit DepthGuard(std::size_t& d) : depth(d) { ++depth; }
    ~DepthGuard() { --depth; }
};

}  // namespace

// ------------------------------
// stepper
// ------------------------------

Stepper::Stepper(Globals globals, TraceSink& sink, EngineOptions options)
    : globals_(std::move(globals)), sink_(sink), options_(std::move(options)) {}

void Stepper::stuck(const std::string& reason, const ExprPtr& offending, const Ctxt& c) {
    throw StuckSignal{reason, offending, plug(offending, c)};
}

void Stepper::memo(const ExprPtr& redex, const ExprPtr& reduct, const Ctxt& c, Rule rule,
                   std::string output) {
    if (step_counter_ >= options_.max_steps) throw StepLimitSignal{};
    // Fresh root nodes give the annotated subterms an identity of their own.
    ExprPtr redex_node = fresh(redex);
    ExprPtr reduct_node = fresh(reduct);
    StepTrees trees{plug(redex_node, c), plug(reduct_node, c), redex_node.get(), reduct_node.get()};
    Printed pre = print_expr(*trees.pre, Annotation{AnnotationKind::Redex, trees.redex});
    Printed post = print_expr(*trees.post, Annotation{AnnotationKind::Reduct, trees.reduct});
    Step step;
    step.index = step_counter_;
    step.pre = Snapshot{std::move(pre.text), pre.span->start_offset, pre.span->end_offset};
    step.post = Snapshot{std::move(post.text), post.span->start_offset, post.span->end_offset};
    step.rule = rule;
    step.output = std::move(output);
    step.phrase = phrase_;
    output_log_ += step.output;
    ++step_counter_;
    sink_.on_step(step, trees);
}

std::size_t Stepper::apply_start() {
    if (step_counter_ >= options_.max_steps) throw StepLimitSignal{};
    ++app_counter_;
    sink_.on_application_start(step_counter_);
    return step_counter_;
}

void Stepper::apply_end(std::size_t app_id) { sink_.on_application_end(app_id); }

ExprPtr Stepper::step_eval(const ExprPtr& e, const Ctxt& c) {
    DepthGuard guard(depth_);
    if (depth_ > options_.max_depth) stuck("stack overflow", e, c);
    if (options_.on_eval) options_.on_eval(e, c);
    return eval_node(e, c);
}

ExprPtr Stepper::eval_node(const ExprPtr& e, const Ctxt& c) {
    return std::visit(
        overloaded{
            [&](const Var& v) -> ExprPtr { stuck("unbound variable: " + v.name, e, c); },
            [&](const GlobalRef& g) -> ExprPtr {
                if (globals_.count(g.name) == 0 && !is_builtin(g.name)) {
                    stuck("unbound global: " + g.name, e, c);
                }
                return e;
            },
            [&](const App& a) -> ExprPtr {
                ExprPtr arg = step_eval(a.arg, add(c, CAppR{a.fn}));
                ExprPtr fn = step_eval(a.fn, add(c, CAppL{arg}));
                ExprPtr redex = fn == a.fn && arg == a.arg ? e : app(fn, arg);
                return apply(redex, fn, arg, c);
            },
            [&](const BinOp& b) -> ExprPtr {
                if (b.op == BinaryOp::And || b.op == BinaryOp::Or) {
                    ExprPtr l = step_eval(b.left, add(c, CShortCircuit{b.op, b.right}));
                    ExprPtr redex = l == b.left ? e : binop(b.op, l, b.right);
                    const auto* truth = l->as<BoolLit>();
                    if (truth == nullptr) stuck("boolean operator on a non-boolean", redex, c);
                    bool decided = (b.op == BinaryOp::And) != truth->value;
                    ExprPtr reduct = decided ? bool_lit(truth->value) : b.right;
                    memo(redex, reduct, c, Rule::Delta);
                    return decided ? reduct : step_eval(reduct, c);
                }
                ExprPtr r = step_eval(b.right, add(c, CBinR{b.op, b.left}));
                ExprPtr l = step_eval(b.left, add(c, CBinL{b.op, r}));
                ExprPtr redex = l == b.left && r == b.right ? e : binop(b.op, l, r);
                Delta d = binary_delta(b.op, *l, *r);
                if (!d.result) stuck(d.stuck, redex, c);
                memo(redex, d.result, c, Rule::Delta);
                return d.result->is<Raise>() ? step_eval(d.result, c) : d.result;
            },
            [&](const UnOp& u) -> ExprPtr {
                ExprPtr v = step_eval(u.operand, add(c, CUn{u.op}));
                ExprPtr redex = v == u.operand ? e : make(UnOp{u.op, v});
                Delta d = unary_delta(u.op, *v);
                if (!d.result) stuck(d.stuck, redex, c);
                memo(redex, d.result, c, Rule::Delta);
                return d.result;
            },
            [&](const If& i) -> ExprPtr {
                ExprPtr cond = step_eval(i.cond, add(c, CIf{i.then_branch, i.else_branch}));
                ExprPtr redex = cond == i.cond ? e : make(If{cond, i.then_branch, i.else_branch});
                const auto* truth = cond->as<BoolLit>();
                if (truth == nullptr) stuck("if on a non-boolean", redex, c);
                ExprPtr branch = truth->value ? i.then_branch : i.else_branch;
                memo(redex, branch, c, truth->value ? Rule::IfTrue : Rule::IfFalse);
                return step_eval(branch, c);
            },
            [&](const Let& l) -> ExprPtr {
                ExprPtr v = step_eval(l.bound, add(c, CLet{l.binding, l.body}));
                ExprPtr redex = v == l.bound ? e : make(Let{l.binding, v, l.body});
                auto b = match_pattern(*l.binding, v);
                ExprPtr reduct = b ? subst_many(l.body, *b) : match_failure();
                memo(redex, reduct, c, Rule::Let);
                return step_eval(reduct, c);
            },
            [&](const LetRec& l) -> ExprPtr {
                ExprPtr closure = make(RecClosure{l.name, l.param, l.fbody});
                ExprPtr reduct = subst(l.body, l.name, closure);
                memo(e, reduct, c, Rule::LetRec);
                return step_eval(reduct, c);
            },
            [&](const Cons& k) -> ExprPtr {
                ExprPtr tail = step_eval(k.tail, add(c, CConsR{k.head}));
                ExprPtr head = step_eval(k.head, add(c, CConsL{tail}));
                return head == k.head && tail == k.tail ? e : cons(head, tail);
            },
            [&](const Tuple& t) -> ExprPtr {
                std::size_t n = t.items.size();
                std::vector<ExprPtr> values(n);
                bool changed = false;
                for (std::size_t i = n; i-- > 0;) {
                    CTuple frame{{t.items.begin(), t.items.begin() + static_cast<std::ptrdiff_t>(i)},
                                 {values.begin() + static_cast<std::ptrdiff_t>(i) + 1, values.end()}};
                    values[i] = step_eval(t.items[i], add(c, std::move(frame)));
                    changed = changed || values[i] != t.items[i];
                }
                return changed ? make(Tuple{std::move(values)}) : e;
            },
            [&](const Match& m) -> ExprPtr {
                ExprPtr v = step_eval(m.scrutinee, add(c, CMatch{m.clauses}));
                ExprPtr redex = v == m.scrutinee ? e : make(Match{v, m.clauses});
                ExprPtr reduct = select_clause(m.clauses, v).value_or(match_failure());
                memo(redex, reduct, c, Rule::Match);
                return step_eval(reduct, c);
            },
            [&](const Try& t) -> ExprPtr { return eval_try(t, c); },
            [&](const Raise& r) -> ExprPtr { return eval_raise(r, c); },
            [&](const Seq& s) -> ExprPtr {
                ExprPtr v = step_eval(s.first, add(c, CSeq{s.second}));
                ExprPtr redex = v == s.first ? e : make(Seq{v, s.second});
                if (!v->is<Unit>()) stuck("sequence on a non-unit value", redex, c);
                memo(redex, s.second, c, Rule::Seq);
                return step_eval(s.second, c);
            },
            // literals, functions, closures, tags
            [&](const auto&) -> ExprPtr { return e; },
        },
        e->node);
}

ExprPtr Stepper::eval_try(const Try& t, const Ctxt& c) {
    std::optional<ExprPtr> raised;
    ExprPtr v;
    try {
        v = step_eval(t.tryee, add_try(c, t.clauses));
    } catch (RaiseSignal& signal) {
        raised = std::move(signal.payload);
    }
    if (!raised) {
        memo(make(Try{v, t.clauses}), v, c, Rule::TryValue);
        return v;
    }
    ExprPtr thrown = raise_expr(*raised);
    ExprPtr redex = make(Try{thrown, t.clauses});
    if (auto handler = select_clause(t.clauses, *raised)) {
        memo(redex, *handler, c, Rule::TryHandle);
        return step_eval(*handler, c);
    }
    memo(redex, thrown, c, Rule::Reraise);
    return step_eval(thrown, c);
}

ExprPtr Stepper::eval_raise(const Raise& r, const Ctxt& c) {
    ExprPtr v = step_eval(r.payload, add(c, CRaise{}));
    if (c.frames) {
        // discard the rest of the tryee
        ExprPtr thrown = raise_expr(v);
        memo(plug_in_try(thrown, c.frames), thrown, Ctxt{nullptr, c.meta}, Rule::RaiseDiscard);
    }
    throw RaiseSignal{v};
}

ExprPtr Stepper::apply(const ExprPtr& redex, const ExprPtr& fn, const ExprPtr& arg,
                       const Ctxt& c) {
    if (const auto* f = fn->as<Fun>()) {
        return enter_application(redex, instantiate(f->param, f->body, arg), c, Rule::Beta);
    }
    if (const auto* r = fn->as<RecClosure>()) {
        ExprPtr body = instantiate(r->param, r->fbody, arg, {{r->name, fn}});
        return enter_application(redex, body, c, Rule::Beta);
    }
    if (const auto* g = fn->as<GlobalRef>()) {
        if (globals_.count(g->name) == 0 && is_builtin(g->name)) {
            return primitive(g->name, redex, arg, c);
        }
        return apply_global(g->name, arg, c);
    }
    stuck("not a function", redex, c);
}

ExprPtr Stepper::enter_application(const ExprPtr& redex, const ExprPtr& reduct, const Ctxt& c,
                                   Rule rule) {
    std::size_t id = apply_start();
    ExprPtr v;
    try {
        memo(redex, reduct, c, rule);
        v = step_eval(reduct, c);
    } catch (...) {
        apply_end(id);
        throw;
    }
    apply_end(id);
    return v;
}

ExprPtr Stepper::apply_global(const std::string& name, const ExprPtr& v, const Ctxt& c) {
    ExprPtr redex = app(global(name), v);
    ExprPtr def;
    std::string target = name;
    for (int hops = 0; hops < 64; ++hops) {
        auto it = globals_.find(target);
        if (it == globals_.end()) {
            if (is_builtin(target)) return primitive(target, redex, v, c);
            stuck("unbound global: " + target, redex, c);
        }
        def = it->second;
        const auto* alias = def->as<GlobalRef>();
        if (alias == nullptr) break;
        target = alias->name;
    }
    if (const auto* f = def->as<Fun>()) {
        return enter_application(redex, instantiate(f->param, f->body, v), c, Rule::GlobalApply);
    }
    if (const auto* r = def->as<RecClosure>()) {
        ExprPtr body = instantiate(r->param, r->fbody, v, {{r->name, def}});
        return enter_application(redex, body, c, Rule::GlobalApply);
    }
    stuck("not a function", redex, c);
}

ExprPtr Stepper::primitive(const std::string& name, const ExprPtr& redex, const ExprPtr& arg,
                           const Ctxt& c) {
    std::string out;
    if (name == "print_string" || name == "print_endline") {
        const auto* s = arg->as<StrLit>();
        if (s == nullptr) stuck(name + " expects a string", redex, c);
        out = s->value;
        if (name == "print_endline") out += '\n';
    } else if (name == "print_int") {
        const auto* i = arg->as<IntLit>();
        if (i == nullptr) stuck(name + " expects an integer", redex, c);
        out = std::to_string(i->value);
    } else if (name == "print_newline") {
        if (!arg->is<Unit>()) stuck(name + " expects ()", redex, c);
        out = "\n";
    } else {
        stuck("unknown primitive " + name, redex, c);
    }
    ExprPtr result = unit();
    memo(redex, result, c, Rule::Print, std::move(out));
    return result;
}

// ------------------------------
// whole programs
// ------------------------------

StepRun run_program(const Program& p, const EngineOptions& options, TraceSink* observer) {
    StepRun run;
    run_with_large_stack([&] {
        TraceBuilder builder(observer);
        Stepper stepper({}, builder, options);
        Bindings inlined;  // non-function top-level values
        RunResult result{ValueOutcome{unit()}};
        auto resolve = [&](ExprPtr e) {
            for (const auto& [name, value] : inlined) e = subst_global(e, name, value);
            return e;
        };
        for (std::size_t i = 0; i < p.items.size(); ++i) {
            stepper.set_phrase(i);
            const Item& item = p.items[i];
            if (const auto* d = std::get_if<DefineRec>(&item)) {
                stepper.define(d->name, make(Fun{d->param, resolve(d->fbody)}));
                continue;
            }
            const bool is_define = std::holds_alternative<Define>(item);
            ExprPtr expr = is_define ? std::get<Define>(item).bound : std::get<Eval>(item).expr;
            try {
                ExprPtr v = stepper.step_eval(resolve(expr), Ctxt{});
                if (is_define) {
                    const std::string& name = std::get<Define>(item).name;
                    if (is_function(*v)) {
                        stepper.define(name, v);
                    } else {
                        inlined.emplace_back(name, v);
                    }
                } else {
                    result = RunResult{ValueOutcome{v}};
                }
            } catch (RaiseSignal& signal) {
                result = RunResult{ExceptionOutcome{signal.payload}};
                break;
            } catch (StuckSignal& s) {
                result = RunResult{StuckOutcome{s.reason, s.offending, s.program}};
                break;
            } catch (StepLimitSignal&) {
                result = RunResult{LimitOutcome{}};
                break;
            }
        }
        run.trace = builder.take();
        run.result = result;
        run.output = stepper.output_log();
    });
    run.trace.result = summarize(run.result);
    if (run.result.kind() == ResultKind::Limit && !run.trace.steps.empty()) {
        run.trace.result.text = run.trace.steps.back().post.text;
    }
    return run;
}

StepRun step_source(std::string_view source, const EngineOptions& options, TraceSink* observer) {
    StepRun run = run_program(parse_program(source), options, observer);
    run.trace.source = std::string(source);
    return run;
}

}  // namespace ministep
