#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "ministep/ast.hpp"
#include "ministep/context.hpp"
#include "ministep/trace.hpp"

namespace ministep {

/// Function-valued top-level definitions, by name.
using Globals = std::map<std::string, ExprPtr>;

// ------------------------------
// outcomes
// ------------------------------

struct ValueOutcome { ExprPtr value; };
struct ExceptionOutcome { ExprPtr payload; };
struct StuckOutcome {
    std::string reason;
    ExprPtr offending;
    ExprPtr program;  // whole program at the point of failure
};
struct LimitOutcome {};

struct RunResult {
    std::variant<ValueOutcome, ExceptionOutcome, StuckOutcome, LimitOutcome> outcome;

    ResultKind kind() const { return static_cast<ResultKind>(outcome.index()); }
};

/// Final program text: the value, `raise v`, or the stuck program.
std::string final_program(const RunResult& r);

/// Structural agreement of two outcomes (stuck outcomes agree on their reason).
bool same_outcome(const RunResult& a, const RunResult& b);

std::string describe(const RunResult& r);

ResultSummary summarize(const RunResult& r);

struct EngineOptions {
    std::size_t max_steps = 10000;
    /// Nesting of evaluation calls beyond which the run is reported stuck.
    std::size_t max_depth = 100000;
    /// Called on entry of every evaluation call with the expression and its context.
    std::function<void(const ExprPtr&, const Ctxt&)> on_eval;
};

// ------------------------------
// trace sink
// ------------------------------

/// Trees behind a step; `redex`/`reduct` point into `pre`/`post`.
struct StepTrees {
    ExprPtr pre;
    ExprPtr post;
    const Expr* redex;
    const Expr* reduct;
};

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void on_step(const Step& step, const StepTrees& trees) = 0;
    virtual void on_application_start(std::size_t app_id) = 0;
    virtual void on_application_end(std::size_t app_id) = 0;
};

/// Collects sink events into a Trace, optionally forwarding them.
class TraceBuilder : public TraceSink {
public:
    explicit TraceBuilder(TraceSink* forward = nullptr) : forward_(forward) {}

    void on_step(const Step& step, const StepTrees& trees) override;
    void on_application_start(std::size_t app_id) override;
    void on_application_end(std::size_t app_id) override;

    Trace take();

private:
    Trace trace_;
    TraceSink* forward_;
};

// ------------------------------
// signals
// ------------------------------

/// An object-level exception on its way to the nearest handler.
struct RaiseSignal {
    ExprPtr payload;
};

struct StuckSignal {
    std::string reason;
    ExprPtr offending;
    ExprPtr program;
};

struct StepLimitSignal {};

// ------------------------------
// stepping evaluator
// ------------------------------

/// Big-step evaluator that carries its evaluation context and reports every
/// reduction as a whole-program step.
class Stepper {
public:
    Stepper(Globals globals, TraceSink& sink, EngineOptions options);

    /// Value of `e` in context `c`. Throws RaiseSignal for an uncaught object-level
    /// exception, StuckSignal, or StepLimitSignal.
    ExprPtr step_eval(const ExprPtr& e, const Ctxt& c);

    /// Records one reduction of `redex` into `reduct` inside `c`.
    void memo(const ExprPtr& redex, const ExprPtr& reduct, const Ctxt& c, Rule rule,
              std::string output = {});

    std::size_t apply_start();
    void apply_end(std::size_t app_id);

    /// Unfolds the call `name v` of a top-level function and evaluates the body.
    ExprPtr apply_global(const std::string& name, const ExprPtr& v, const Ctxt& c);

    void define(const std::string& name, ExprPtr value) { globals_[name] = std::move(value); }
    void set_phrase(std::size_t phrase) { phrase_ = phrase; }

    std::size_t step_count() const { return step_counter_; }
    std::size_t application_count() const { return app_counter_; }
    const std::string& output_log() const { return output_log_; }

private:
    Globals globals_;
    TraceSink& sink_;
    EngineOptions options_;
    std::size_t step_counter_ = 0;
    std::size_t app_counter_ = 0;
    std::size_t phrase_ = 0;
    std::size_t depth_ = 0;
    std::string output_log_;

    ExprPtr eval_node(const ExprPtr& e, const Ctxt& c);
    ExprPtr apply(const ExprPtr& redex, const ExprPtr& fn, const ExprPtr& arg, const Ctxt& c);
    ExprPtr enter_application(const ExprPtr& redex, const ExprPtr& reduct, const Ctxt& c,
                              Rule rule);
    ExprPtr primitive(const std::string& name, const ExprPtr& redex, const ExprPtr& arg,
                      const Ctxt& c);
    ExprPtr eval_try(const Try& t, const Ctxt& c);
    ExprPtr eval_raise(const Raise& r, const Ctxt& c);
    [[noreturn]] void stuck(const std::string& reason, const ExprPtr& offending, const Ctxt& c);
};

struct StepRun {
    Trace trace;
    RunResult result;
    std::string output;
};

/// Steps every top-level phrase in order. Definitions bound to functions become
/// globals; definitions bound to other values are substituted into later phrases.
/// Runs on a large dedicated stack.
StepRun run_program(const Program& p, const EngineOptions& options = {},
                    TraceSink* observer = nullptr);

/// Parses `source` and runs it; the trace records the source text.
StepRun step_source(std::string_view source, const EngineOptions& options = {},
                    TraceSink* observer = nullptr);

// ------------------------------
// reference interpreter
// ------------------------------

struct ReferenceRun {
    RunResult result;
    std::string output;
};

/// Call-by-value, right-to-left big-step interpreter used as the oracle for the
/// stepper. `max_steps` bounds the number of reductions.
ReferenceRun reference_eval(const Program& p, const EngineOptions& options = {});

/// Evaluates a closed expression against already resolved globals.
ReferenceRun reference_eval_expr(const ExprPtr& e, const Globals& globals,
                                 const EngineOptions& options = {});

/// Evaluates the definitions of `p` (skipping main expressions) to the function
/// globals they introduce. Stops at the first definition that fails.
Globals resolve_globals(const Program& p, const EngineOptions& options = {});

/// Runs `fn` on a thread with a large stack, propagating exceptions.
void run_with_large_stack(const std::function<void()>& fn);

}  // namespace ministep
