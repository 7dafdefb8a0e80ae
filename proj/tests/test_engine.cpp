#include <gtest/gtest.h>

#include "ministep/engine.hpp"
#include "ministep/parser.hpp"
#include "ministep/printer.hpp"
#include "support/support.hpp"

using namespace ministep;
using ministep::testing::tree;

namespace {

ExprPtr redex_of(const Step& s) { return tree(std::string(s.pre.highlighted()), {"f", "fac"}); }
ExprPtr reduct_of(const Step& s) { return tree(std::string(s.post.highlighted()), {"f", "fac"}); }
ExprPtr pre_of(const Step& s) { return tree(s.pre.text, {"f", "fac"}); }
ExprPtr post_of(const Step& s) { return tree(s.post.text, {"f", "fac"}); }

std::vector<Rule> rules(const Trace& t) {
    std::vector<Rule> out;
    for (const Step& s : t.steps) out.push_back(s.rule);
    return out;
}

}  // namespace

TEST(ReferenceEval, UncaughtException) {
    ReferenceRun r = reference_eval(parse_program("2 + 3 + (raise 4) + 5"));
    ASSERT_EQ(r.result.kind(), ResultKind::Exception);
    EXPECT_TRUE(equal(std::get<ExceptionOutcome>(r.result.outcome).payload, int_lit(4)));
}

TEST(ReferenceEval, Arithmetic) {
    ReferenceRun r = reference_eval(parse_program("(1 + 2 * 3) + 4"));
    ASSERT_EQ(r.result.kind(), ResultKind::Value);
    EXPECT_TRUE(equal(std::get<ValueOutcome>(r.result.outcome).value, int_lit(11)));
}

TEST(ReferenceEval, LocalRecursionBuildsList) {
    ReferenceRun r =
        reference_eval(parse_program("let rec f x = if x = 0 then [] else 1 :: f (x-1) in f 2"));
    ASSERT_EQ(r.result.kind(), ResultKind::Value);
    EXPECT_TRUE(equal(std::get<ValueOutcome>(r.result.outcome).value, tree("[1; 1]")));
}

TEST(ReferenceEval, DeepRecursionFitsOnTheLargeStack) {
    EngineOptions o;
    o.max_steps = 1'000'000;
    ReferenceRun r = reference_eval(
        parse_program("let rec count n = if n = 0 then 0 else 1 + count (n - 1) ;; count 20000"), o);
    ASSERT_EQ(r.result.kind(), ResultKind::Value) << describe(r.result);
    EXPECT_TRUE(equal(std::get<ValueOutcome>(r.result.outcome).value, int_lit(20000)));
}

TEST(ReferenceEval, WrappingArithmetic) {
    ReferenceRun r = reference_eval(parse_program("(-9223372036854775808) / (-1)"));
    EXPECT_EQ(final_program(r.result), "-9223372036854775808");
    r = reference_eval(parse_program("9223372036854775807 + 1"));
    EXPECT_EQ(final_program(r.result), "-9223372036854775808");
}

TEST(Stepper, TryValueRule) {
    StepRun run = step_source("try 1 + 2 with x -> 0");
    EXPECT_EQ(rules(run.trace), (std::vector<Rule>{Rule::Delta, Rule::TryValue}));
    const Step& s = run.trace.steps[1];
    EXPECT_TRUE(equal(pre_of(s), tree("try 3 with x -> 0")));
    EXPECT_TRUE(equal(post_of(s), int_lit(3)));
}

TEST(Stepper, TryHandleSubstitutesPayload) {
    StepRun run = step_source("try raise 5 with x -> x + 1");
    ASSERT_EQ(run.trace.steps.size(), 2u);
    EXPECT_EQ(run.trace.steps[0].rule, Rule::TryHandle);
    EXPECT_TRUE(equal(reduct_of(run.trace.steps[0]), tree("5 + 1")));
}

TEST(Stepper, DiscardOnlyWithPendingFrames) {
    // `raise 5` is the whole tryee: nothing to discard
    StepRun bare = step_source("try raise 5 with x -> x");
    EXPECT_EQ(rules(bare.trace), (std::vector<Rule>{Rule::TryHandle}));
    StepRun framed = step_source("try 1 + raise 5 with x -> x");
    EXPECT_EQ(rules(framed.trace), (std::vector<Rule>{Rule::RaiseDiscard, Rule::TryHandle}));
}

TEST(Stepper, ReraiseWhenNoClauseMatches) {
    StepRun run = step_source("try (try raise 1 with 2 -> 20) with x -> x + 100");
    EXPECT_EQ(rules(run.trace),
              (std::vector<Rule>{Rule::Reraise, Rule::TryHandle, Rule::Delta}));
    EXPECT_TRUE(equal(post_of(run.trace.steps[0]), tree("try raise 1 with x -> x + 100")));
}

TEST(Stepper, BetaStepOfGlobalFunction) {
    StepRun run = step_source("let f x = (x * 2) - 1 ;;\nf 4 + 10 * 100");
    const Step& s = run.trace.steps[1];
    EXPECT_EQ(s.rule, Rule::GlobalApply);
    EXPECT_TRUE(equal(pre_of(s), tree("f 4 + 1000", {"f"})));
    EXPECT_EQ(s.pre.highlighted(), "f 4");
    EXPECT_TRUE(equal(post_of(s), tree("(4 * 2) - 1 + 1000")));
    EXPECT_TRUE(equal(reduct_of(s), tree("(4 * 2) - 1")));
}

TEST(Stepper, DiscardAndHandleSteps) {
    StepRun run = step_source("try (2 + 3 * (raise 4) + 5) with x -> x");
    ASSERT_EQ(run.trace.steps.size(), 2u);
    const Step& discard = run.trace.steps[0];
    EXPECT_EQ(discard.rule, Rule::RaiseDiscard);
    EXPECT_TRUE(equal(redex_of(discard), tree("2 + (3 * (raise 4)) + 5")));
    EXPECT_TRUE(equal(reduct_of(discard), tree("raise 4")));
    const Step& handle = run.trace.steps[1];
    EXPECT_EQ(handle.rule, Rule::TryHandle);
    EXPECT_EQ(handle.pre.span_start, 0u);
    EXPECT_EQ(handle.pre.span_end, handle.pre.text.size());
    EXPECT_TRUE(equal(pre_of(handle), tree("try (raise 4) with x -> x")));
    EXPECT_TRUE(equal(post_of(handle), int_lit(4)));
}

TEST(Stepper, GlobalUnfoldsRecursiveFunction) {
    StepRun run = step_source("let rec fac n = if n = 0 then 1 else n * fac (n - 1) ;;\nfac 0");
    ASSERT_FALSE(run.trace.steps.empty());
    EXPECT_TRUE(equal(reduct_of(run.trace.steps[0]),
                      tree("if 0 = 0 then 1 else 0 * fac (0 - 1)", {"fac"})));
}

TEST(Stepper, ApplyingNonFunctionGlobalIsStuck) {
    TraceBuilder sink;
    Stepper stepper({{"n", int_lit(3)}}, sink, {});
    EXPECT_THROW(stepper.apply_global("n", int_lit(1), Ctxt{}), StuckSignal);
    StepRun run = step_source("let n = 3 ;;\nn 1");
    EXPECT_EQ(run.result.kind(), ResultKind::Stuck);
}

TEST(Stepper, MarkersAroundApplications) {
    StepRun run = step_source("let f x = (x * 2) - 1 ;;\nf 4 + 10 * 100");
    const auto& ev = run.trace.events;
    ASSERT_EQ(ev.size(), 7u);
    EXPECT_EQ(std::get<MarkerEvent>(ev[1]).kind, MarkerEvent::Kind::Start);
    EXPECT_EQ(std::get<MarkerEvent>(ev[1]).app_id, 1u);
    EXPECT_EQ(std::get<MarkerEvent>(ev[5]).kind, MarkerEvent::Kind::End);
    EXPECT_EQ(run.trace.regions, (std::vector<Region>{{1, 1, 5}}));
}

TEST(Stepper, NestedCallsNest) {
    StepRun run = step_source("let rec fac n = if n = 0 then 1 else n * fac (n - 1) ;;\nfac 3");
    std::vector<std::size_t> open;
    std::size_t starts = 0;
    for (const TraceEvent& e : run.trace.events) {
        if (const auto* m = std::get_if<MarkerEvent>(&e)) {
            if (m->kind == MarkerEvent::Kind::Start) {
                open.push_back(m->app_id);
                ++starts;
            } else {
                ASSERT_FALSE(open.empty());
                EXPECT_EQ(open.back(), m->app_id);
                open.pop_back();
            }
        }
    }
    EXPECT_TRUE(open.empty());
    EXPECT_EQ(starts, 4u);
    EXPECT_TRUE(validate(run.trace).ok());
}

TEST(Stepper, RaisingBodyClosesItsRegionBeforeTheHandler) {
    StepRun run = step_source("try (fun x -> raise x) 1 with e -> e");
    const auto& ev = run.trace.events;
    ASSERT_EQ(ev.size(), 4u);
    EXPECT_EQ(std::get<MarkerEvent>(ev[0]).kind, MarkerEvent::Kind::Start);
    EXPECT_TRUE(std::holds_alternative<StepEvent>(ev[1]));
    EXPECT_EQ(std::get<MarkerEvent>(ev[2]).kind, MarkerEvent::Kind::End);
    EXPECT_EQ(run.trace.steps[std::get<StepEvent>(ev[3]).step].rule, Rule::TryHandle);
    EXPECT_TRUE(validate(run.trace).ok());
}

TEST(RunProgram, ArithmeticSequence) {
    StepRun run = step_source("(1 + 2 * 3) + 4");
    ASSERT_EQ(run.trace.steps.size(), 3u);
    EXPECT_TRUE(equal(pre_of(run.trace.steps[0]), tree("(1 + 2 * 3) + 4")));
    EXPECT_TRUE(equal(pre_of(run.trace.steps[1]), tree("(1 + 6) + 4")));
    EXPECT_TRUE(equal(pre_of(run.trace.steps[2]), tree("7 + 4")));
    EXPECT_TRUE(equal(post_of(run.trace.steps[2]), tree("11")));
}

TEST(RunProgram, StepLimit) {
    EngineOptions o;
    o.max_steps = 100;
    StepRun run = step_source("let rec loop x = loop x ;; loop 0", o);
    EXPECT_EQ(run.result.kind(), ResultKind::Limit);
    EXPECT_EQ(run.trace.steps.size(), 100u);
}

TEST(RunProgram, OutputLog) {
    StepRun run = step_source("print_string \"a\"; print_string \"b\"");
    EXPECT_EQ(run.output, "ab");
    ASSERT_EQ(run.result.kind(), ResultKind::Value);
    EXPECT_TRUE(std::get<ValueOutcome>(run.result.outcome).value->is<Unit>());
    std::string joined;
    for (const Step& s : run.trace.steps) joined += s.output;
    EXPECT_EQ(joined, run.output);
}

TEST(RunProgram, CounterAdvancesOncePerStep) {
    TraceBuilder sink;
    Stepper stepper({}, sink, {});
    ExprPtr e = tree("(1 + 2) * (3 + 4)");
    stepper.step_eval(e, Ctxt{});
    Trace t = sink.take();
    EXPECT_EQ(stepper.step_count(), t.steps.size());
    for (std::size_t i = 0; i < t.steps.size(); ++i) EXPECT_EQ(t.steps[i].index, i);
}

TEST(RunProgram, EmptyProgram) {
    StepRun run = step_source("");
    EXPECT_TRUE(run.trace.steps.empty());
    EXPECT_EQ(run.result.kind(), ResultKind::Value);
}

TEST(RunProgram, DepthGuardReportsStuck) {
    EngineOptions o;
    o.max_depth = 50;
    StepRun run = step_source(
        "let rec count n = if n = 0 then 0 else 1 + count (n - 1) ;; count 100", o);
    ASSERT_EQ(run.result.kind(), ResultKind::Stuck);
    EXPECT_EQ(std::get<StuckOutcome>(run.result.outcome).reason, "stack overflow");
}

TEST(RunProgram, StuckReportsWholeProgram) {
    StepRun run = step_source("10 + (1 2)");
    ASSERT_EQ(run.result.kind(), ResultKind::Stuck);
    const auto& s = std::get<StuckOutcome>(run.result.outcome);
    EXPECT_EQ(s.reason, "not a function");
    EXPECT_TRUE(equal(s.program, tree("10 + 1 2")));
}

TEST(RunProgram, FunctionalComparisonIsStuck) {
    StepRun run = step_source("(fun x -> x) = (fun y -> y)");
    EXPECT_EQ(run.result.kind(), ResultKind::Stuck);
    EXPECT_EQ(reference_eval(parse_program("(fun x -> x) = (fun y -> y)")).result.kind(),
              ResultKind::Stuck);
}

TEST(RunProgram, ContextInstrumentation) {
    std::vector<std::string> seen;
    EngineOptions o;
    o.on_eval = [&](const ExprPtr& e, const Ctxt& c) {
        seen.push_back(to_string(*e) + " @ " + to_string(c));
    };
    step_source("1 + 2", o);
    ASSERT_EQ(seen.size(), 3u);
    EXPECT_EQ(seen[0], "1 + 2 @ ([], CHole)");
    EXPECT_EQ(seen[1], "2 @ ([1 + [.]], CHole)");
    EXPECT_EQ(seen[2], "1 @ ([[.] + 2], CHole)");
}
