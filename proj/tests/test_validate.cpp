#include <gtest/gtest.h>

#include "ministep/engine.hpp"
#include "ministep/trace.hpp"

using namespace ministep;

namespace {

Trace skip_demo() { return step_source("let f x = (x * 2) - 1 ;;\nf 4 + 10 * 100").trace; }

}  // namespace

TEST(Validate, EngineTraceIsClean) {
    ValidationReport r = validate(skip_demo());
    EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.violations[0].message);
}

TEST(Validate, ChainBreak) {
    Trace t = skip_demo();
    t.steps[2].pre = Snapshot{"8 - 1 + 1000", 0, 5};
    EXPECT_TRUE(validate(t).has(ViolationKind::ChainBreak));
}

TEST(Validate, UnbalancedMarkers) {
    Trace t = skip_demo();
    t.events.pop_back();
    t.events.pop_back();
    t.events.push_back(StepEvent{4});
    EXPECT_TRUE(validate(t).has(ViolationKind::MarkerImbalance));
}

TEST(Validate, MarkerMustPrecedeItsStep) {
    Trace t = skip_demo();
    std::get<MarkerEvent>(t.events[1]).app_id = 3;
    std::get<MarkerEvent>(t.events[5]).app_id = 3;
    t.regions = regions_of(t.events);
    EXPECT_TRUE(validate(t).has(ViolationKind::MarkerImbalance));
}

TEST(Validate, IndexGap) {
    Trace t = skip_demo();
    t.steps[3].index = 7;
    EXPECT_TRUE(validate(t).has(ViolationKind::IndexGap));
}

TEST(Validate, SpanOutOfRange) {
    Trace t = skip_demo();
    t.steps[0].pre.span_end = 999;
    EXPECT_TRUE(validate(t).has(ViolationKind::SpanOutOfRange));
}

TEST(Validate, SpanNotOnASubterm) {
    Trace t = skip_demo();
    // "4 + 10" is text but not a subterm of f 4 + 10 * 100
    t.steps[0].pre.span_start = 2;
    t.steps[0].pre.span_end = 8;
    EXPECT_TRUE(validate(t).has(ViolationKind::SpanMismatch));
}

TEST(Validate, UnsoundRewrite) {
    Trace t = step_source("(1 + 2 * 3) + 4").trace;
    t.steps[0].post = Snapshot{"1 + 5 + 4", 4, 5};
    t.steps[1].pre = Snapshot{"1 + 5 + 4", 0, 5};
    ValidationReport r = validate(t);
    EXPECT_TRUE(r.has(ViolationKind::RewriteUnsound));
}

TEST(Validate, RewriteMustStayInPlace) {
    Trace t = step_source("(1 + 2 * 3) + 4").trace;
    // post program is right but the reduct is claimed elsewhere
    t.steps[0].post.span_start = 8;
    t.steps[0].post.span_end = 9;
    EXPECT_TRUE(validate(t).has(ViolationKind::RewriteUnsound));
}

TEST(Validate, Unparsable) {
    Trace t = skip_demo();
    t.steps[0].pre = Snapshot{"f 4 + (", 0, 3};
    EXPECT_TRUE(validate(t).has(ViolationKind::Unparsable));
}

TEST(Validate, RegionTable) {
    Trace t = skip_demo();
    t.regions.clear();
    EXPECT_TRUE(validate(t).has(ViolationKind::RegionMismatch));
}

TEST(Validate, ResultText) {
    Trace t = skip_demo();
    t.result.text = "1008";
    EXPECT_TRUE(validate(t).has(ViolationKind::ResultMismatch));
}

TEST(Validate, SemanticCheckCatchesWrongOutput) {
    Trace t = step_source("print_int 5").trace;
    t.steps[0].output = "6";
    EXPECT_TRUE(validate(t).has(ViolationKind::RewriteUnsound));
    ValidateOptions syntactic;
    syntactic.semantic_check = false;
    EXPECT_TRUE(validate(t, syntactic).ok());
}

TEST(Validate, LimitTraceIsValid) {
    EngineOptions o;
    o.max_steps = 100;
    StepRun run = step_source("let rec loop x = loop x ;; loop 0", o);
    EXPECT_TRUE(validate(run.trace).ok());
}
