#include <gtest/gtest.h>

#include <set>

#include "ministep/engine.hpp"
#include "ministep/parser.hpp"
#include "ministep/printer.hpp"
#include "support/support.hpp"

using namespace ministep;
using namespace ministep::testing;

namespace {

class CorpusTest : public ::testing::TestWithParam<CorpusEntry> {};

void expect_outcome(const CorpusEntry& e, const RunResult& r, const std::string& output,
                    const std::set<std::string>& globals, const char* engine) {
    SCOPED_TRACE(engine);
    EXPECT_EQ(output, e.expected_output);
    if (e.expected_kind == "value") {
        ASSERT_EQ(r.kind(), ResultKind::Value) << describe(r);
        EXPECT_TRUE(equal(std::get<ValueOutcome>(r.outcome).value, tree(e.expected_text, globals)))
            << describe(r);
    } else if (e.expected_kind == "exception") {
        ASSERT_EQ(r.kind(), ResultKind::Exception) << describe(r);
        EXPECT_TRUE(equal(std::get<ExceptionOutcome>(r.outcome).payload,
                          tree(e.expected_text, globals)))
            << describe(r);
    } else {
        ASSERT_EQ(r.kind(), ResultKind::Stuck) << describe(r);
        EXPECT_EQ(std::get<StuckOutcome>(r.outcome).reason, e.expected_text);
    }
}

struct Collector : TraceSink {
    std::vector<ExprPtr> programs;
    void on_step(const Step&, const StepTrees& t) override {
        programs.push_back(t.pre);
        programs.push_back(t.post);
    }
    void on_application_start(std::size_t) override {}
    void on_application_end(std::size_t) override {}
};

}  // namespace

TEST_P(CorpusTest, StepperMatchesExpectation) {
    const CorpusEntry& e = GetParam();
    StepRun run = step_source(e.source);
    expect_outcome(e, run.result, run.output, global_names(parse_program(e.source)), "stepper");
}

TEST_P(CorpusTest, ReferenceMatchesExpectation) {
    const CorpusEntry& e = GetParam();
    Program p = parse_program(e.source);
    ReferenceRun run = reference_eval(p);
    expect_outcome(e, run.result, run.output, global_names(p), "reference");
}

TEST_P(CorpusTest, TraceValidates) {
    ValidationReport r = validate(step_source(GetParam().source).trace);
    for (const Violation& v : r.violations) ADD_FAILURE() << to_string(v.kind) << ": " << v.message;
}

TEST_P(CorpusTest, PrintedSubtermsReparse) {
    const CorpusEntry& e = GetParam();
    Collector c;
    step_source(e.source, {}, &c);
    ParseOptions opts{global_names(parse_program(e.source)), true};
    for (const ExprPtr& program : c.programs) {
        for (const ExprPtr& sub : subterms(program)) {
            std::string text = to_string(*sub);
            ExprPtr back = parse_expr(text, opts);
            ASSERT_TRUE(equal(back, sub)) << text;
        }
    }
}

TEST_P(CorpusTest, JsonRoundTrip) {
    Trace t = step_source(GetParam().source).trace;
    EXPECT_EQ(load_json(emit_json(t)), t);
}

INSTANTIATE_TEST_SUITE_P(Programs, CorpusTest, ::testing::ValuesIn(load_corpus()),
                         [](const auto& info) { return info.param.name; });

TEST(Corpus, CoversEveryRule) {
    std::set<Rule> seen;
    for (const CorpusEntry& e : load_corpus()) {
        for (const Step& s : step_source(e.source).trace.steps) seen.insert(s.rule);
    }
    for (Rule r : all_rules()) EXPECT_TRUE(seen.count(r)) << to_string(r);
    EXPECT_GE(load_corpus().size(), 40u);
}
