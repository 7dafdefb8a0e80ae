#include <gtest/gtest.h>

#include "ministep/engine.hpp"
#include "ministep/parser.hpp"
#include "ministep/trace.hpp"
#include "support/support.hpp"

using namespace ministep;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        out.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

const char* kSkipDemo = "let f x = (x * 2) - 1 ;;\nf 4 + 10 * 100\n";

}  // namespace

TEST(EmitText, SkippableApplicationLayout) {
    Trace t = step_source(kSkipDemo).trace;
    auto lines = split_lines(emit_text(t));
    ASSERT_EQ(lines.size(), 12u);
    EXPECT_EQ(lines[0], "(* Step 0 *) f 4 + (10 * 100)[@stepper.redex]");
    EXPECT_EQ(lines[1], "(* Step 1 *) f 4 + (1000)[@stepper.reduct]");
    EXPECT_EQ(lines[2], "(* Application 1 start *)");
    EXPECT_EQ(lines[3], "(* Step 1 *) (f 4)[@stepper.redex] + 1000");
    EXPECT_EQ(lines[9], "(* Application 1 end *)");
    EXPECT_EQ(lines[11], "(* Step 5 *) (1007)[@stepper.reduct]");
}

TEST(EmitText, EmptyTrace) {
    EXPECT_EQ(emit_text(step_source("let f x = x").trace), "");
    EXPECT_EQ(emit_text(step_source("").trace), "");
}

TEST(EmitText, TryBlock) {
    auto lines = split_lines(emit_text(step_source("try (2 + 3 * (raise 4) + 5) with x -> x").trace));
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "(* Step 0 *) try (2 + 3 * raise 4 + 5)[@stepper.redex] with x -> x");
    EXPECT_EQ(lines[1], "(* Step 1 *) try (raise 4)[@stepper.reduct] with x -> x");
    EXPECT_EQ(lines[2], "(* Step 1 *) (try raise 4 with x -> x)[@stepper.redex]");
    EXPECT_EQ(lines[3], "(* Step 2 *) (4)[@stepper.reduct]");
}

TEST(EmitText, LinesReadBack) {
    Trace t = step_source("let rec fac n = if n = 0 then 1 else n * fac (n - 1) ;;\nfac 2").trace;
    std::vector<TextLine> lines = read_text(emit_text(t));
    std::size_t steps = 0;
    std::size_t pos = 0;
    for (const TraceEvent& e : t.events) {
        ASSERT_LT(pos, lines.size());
        if (const auto* s = std::get_if<StepEvent>(&e)) {
            EXPECT_EQ(lines[pos].kind, TextLine::Kind::Step);
            EXPECT_EQ(lines[pos].label, s->step);
            EXPECT_EQ(lines[pos + 1].label, s->step + 1);
            pos += 2;
            ++steps;
        } else {
            const auto& m = std::get<MarkerEvent>(e);
            EXPECT_EQ(lines[pos].kind, m.kind == MarkerEvent::Kind::Start ? TextLine::Kind::Start
                                                                          : TextLine::Kind::End);
            EXPECT_EQ(lines[pos].label, m.app_id);
            ++pos;
        }
    }
    EXPECT_EQ(pos, lines.size());
    EXPECT_EQ(steps, t.steps.size());
}

TEST(EmitText, AnnotatedLinesParse) {
    Trace t = step_source(kSkipDemo).trace;
    for (const TextLine& line : read_text(emit_text(t))) {
        if (line.kind != TextLine::Kind::Step) continue;
        AnnotatedExpr a = parse_annotated_expr(line.program, ParseOptions{{"f"}, false});
        EXPECT_EQ(a.attributes.size(), 1u) << line.program;
    }
}

TEST(ReadText, RejectsGarbage) {
    EXPECT_THROW(read_text("hello\n"), TraceFormatError);
    EXPECT_THROW(read_text("(* Step x *) 1\n"), TraceFormatError);
}

TEST(EmitJson, RoundTrip) {
    for (const char* src : {kSkipDemo, "print_string \"a\\n\\001\xc3\xa9\"; 1", "1 2", "",
                            "try 1 + raise 2 with x -> x"}) {
        Trace t = step_source(src).trace;
        Trace back = load_json(emit_json(t));
        EXPECT_EQ(back, t) << src;
    }
}

TEST(EmitJson, Schema) {
    Trace t = step_source(kSkipDemo).trace;
    std::string j = emit_json(t);
    Trace back = load_json(j);
    EXPECT_EQ(back.steps.size(), 5u);
    EXPECT_EQ(back.result.kind, ResultKind::Value);
    EXPECT_EQ(back.result.text, "1007");
    for (const char* key : {"\"source\"", "\"result\"", "\"steps\"", "\"regions\"", "\"n\"",
                            "\"pre\"", "\"post\"", "\"span\"", "\"rule\"", "\"output\""}) {
        EXPECT_NE(j.find(key), std::string::npos) << key;
    }
}

TEST(EmitJson, SpansAreByteOffsets) {
    Trace t = step_source("\"\xc3\xa9t\xc3\xa9\" ^ \"x\"").trace;
    ASSERT_EQ(t.steps.size(), 1u);
    Trace back = load_json(emit_json(t));
    EXPECT_EQ(back.steps[0].pre.highlighted(), t.steps[0].pre.highlighted());
    EXPECT_EQ(back.steps[0].post.highlighted(), "\"\\195\\169t\\195\\169x\"");
}

TEST(LoadJson, Errors) {
    std::string j = emit_json(step_source(kSkipDemo).trace);
    EXPECT_THROW(load_json(j.substr(0, j.size() / 2)), TraceFormatError);
    EXPECT_THROW(load_json("{}"), TraceFormatError);
    EXPECT_THROW(load_json(R"({"source":"","result":{"kind":"odd","text":""},"steps":[],"regions":[]})"),
                 TraceFormatError);
}

TEST(Rules, NamesRoundTrip) {
    EXPECT_EQ(all_rules().size(), 14u);
    for (Rule r : all_rules()) EXPECT_EQ(rule_from_string(to_string(r)), r);
    EXPECT_FALSE(rule_from_string("Gamma"));
}

TEST(Regions, FromEvents) {
    std::vector<TraceEvent> events{MarkerEvent{MarkerEvent::Kind::Start, 0}, StepEvent{0},
                                   MarkerEvent{MarkerEvent::Kind::Start, 1}, StepEvent{1},
                                   MarkerEvent{MarkerEvent::Kind::End, 1},
                                   MarkerEvent{MarkerEvent::Kind::End, 0}};
    EXPECT_EQ(regions_of(events), (std::vector<Region>{{0, 0, 5}, {1, 2, 4}}));
}
