#include "ministep/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <utility>

#include <json.hpp>

#include "ministep/detail/overloaded.hpp"

namespace ministep {

using detail::overloaded;
using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Rule, std::string_view>, 14> kRuleNames{{
    {Rule::Beta, "Beta"},
    {Rule::GlobalApply, "GlobalApply"},
    {Rule::Delta, "Delta"},
    {Rule::IfTrue, "IfTrue"},
    {Rule::IfFalse, "IfFalse"},
    {Rule::Let, "Let"},
    {Rule::LetRec, "LetRec"},
    {Rule::Match, "Match"},
    {Rule::Seq, "Seq"},
    {Rule::TryValue, "TryValue"},
    {Rule::TryHandle, "TryHandle"},
    {Rule::RaiseDiscard, "RaiseDiscard"},
    {Rule::Reraise, "Reraise"},
    {Rule::Print, "Print"},
}};

constexpr std::array<std::string_view, 4> kResultNames{"value", "exception", "stuck", "limit"};

}  // namespace

std::string_view to_string(Rule rule) {
    for (const auto& [r, name] : kRuleNames) {
        if (r == rule) return name;
    }
    return "?";
}

std::optional<Rule> rule_from_string(std::string_view name) {
    for (const auto& [r, n] : kRuleNames) {
        if (n == name) return r;
    }
    return std::nullopt;
}

const std::vector<Rule>& all_rules() {
    static const std::vector<Rule> rules = [] {
        std::vector<Rule> out;
        for (const auto& entry : kRuleNames) out.push_back(entry.first);
        return out;
    }();
    return rules;
}

std::string_view to_string(ResultKind kind) { return kResultNames[static_cast<std::size_t>(kind)]; }

std::vector<Region> regions_of(const std::vector<TraceEvent>& events) {
    std::vector<Region> regions;
    std::vector<std::pair<std::size_t, std::size_t>> open;  // (id, position)
    for (std::size_t pos = 0; pos < events.size(); ++pos) {
        const auto* marker = std::get_if<MarkerEvent>(&events[pos]);
        if (marker == nullptr) continue;
        if (marker->kind == MarkerEvent::Kind::Start) {
            open.emplace_back(marker->app_id, pos);
        } else if (!open.empty() && open.back().first == marker->app_id) {
            regions.push_back(Region{marker->app_id, open.back().second, pos});
            open.pop_back();
        }
    }
    std::sort(regions.begin(), regions.end(),
              [](const Region& a, const Region& b) { return a.start < b.start; });
    return regions;
}

// ------------------------------
// text format
// ------------------------------

std::string annotated_text(const Snapshot& s, std::string_view attribute) {
    const std::string& text = s.text;
    std::string out;
    out.reserve(text.size() + attribute.size() + 6);
    bool parenthesized = s.span_start > 0 && s.span_end < text.size() &&
                         text[s.span_start - 1] == '(' && text[s.span_end] == ')';
    if (parenthesized) {
        out.append(text, 0, s.span_end + 1);
        out += "[@";
        out += attribute;
        out += ']';
        out.append(text, s.span_end + 1);
        return out;
    }
    out.append(text, 0, s.span_start);
    out += '(';
    out.append(s.highlighted());
    out += ")[@";
    out += attribute;
    out += ']';
    out.append(text, s.span_end);
    return out;
}

std::string emit_text(const Trace& t) {
    std::vector<std::string> lines;
    for (const TraceEvent& event : t.events) {
        std::visit(overloaded{
                       [&](const StepEvent& e) {
                           const Step& step = t.steps.at(e.step);
                           lines.push_back("(* Step " + std::to_string(step.index) + " *) " +
                                           annotated_text(step.pre, "stepper.redex"));
                           lines.push_back("(* Step " + std::to_string(step.index + 1) + " *) " +
                                           annotated_text(step.post, "stepper.reduct"));
                       },
                       [&](const MarkerEvent& m) {
                           lines.push_back("(* Application " + std::to_string(m.app_id) +
                                           (m.kind == MarkerEvent::Kind::Start ? " start *)"
                                                                               : " end *)"));
                       },
                   },
                   event);
    }
    std::string out;
    for (const std::string& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

namespace {

std::size_t parse_number(std::string_view s, std::string_view line) {
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
        throw TraceFormatError("bad number in line: " + std::string(line));
    }
    return value;
}

}  // namespace

std::vector<TextLine> read_text(std::string_view text) {
    std::vector<TextLine> out;
    while (!text.empty()) {
        std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
        if (line.empty()) continue;
        constexpr std::string_view kStep = "(* Step ";
        constexpr std::string_view kApp = "(* Application ";
        if (line.starts_with(kStep)) {
            std::size_t close = line.find(" *)", kStep.size());
            if (close == std::string_view::npos) throw TraceFormatError("unterminated step label");
            std::size_t label = parse_number(line.substr(kStep.size(), close - kStep.size()), line);
            std::string_view program = line.substr(close + 3);
            if (program.starts_with(' ')) program.remove_prefix(1);
            out.push_back(TextLine{TextLine::Kind::Step, label, std::string(program)});
        } else if (line.starts_with(kApp) && line.ends_with(" *)")) {
            std::string_view body = line.substr(kApp.size(), line.size() - kApp.size() - 3);
            std::size_t space = body.find(' ');
            if (space == std::string_view::npos) throw TraceFormatError("bad marker line");
            std::size_t id = parse_number(body.substr(0, space), line);
            std::string_view kind = body.substr(space + 1);
            if (kind != "start" && kind != "end") throw TraceFormatError("bad marker line");
            out.push_back(TextLine{kind == "start" ? TextLine::Kind::Start : TextLine::Kind::End,
                                   id, {}});
        } else {
            throw TraceFormatError("unrecognized line: " + std::string(line));
        }
    }
    return out;
}

// ------------------------------
// JSON
// ------------------------------

namespace {

json snapshot_json(const Snapshot& s) {
    return json{{"text", s.text}, {"span", json::array({s.span_start, s.span_end})}};
}

Snapshot snapshot_from(const json& j) {
    Snapshot s;
    s.text = j.at("text").get<std::string>();
    const json& span = j.at("span");
    if (!span.is_array() || span.size() != 2) throw TraceFormatError("span must be a pair");
    s.span_start = span[0].get<std::size_t>();
    s.span_end = span[1].get<std::size_t>();
    if (s.span_start > s.span_end || s.span_end > s.text.size()) {
        throw TraceFormatError("span out of range");
    }
    return s;
}

}  // namespace

std::string emit_json(const Trace& t) {
    json steps = json::array();
    for (const Step& s : t.steps) {
        steps.push_back(json{{"n", s.index},
                             {"pre", snapshot_json(s.pre)},
                             {"post", snapshot_json(s.post)},
                             {"rule", std::string(to_string(s.rule))},
                             {"output", s.output},
                             {"phrase", s.phrase}});
    }
    json regions = json::array();
    for (const Region& r : t.regions) {
        regions.push_back(json{{"id", r.id}, {"start", r.start}, {"end", r.end}});
    }
    json result{{"kind", std::string(to_string(t.result.kind))}, {"text", t.result.text}};
    if (!t.result.reason.empty()) result["reason"] = t.result.reason;
    json doc{{"source", t.source}, {"result", result}, {"steps", steps}, {"regions", regions}};
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

Trace load_json(std::string_view text) {
    Trace t;
    try {
        json doc = json::parse(text);
        t.source = doc.at("source").get<std::string>();
        const json& result = doc.at("result");
        std::string kind = result.at("kind").get<std::string>();
        auto found = std::find(kResultNames.begin(), kResultNames.end(), kind);
        if (found == kResultNames.end()) throw TraceFormatError("unknown result kind: " + kind);
        t.result.kind = static_cast<ResultKind>(found - kResultNames.begin());
        t.result.text = result.at("text").get<std::string>();
        t.result.reason = result.value("reason", std::string());

        for (const json& s : doc.at("steps")) {
            Step step;
            step.index = s.at("n").get<std::size_t>();
            step.pre = snapshot_from(s.at("pre"));
            step.post = snapshot_from(s.at("post"));
            std::string rule = s.at("rule").get<std::string>();
            auto r = rule_from_string(rule);
            if (!r) throw TraceFormatError("unknown rule: " + rule);
            step.rule = *r;
            step.output = s.at("output").get<std::string>();
            step.phrase = s.value("phrase", std::size_t{0});
            t.steps.push_back(std::move(step));
        }
        for (const json& r : doc.at("regions")) {
            t.regions.push_back(Region{r.at("id").get<std::size_t>(),
                                       r.at("start").get<std::size_t>(),
                                       r.at("end").get<std::size_t>()});
        }
    } catch (const json::exception& e) {
        throw TraceFormatError(std::string("malformed trace: ") + e.what());
    }

    // Rebuild the interleaved event sequence from the marker positions.
    std::size_t total = t.steps.size() + 2 * t.regions.size();
    std::vector<std::optional<MarkerEvent>> markers(total);
    for (const Region& r : t.regions) {
        if (r.start >= r.end || r.end >= total || markers[r.start] || markers[r.end]) {
            throw TraceFormatError("inconsistent region " + std::to_string(r.id));
        }
        markers[r.start] = MarkerEvent{MarkerEvent::Kind::Start, r.id};
        markers[r.end] = MarkerEvent{MarkerEvent::Kind::End, r.id};
    }
    std::size_t next_step = 0;
    for (const auto& m : markers) {
        if (m) {
            t.events.emplace_back(*m);
        } else {
            t.events.emplace_back(StepEvent{next_step++});
        }
    }
    return t;
}

}  // namespace ministep
