#include <optional>

#include "ministep/detail/overloaded.hpp"
#include "ministep/engine.hpp"
#include "ministep/parser.hpp"
#include "ministep/trace.hpp"

namespace ministep {

using detail::overloaded;

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::IndexGap: return "IndexGap";
        case ViolationKind::ChainBreak: return "ChainBreak";
        case ViolationKind::SpanOutOfRange: return "SpanOutOfRange";
        case ViolationKind::SpanMismatch: return "SpanMismatch";
        case ViolationKind::Unparsable: return "Unparsable";
        case ViolationKind::RewriteUnsound: return "RewriteUnsound";
        case ViolationKind::MarkerImbalance: return "MarkerImbalance";
        case ViolationKind::RegionMismatch: return "RegionMismatch";
        case ViolationKind::ResultMismatch: return "ResultMismatch";
    }
    return "?";
}

bool ValidationReport::has(ViolationKind kind) const {
    for (const Violation& v : violations) {
        if (v.kind == kind) return true;
    }
    return false;
}

namespace {

struct ParsedSnapshot {
    ExprPtr whole;
    ExprPtr part;  // tree of the highlighted text
};

class Validator {
public:
    Validator(const Trace& t, const ValidateOptions& options) : t_(t), options_(options) {
        parse_opts_.allow_free_vars = true;
        try {
            Program p = parse_program(t.source);
            parse_opts_.globals = global_names(p);
            if (!p.items.empty() && std::holds_alternative<Eval>(p.items.back())) {
                final_phrase_ = p.items.size() - 1;
            }
            if (options_.semantic_check) {
                EngineOptions eo;
                eo.max_steps = options_.semantic_fuel;
                globals_ = resolve_globals(p, eo);
                have_globals_ = true;
            }
        } catch (const ParseError&) {
            // without a readable source only the syntactic checks apply
        }
    }

    ValidationReport run() {
        check_indices();
        std::vector<std::optional<ParsedSnapshot>> pre(t_.steps.size());
        std::vector<std::optional<ParsedSnapshot>> post(t_.steps.size());
        for (std::size_t i = 0; i < t_.steps.size(); ++i) {
            const Step& s = t_.steps[i];
            pre[i] = snapshot(s.pre, "stepper.redex", i);
            post[i] = snapshot(s.post, "stepper.reduct", i);
            if (pre[i] && post[i]) check_rewrite(s, *pre[i], *post[i], i);
        }
        check_chain(pre, post);
        check_events();
        check_result(post);
        return std::move(report_);
    }

private:
    const Trace& t_;
    const ValidateOptions& options_;
    ParseOptions parse_opts_;
    Globals globals_;
    bool have_globals_ = false;
    std::optional<std::size_t> final_phrase_;
    ValidationReport report_;

    void flag(ViolationKind kind, std::optional<std::size_t> step, std::string message) {
        report_.violations.push_back(Violation{kind, step, std::move(message)});
    }

    std::optional<ExprPtr> parse(std::string_view text) {
        try {
            return parse_expr(text, parse_opts_);
        } catch (const ParseError&) {
            return std::nullopt;
        }
    }

    void check_indices() {
        for (std::size_t i = 0; i < t_.steps.size(); ++i) {
            if (t_.steps[i].index != i) {
                flag(ViolationKind::IndexGap, i,
                     "step " + std::to_string(i) + " is labeled " +
                         std::to_string(t_.steps[i].index));
            }
        }
    }

    std::optional<ParsedSnapshot> snapshot(const Snapshot& s, std::string_view attribute,
                                           std::size_t i) {
        if (s.span_start > s.span_end || s.span_end > s.text.size()) {
            flag(ViolationKind::SpanOutOfRange, i, "span outside of '" + s.text + "'");
            return std::nullopt;
        }
        auto whole = parse(s.text);
        if (!whole) {
            flag(ViolationKind::Unparsable, i, "cannot parse '" + s.text + "'");
            return std::nullopt;
        }
        auto part = parse(s.highlighted());
        if (!part) {
            flag(ViolationKind::SpanMismatch, i,
                 "highlight '" + std::string(s.highlighted()) + "' is not a subterm");
            return std::nullopt;
        }
        // The attributed form must denote the same program with the attribute on that subterm.
        try {
            AnnotatedExpr a = parse_annotated_expr(annotated_text(s, attribute), parse_opts_);
            bool found = false;
            for (const Attribute& attr : a.attributes) {
                found = found || (attr.name == attribute && equal(attr.target, *part));
            }
            if (!found || !equal(a.expr, *whole)) {
                flag(ViolationKind::SpanMismatch, i,
                     "highlight '" + std::string(s.highlighted()) + "' is not a subterm of '" +
                         s.text + "'");
                return std::nullopt;
            }
        } catch (const ParseError&) {
            flag(ViolationKind::SpanMismatch, i,
                 "highlight '" + std::string(s.highlighted()) + "' is not a subterm");
            return std::nullopt;
        }
        return ParsedSnapshot{*whole, *part};
    }

    void check_rewrite(const Step& s, const ParsedSnapshot& pre, const ParsedSnapshot& post,
                       std::size_t i) {
        std::string rewritten = s.pre.text.substr(0, s.pre.span_start) + "(" +
                                std::string(s.post.highlighted()) + ")" +
                                s.pre.text.substr(s.pre.span_end);
        auto tree = parse(rewritten);
        if (!tree || !equal(*tree, post.whole)) {
            flag(ViolationKind::RewriteUnsound, i,
                 "replacing the redex by the reduct gives '" + rewritten + "', not '" +
                     s.post.text + "'");
            return;
        }
        if (!options_.semantic_check || !have_globals_) return;
        EngineOptions eo;
        eo.max_steps = options_.semantic_fuel;
        ReferenceRun before = reference_eval_expr(pre.part, globals_, eo);
        if (before.result.kind() == ResultKind::Limit) return;
        ReferenceRun after = reference_eval_expr(post.part, globals_, eo);
        if (after.result.kind() == ResultKind::Limit) return;
        if (!same_outcome(before.result, after.result) ||
            before.output != s.output + after.output) {
            flag(ViolationKind::RewriteUnsound, i,
                 "redex gives " + describe(before.result) + " but reduct gives " +
                     describe(after.result));
        }
    }

    void check_chain(const std::vector<std::optional<ParsedSnapshot>>& pre,
                     const std::vector<std::optional<ParsedSnapshot>>& post) {
        for (std::size_t i = 0; i + 1 < t_.steps.size(); ++i) {
            if (!post[i] || !pre[i + 1]) continue;
            if (t_.steps[i].phrase == t_.steps[i + 1].phrase) {
                if (!equal(post[i]->whole, pre[i + 1]->whole)) {
                    flag(ViolationKind::ChainBreak, i + 1,
                         "step " + std::to_string(i + 1) + " starts from '" +
                             t_.steps[i + 1].pre.text + "' but step " + std::to_string(i) +
                             " ended in '" + t_.steps[i].post.text + "'");
                }
            } else if (!finished(post[i]->whole)) {
                flag(ViolationKind::ChainBreak, i + 1,
                     "phrase ended in the unfinished program '" + t_.steps[i].post.text + "'");
            }
        }
    }

    static bool finished(const ExprPtr& e) {
        if (const auto* r = e->as<Raise>()) return is_value(*r->payload);
        return is_value(*e);
    }

    void check_events() {
        std::vector<std::size_t> open;
        std::size_t expected_step = 0;
        const auto& events = t_.events;
        for (std::size_t pos = 0; pos < events.size(); ++pos) {
            if (const auto* s = std::get_if<StepEvent>(&events[pos])) {
                if (s->step != expected_step) {
                    flag(ViolationKind::IndexGap, s->step, "step events out of order");
                }
                expected_step = s->step + 1;
                continue;
            }
            const auto& m = std::get<MarkerEvent>(events[pos]);
            if (m.kind == MarkerEvent::Kind::Start) {
                open.push_back(m.app_id);
                std::size_t next = pos + 1;
                while (next < events.size() && !std::holds_alternative<StepEvent>(events[next])) {
                    ++next;
                }
                if (next == events.size() || std::get<StepEvent>(events[next]).step != m.app_id) {
                    flag(ViolationKind::MarkerImbalance, std::nullopt,
                         "application " + std::to_string(m.app_id) +
                             " does not start at step " + std::to_string(m.app_id));
                }
            } else if (open.empty() || open.back() != m.app_id) {
                flag(ViolationKind::MarkerImbalance, std::nullopt,
                     "unexpected end of application " + std::to_string(m.app_id));
            } else {
                open.pop_back();
            }
        }
        if (expected_step != t_.steps.size()) {
            flag(ViolationKind::IndexGap, std::nullopt, "event list does not cover every step");
        }
        for (std::size_t id : open) {
            flag(ViolationKind::MarkerImbalance, std::nullopt,
                 "application " + std::to_string(id) + " never ends");
        }
        if (regions_of(events) != t_.regions) {
            flag(ViolationKind::RegionMismatch, std::nullopt,
                 "region table disagrees with the markers");
        }
    }

    void check_result(const std::vector<std::optional<ParsedSnapshot>>& post) {
        if (t_.steps.empty() || !post.back()) return;
        ResultKind kind = t_.result.kind;
        if (kind == ResultKind::Value && t_.steps.back().phrase != final_phrase_) return;
        if (kind != ResultKind::Value && kind != ResultKind::Exception) return;
        auto result = parse(t_.result.text);
        if (!result || !equal(*result, post.back()->whole)) {
            flag(ViolationKind::ResultMismatch, std::nullopt,
                 "result '" + t_.result.text + "' differs from the last program '" +
                     t_.steps.back().post.text + "'");
        }
    }
};

}  // namespace

ValidationReport validate(const Trace& t, const ValidateOptions& options) {
    ValidationReport report;
    run_with_large_stack([&] { report = Validator(t, options).run(); });
    return report;
}

}  // namespace ministep
