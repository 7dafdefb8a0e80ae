#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ministep/ast.hpp"

namespace ministep {

enum class Rule {
    Beta,
    GlobalApply,
    Delta,
    IfTrue,
    IfFalse,
    Let,
    LetRec,
    Match,
    Seq,
    TryValue,
    TryHandle,
    RaiseDiscard,
    Reraise,
    Print,
};

std::string_view to_string(Rule rule);
std::optional<Rule> rule_from_string(std::string_view name);
const std::vector<Rule>& all_rules();

/// One printed program with the byte range [start, end) of the highlighted subterm.
struct Snapshot {
    std::string text;
    std::size_t span_start = 0;
    std::size_t span_end = 0;

    std::string_view highlighted() const {
        return std::string_view(text).substr(span_start, span_end - span_start);
    }
    bool operator==(const Snapshot&) const = default;
};

/// One reduction. `pre` is labeled `index`, `post` is labeled `index + 1`.
struct Step {
    std::size_t index = 0;
    Snapshot pre;
    Snapshot post;
    Rule rule = Rule::Beta;
    std::string output;
    /// Top-level phrase (definition or main expression) this step belongs to.
    std::size_t phrase = 0;

    bool operator==(const Step&) const = default;
};

struct StepEvent {
    std::size_t step;
    bool operator==(const StepEvent&) const = default;
};

struct MarkerEvent {
    enum class Kind { Start, End };
    Kind kind;
    std::size_t app_id;
    bool operator==(const MarkerEvent&) const = default;
};

using TraceEvent = std::variant<StepEvent, MarkerEvent>;

/// A skippable application: positions of its start/end markers in the event list.
struct Region {
    std::size_t id;
    std::size_t start;
    std::size_t end;
    bool operator==(const Region&) const = default;
};

enum class ResultKind { Value, Exception, Stuck, Limit };

std::string_view to_string(ResultKind kind);

struct ResultSummary {
    ResultKind kind = ResultKind::Value;
    /// Final program: the value, `raise v`, or the program that got stuck.
    std::string text;
    /// Why evaluation got stuck; empty otherwise.
    std::string reason;
    bool operator==(const ResultSummary&) const = default;
};

struct Trace {
    std::string source;
    std::vector<Step> steps;
    std::vector<TraceEvent> events;
    std::vector<Region> regions;
    ResultSummary result;

    bool operator==(const Trace&) const = default;
};

/// Recomputes the region table from the marker events.
std::vector<Region> regions_of(const std::vector<TraceEvent>& events);

// ------------------------------
// serialization
// ------------------------------

/// Step lines `(* Step n *) program` with inline redex/reduct attributes, and
/// `(* Application k start *)` / `(* Application k end *)` marker lines.
std::string emit_text(const Trace& t);

std::string emit_json(const Trace& t);

class TraceFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inverse of emit_json. Throws TraceFormatError on schema violations.
Trace load_json(std::string_view json);

/// One line of the text format.
struct TextLine {
    enum class Kind { Step, Start, End };
    Kind kind;
    std::size_t label;    // step label or application id
    std::string program;  // for Step lines, the annotated program text
};

/// Line-level reading of emit_text output. Throws TraceFormatError.
std::vector<TextLine> read_text(std::string_view text);

/// Rebuilds the attributed program text of a snapshot (the form used by emit_text).
std::string annotated_text(const Snapshot& s, std::string_view attribute);

// ------------------------------
// validation
// ------------------------------

enum class ViolationKind {
    IndexGap,
    ChainBreak,
    SpanOutOfRange,
    SpanMismatch,
    Unparsable,
    RewriteUnsound,
    MarkerImbalance,
    RegionMismatch,
    ResultMismatch,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> step;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    bool has(ViolationKind kind) const;
};

struct ValidateOptions {
    /// Fuel for the per-step semantic check; steps whose redex does not finish within
    /// it are only checked syntactically.
    std::size_t semantic_fuel = 2000;
    bool semantic_check = true;
};

/// Independent check of a trace using only its texts, spans and the source program.
ValidationReport validate(const Trace& t, const ValidateOptions& options = {});

}  // namespace ministep
