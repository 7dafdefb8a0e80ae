// ministep: step, run or check a mini-ML program.

#include <cstdio>
#include <fstream>
#include <limits>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ministep/engine.hpp"
#include "ministep/parser.hpp"
#include "ministep/printer.hpp"
#include "ministep/trace.hpp"

using namespace ministep;

namespace {

enum Exit { kOk = 0, kParseError = 1, kStuck = 2, kLimit = 3 };

struct Options {
    std::string input;
    std::string format = "text";
    std::size_t max_steps = 10000;
    std::string output;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

int exit_code(ResultKind kind) {
    switch (kind) {
        case ResultKind::Stuck: return kStuck;
        case ResultKind::Limit: return kLimit;
        default: return kOk;
    }
}

// Best-effort type of a value, for the result line of `run`.
std::string type_of(const Expr& v) {
    if (v.is<IntLit>()) return "int";
    if (v.is<BoolLit>()) return "bool";
    if (v.is<StrLit>()) return "string";
    if (v.is<Unit>()) return "unit";
    if (v.is<Tag>()) return "exn";
    if (v.is<Nil>()) return "'a list";
    if (const auto* c = v.as<Cons>()) {
        std::string head = type_of(*c->head);
        if (head.find(' ') != std::string::npos) head = "(" + head + ")";
        return head + " list";
    }
    if (const auto* t = v.as<Tuple>()) {
        std::string out;
        for (std::size_t i = 0; i < t->items.size(); ++i) {
            std::string item = type_of(*t->items[i]);
            if (item.find(" * ") != std::string::npos || item.find("->") != std::string::npos) {
                item = "(" + item + ")";
            }
            out += (i > 0 ? " * " : "") + item;
        }
        return out;
    }
    return "'a -> 'b";
}

std::string value_text(const Expr& v) {
    if (is_function(v)) return "<fun>";
    return v.is<Tuple>() ? "(" + to_string(v) + ")" : to_string(v);
}

void report_stuck(const RunResult& r) {
    const auto& s = std::get<StuckOutcome>(r.outcome);
    std::cerr << "stuck: " << s.reason;
    if (s.offending) std::cerr << " in " << to_string(*s.offending);
    std::cerr << "\n";
}

int cmd_step(const Options& o) {
    std::string source = read_file(o.input);
    EngineOptions eo;
    eo.max_steps = o.max_steps;
    StepRun run = step_source(source, eo);
    Output out(o.output);
    out.stream() << (o.format == "json" ? emit_json(run.trace) : emit_text(run.trace));
    if (run.result.kind() == ResultKind::Stuck) report_stuck(run.result);
    if (run.result.kind() == ResultKind::Limit) {
        std::cerr << "step limit of " << o.max_steps << " exceeded\n";
    }
    return exit_code(run.result.kind());
}

int cmd_run(const Options& o) {
    Program p = parse_program(read_file(o.input));
    EngineOptions eo;
    eo.max_steps = o.max_steps;
    ReferenceRun run = reference_eval(p, eo);
    Output out(o.output);
    std::ostream& os = out.stream();
    os << run.output;
    if (!run.output.empty() && run.output.back() != '\n') os << "\n";
    std::visit(
        [&](const auto& outcome) {
            using T = std::decay_t<decltype(outcome)>;
            if constexpr (std::is_same_v<T, ValueOutcome>) {
                os << "- : " << type_of(*outcome.value) << " = " << value_text(*outcome.value)
                   << "\n";
            } else if constexpr (std::is_same_v<T, ExceptionOutcome>) {
                os << "Exception: " << to_string(*outcome.payload) << "\n";
            } else if constexpr (std::is_same_v<T, StuckOutcome>) {
                report_stuck(run.result);
            } else {
                std::cerr << "step limit of " << o.max_steps << " exceeded\n";
            }
        },
        run.result.outcome);
    return exit_code(run.result.kind());
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int report_violations(const ValidationReport& report, std::ostream& os) {
    for (const Violation& v : report.violations) {
        os << to_string(v.kind);
        if (v.step) os << " at step " << *v.step;
        os << ": " << v.message << "\n";
    }
    return report.ok() ? kOk : 1;
}

int check_trace_file(const Options& o, std::ostream& os) {
    Trace t = load_json(read_file(o.input));
    ValidationReport report = validate(t);
    if (!report.ok()) return report_violations(report, os);
    EngineOptions eo;
    eo.max_steps = o.max_steps;
    ReferenceRun ref = reference_eval(parse_program(t.source), eo);
    if (ref.result.kind() == ResultKind::Limit || t.result.kind == ResultKind::Limit) {
        os << "inconclusive: step limit reached\n";
        return kLimit;
    }
    bool agree = ref.result.kind() == t.result.kind;
    if (agree && t.result.kind != ResultKind::Stuck) {
        try {
            Program p = parse_program(t.source);
            ParseOptions po;
            po.globals = global_names(p);
            po.allow_free_vars = true;
            agree = to_string(*parse_expr(t.result.text, po)) == final_program(ref.result);
        } catch (const ParseError&) {
            agree = false;
        }
    }
    if (!agree) {
        os << "ResultMismatch: trace ends in " << to_string(t.result.kind) << " '"
           << t.result.text << "' but the reference gives " << describe(ref.result) << "\n";
        return 1;
    }
    std::string output;
    for (const Step& s : t.steps) output += s.output;
    if (output != ref.output) {
        os << "OutputMismatch: trace prints '" << output << "' but the reference prints '"
           << ref.output << "'\n";
        return 1;
    }
    os << "ok: " << t.steps.size() << " steps, " << describe(ref.result) << "\n";
    return kOk;
}

int cmd_check(const Options& o) {
    Output out(o.output);
    std::ostream& os = out.stream();
    if (ends_with(o.input, ".json")) return check_trace_file(o, os);

    std::string source = read_file(o.input);
    EngineOptions eo;
    eo.max_steps = o.max_steps;
    StepRun run = step_source(source, eo);
    ReferenceRun ref = reference_eval(parse_program(source), eo);
    ValidationReport report = validate(run.trace);
    if (!report.ok()) return report_violations(report, os);
    if (run.result.kind() == ResultKind::Limit || ref.result.kind() == ResultKind::Limit) {
        os << "inconclusive: step limit reached\n";
        return kLimit;
    }
    if (!same_outcome(run.result, ref.result)) {
        os << "ResultMismatch: stepper gives " << describe(run.result) << " but the reference gives "
           << describe(ref.result) << "\n";
        return 1;
    }
    if (run.output != ref.output) {
        os << "OutputMismatch: stepper prints '" << run.output << "' but the reference prints '"
           << ref.output << "'\n";
        return 1;
    }
    os << "ok: " << run.trace.steps.size() << " steps, " << describe(run.result) << "\n";
    return kOk;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("input", o.input, "Program (.ml) or, for check, a JSON trace")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--format", o.format, "Trace format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    sub->add_option("--max-steps", o.max_steps, "Maximum number of reduction steps")
        ->envname("MINISTEP_MAX_STEPS")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
        ->capture_default_str();
    sub->add_option("--output", o.output, "Write to this file instead of standard output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Algebraic stepper for a small subset of OCaml"};
    app.require_subcommand(1);
    Options o;
    CLI::App* step = app.add_subcommand("step", "Print every reduction step of the program");
    CLI::App* run = app.add_subcommand("run", "Evaluate the program and print its result");
    CLI::App* check =
        app.add_subcommand("check", "Validate a trace and compare it with direct evaluation");
    for (CLI::App* sub : {step, run, check}) add_common(sub, o);
    CLI11_PARSE(app, argc, argv);

    try {
        if (step->parsed()) return cmd_step(o);
        if (run->parsed()) return cmd_run(o);
        return cmd_check(o);
    } catch (const ParseError& e) {
        std::cerr << o.input << ":" << e.what() << "\n";
        return kParseError;
    } catch (const TraceFormatError& e) {
        std::cerr << o.input << ": " << e.what() << "\n";
        return kParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParseError;
    }
}
