#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ministep/ast.hpp"
#include "ministep/parser.hpp"

namespace ministep {

enum class AnnotationKind { Redex, Reduct };

/// Marks one node, identified by address, of the tree being printed.
struct Annotation {
    AnnotationKind kind;
    const Expr* target;
};

/// "stepper.redex" / "stepper.reduct"
std::string_view attribute_name(AnnotationKind kind);

struct Printed {
    std::string text;
    /// Byte range of the annotated node, excluding any parentheses around it.
    std::optional<SourceSpan> span;
};

/// Minimal-parenthesis concrete syntax. The result re-parses to `e`.
Printed print_expr(const Expr& e, std::optional<Annotation> ann = std::nullopt);

inline std::string to_string(const Expr& e) { return print_expr(e).text; }

/// Same text, with the annotated node written as `(<node>)[@stepper.redex]`.
std::string print_annotated_ocaml(const Expr& e, std::optional<Annotation> ann);

std::string to_string(const Pattern& p);

std::string print_program(const Program& p);

/// OCaml-style escaping for the body of a string literal; bytes outside printable ASCII become `\ddd`.
std::string escape_string(std::string_view s);

}  // namespace ministep
