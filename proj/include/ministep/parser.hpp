#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ministep/ast.hpp"

namespace ministep {

struct SourceSpan {
    std::size_t start_offset = 0;
    std::size_t end_offset = 0;
    int line = 1;
    int column = 1;
};

/// Base of every error raised while reading source text.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, SourceSpan span);
    const SourceSpan& span() const { return span_; }
    const std::string& detail() const { return detail_; }

private:
    SourceSpan span_;
    std::string detail_;
};

class SyntaxError : public ParseError {
public:
    using ParseError::ParseError;
};

class UnboundVariable : public ParseError {
public:
    UnboundVariable(const std::string& name, SourceSpan span);
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

struct ParseOptions {
    /// Names resolved to GlobalRef when not shadowed by a local binder. Builtins are
    /// always included.
    std::set<std::string> globals;
    /// Unknown lowercase names become Var instead of raising UnboundVariable.
    bool allow_free_vars = false;
};

/// `(e)[@name]` attribute attached to the node `target` of the parsed tree.
struct Attribute {
    std::string name;
    ExprPtr target;
};

struct AnnotatedExpr {
    ExprPtr expr;
    std::vector<Attribute> attributes;
};

Program parse_program(std::string_view src);

ExprPtr parse_expr(std::string_view src, const ParseOptions& options = {});

/// Like parse_expr, also reporting every `[@attr]` occurrence.
AnnotatedExpr parse_annotated_expr(std::string_view src, const ParseOptions& options = {});

/// Names of all top-level definitions of `p`.
std::set<std::string> global_names(const Program& p);

}  // namespace ministep
