#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ministep {

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Concat };
enum class UnaryOp { Neg, Not };

std::string_view symbol(BinaryOp op);
std::string_view symbol(UnaryOp op);

// ------------------------------
// patterns
// ------------------------------

struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

struct PVar { std::string name; };
struct PWild {};
struct PInt { std::int64_t value; };
struct PBool { bool value; };
struct PStr { std::string value; };
struct PUnit {};
struct PNil {};
struct PCons { PatternPtr head, tail; };
struct PTuple { std::vector<PatternPtr> items; };
struct PTag { std::string name; };

struct Pattern {
    std::variant<PVar, PWild, PInt, PBool, PStr, PUnit, PNil, PCons, PTuple, PTag> node;

    template <typename T> const T* as() const { return std::get_if<T>(&node); }
    template <typename T> bool is() const { return std::holds_alternative<T>(node); }
};

template <typename T> PatternPtr make_pattern(T node) {
    return std::make_shared<const Pattern>(Pattern{std::move(node)});
}

/// Variables bound by `p`, in left-to-right order.
std::vector<std::string> pattern_vars(const Pattern& p);

// ------------------------------
// expressions
// ------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Clause {
    PatternPtr pattern;
    ExprPtr body;
};
using Clauses = std::vector<Clause>;

struct IntLit { std::int64_t value; };
struct BoolLit { bool value; };
struct StrLit { std::string value; };
struct Unit {};
struct Var { std::string name; };
struct Fun { PatternPtr param; ExprPtr body; };
struct App { ExprPtr fn, arg; };
struct BinOp { BinaryOp op; ExprPtr left, right; };
struct UnOp { UnaryOp op; ExprPtr operand; };
struct If { ExprPtr cond, then_branch, else_branch; };
struct Let { PatternPtr binding; ExprPtr bound, body; };
struct LetRec { std::string name; PatternPtr param; ExprPtr fbody, body; };
struct Nil {};
struct Cons { ExprPtr head, tail; };
struct Tuple { std::vector<ExprPtr> items; };
struct Match { ExprPtr scrutinee; Clauses clauses; };
struct Try { ExprPtr tryee; Clauses clauses; };
struct Raise { ExprPtr payload; };
struct Seq { ExprPtr first, second; };
// Reference to a top-level function definition or a predefined primitive.
// Kept symbolic so traces display `f 4` rather than the function body.
struct GlobalRef { std::string name; };
// Value form of a local `let rec`; `fbody` may mention `name`.
struct RecClosure { std::string name; PatternPtr param; ExprPtr fbody; };
// Constant exception payload such as Division_by_zero.
struct Tag { std::string name; };

struct Expr {
    std::variant<IntLit, BoolLit, StrLit, Unit, Var, Fun, App, BinOp, UnOp, If, Let, LetRec,
                 Nil, Cons, Tuple, Match, Try, Raise, Seq, GlobalRef, RecClosure, Tag>
        node;

    template <typename T> const T* as() const { return std::get_if<T>(&node); }
    template <typename T> bool is() const { return std::holds_alternative<T>(node); }
};

template <typename T> ExprPtr make(T node) {
    return std::make_shared<const Expr>(Expr{std::move(node)});
}

inline ExprPtr int_lit(std::int64_t n) { return make(IntLit{n}); }
inline ExprPtr bool_lit(bool b) { return make(BoolLit{b}); }
inline ExprPtr str_lit(std::string s) { return make(StrLit{std::move(s)}); }
inline ExprPtr unit() { return make(Unit{}); }
inline ExprPtr nil() { return make(Nil{}); }
inline ExprPtr var(std::string x) { return make(Var{std::move(x)}); }
inline ExprPtr global(std::string x) { return make(GlobalRef{std::move(x)}); }
inline ExprPtr tag(std::string x) { return make(Tag{std::move(x)}); }
inline ExprPtr app(ExprPtr f, ExprPtr a) { return make(App{std::move(f), std::move(a)}); }
inline ExprPtr binop(BinaryOp op, ExprPtr l, ExprPtr r) {
    return make(BinOp{op, std::move(l), std::move(r)});
}
inline ExprPtr cons(ExprPtr h, ExprPtr t) { return make(Cons{std::move(h), std::move(t)}); }
inline ExprPtr raise_expr(ExprPtr e) { return make(Raise{std::move(e)}); }
inline ExprPtr fun(std::string x, ExprPtr body) {
    return make(Fun{make_pattern(PVar{std::move(x)}), std::move(body)});
}

// ------------------------------
// programs
// ------------------------------

struct Define { std::string name; ExprPtr bound; };
struct DefineRec { std::string name; PatternPtr param; ExprPtr fbody; };
struct Eval { ExprPtr expr; };

using Item = std::variant<Define, DefineRec, Eval>;

/// Top-level items in source order. Definitions and main expressions may interleave;
/// every item only refers to definitions that precede it.
struct Program {
    std::vector<Item> items;
};

// ------------------------------
// predicates and analyses
// ------------------------------

/// Predefined primitives available as GlobalRefs.
bool is_builtin(std::string_view name);
const std::vector<std::string>& builtin_names();

/// Constant exception constructors accepted by the parser.
bool is_known_tag(std::string_view name);

inline constexpr std::string_view kDivisionByZero = "Division_by_zero";
inline constexpr std::string_view kMatchFailure = "Match_failure";

/// Values of the object language. A GlobalRef always names a function: top-level
/// definitions bound to non-function values are inlined before they are used.
bool is_value(const Expr& e);

/// Function values: Fun, RecClosure, GlobalRef.
bool is_function(const Expr& e);

std::set<std::string> free_vars(const Expr& e);

bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);
bool equal(const Pattern& a, const Pattern& b);

/// Number of nodes; used by generators and limits.
std::size_t size(const Expr& e);

}  // namespace ministep
