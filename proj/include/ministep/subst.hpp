#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ministep/ast.hpp"

namespace ministep {

/// Ordered variable-to-value map produced by pattern matching. Every value is closed.
using Bindings = std::vector<std::pair<std::string, ExprPtr>>;

/// Replaces the free occurrences of `x` in `e` by the closed value `v`. Binders of `x`
/// shadow. Unchanged subtrees are shared with `e`.
ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& v);

/// Simultaneous substitution.
ExprPtr subst_many(const ExprPtr& e, const Bindings& b);

/// Replaces GlobalRef `name` everywhere in `e` by the closed value `v`.
ExprPtr subst_global(const ExprPtr& e, const std::string& name, const ExprPtr& v);

/// First-order matching of a value against a pattern; nullopt on mismatch.
std::optional<Bindings> match_pattern(const Pattern& p, const ExprPtr& v);

/// First clause whose pattern matches `v`, with its body already instantiated.
std::optional<ExprPtr> select_clause(const Clauses& clauses, const ExprPtr& v);

}  // namespace ministep
