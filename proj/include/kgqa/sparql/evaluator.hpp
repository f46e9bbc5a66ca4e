#pragma once

#include "kgqa/rdf/graph.hpp"
#include "kgqa/sparql/ast.hpp"
#include "kgqa/sparql/results.hpp"

namespace kgqa::sparql {

/// Evaluates a parsed SELECT query against an in-memory graph.
///
/// Nested groups, OPTIONAL and UNION are evaluated by substituting the
/// outer solution into the inner pattern, which matches the standard
/// algebra for well-designed patterns. SERVICE is rejected.
ResultSet evaluate(const Query& query, const rdf::Graph& graph);

/// Total order used by ORDER BY: unbound < blank < IRI < literal; numeric
/// literals compare by value, other literals lexically.
int compare_terms(const Binding& a, const Binding& b);

}  // namespace kgqa::sparql
