#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgqa/chain/schema.hpp"

namespace kgqa::chain {

struct SanitizeResult {
    std::optional<std::string> query;  // set on success
    std::string error;                 // why nothing usable was found

    bool ok() const { return query.has_value(); }
};

/// Pulls the first complete, parseable SELECT query out of raw LLM output.
///
/// Code fences and surrounding prose are dropped, PREFIX/BASE lines directly
/// before the SELECT are kept, and prefixes that are used but undeclared are
/// declared from the schema (or the standard rdf/rdfs/owl/xsd/wd/wdt set).
/// Idempotent: sanitizing a sanitized query returns it unchanged.
SanitizeResult sanitize_query(std::string_view raw, const SchemaDocument* schema = nullptr);

struct Violation {
    std::string iri;
    std::string role;  // "predicate" or "class"
    bool operator==(const Violation&) const = default;
};

/// IRIs used as predicates or classes that the schema does not declare.
/// Standard vocabulary is exempt. Throws Error(Parse) if the query does not
/// parse.
std::vector<Violation> validate_schema_compliance(std::string_view query, const SchemaDocument& schema);

}  // namespace kgqa::chain
