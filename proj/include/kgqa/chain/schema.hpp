#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgqa::chain {

struct PropertyInfo {
    std::string iri;
    std::vector<std::string> domain;
    std::vector<std::string> range;
};

/// The knowledge graph's Turtle schema and the inventory extracted from it.
///
/// Classes are subjects typed owl:Class or rdfs:Class. Properties are
/// subjects typed rdf:Property or an owl property type, plus anything given
/// an rdfs:domain or rdfs:range.
struct SchemaDocument {
    std::string turtle_text;
    std::vector<std::string> classes;  // document order
    std::vector<PropertyInfo> properties;
    std::vector<std::pair<std::string, std::string>> prefixes;  // label, namespace

    bool has_class(std::string_view iri) const;
    bool has_property(std::string_view iri) const;
    bool has_term(std::string_view iri) const { return has_class(iri) || has_property(iri); }
    bool empty() const { return classes.empty() && properties.empty(); }

    std::optional<std::string> namespace_for(std::string_view label) const;
    /// prefix:local when a declared namespace matches, otherwise <iri>.
    std::string compact_iri(std::string_view iri) const;
    /// One line per class and property (with domain/range), for prompts.
    std::string compact_inventory() const;
};

/// Throws Error(Config) carrying the Turtle line number on malformed input.
SchemaDocument load_schema(std::string_view turtle_text);

/// Namespaces every query may use without declaring them in the schema.
const std::map<std::string, std::string>& standard_prefixes();

/// True for rdf:, rdfs:, owl: and xsd: IRIs.
bool is_standard_vocabulary(std::string_view iri);

/// Local name after the last '#', '/' or ':'.
std::string local_name(std::string_view iri);

}  // namespace kgqa::chain
