#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/core/csv.hpp"
#include "kgqa/rdf/term.hpp"

namespace kgqa::sparql {

using Binding = std::optional<rdf::Term>;

/// Tabular SELECT results: one column per projected variable.
struct ResultSet {
    std::vector<std::string> variables;
    std::vector<std::vector<Binding>> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

/// SPARQL 1.1 Query Results JSON Format.
nlohmann::json to_json(const ResultSet& rs);
ResultSet from_json(const nlohmann::json& doc);

/// Header = variable names; cells = lexical form (IRIs without brackets,
/// unbound as empty).
csv::Table to_csv_table(const ResultSet& rs);

}  // namespace kgqa::sparql
