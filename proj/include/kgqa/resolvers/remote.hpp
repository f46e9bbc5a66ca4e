#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "kgqa/core/http.hpp"
#include "kgqa/resolvers/entity.hpp"
#include "kgqa/sparql/endpoint.hpp"

namespace kgqa::resolvers {

/// SMILES -> InChIKey through the GNPS structure service
/// (GET {base}/inchikey?smiles=...). Accepts a plain-text key or a JSON
/// object with an "inchikey" field; anything else is an upstream error.
class SmilesResolver {
public:
    SmilesResolver(std::string base_url, std::shared_ptr<http::Transport> transport);
    ResolvedEntity resolve(std::string_view smiles) const;

private:
    std::string base_url_;
    std::shared_ptr<http::Transport> transport_;
};

inline constexpr std::string_view kChemblTargetIriPrefix = "https://www.ebi.ac.uk/chembl/target_report_card/";

/// Target name -> ChEMBL target IRI via the ChEMBL REST search
/// (GET {base}/target/search?q=..., XML). An exact preferred-name match wins,
/// otherwise the first hit.
class TargetResolver {
public:
    TargetResolver(std::string base_url, std::shared_ptr<http::Transport> transport);
    Resolution resolve(std::string_view name) const;

private:
    std::string base_url_;
    std::shared_ptr<http::Transport> transport_;
};

/// Taxon name -> Wikidata entity IRI. Matches the taxon-name property
/// first, English label as fallback.
class TaxonResolver {
public:
    explicit TaxonResolver(std::shared_ptr<sparql::Endpoint> wikidata, std::string taxon_name_property = "P225");
    Resolution resolve(std::string_view name) const;
    std::string build_query(std::string_view name) const;

private:
    std::shared_ptr<sparql::Endpoint> endpoint_;
    std::string name_property_;
};

/// Escapes a string for use inside a double-quoted SPARQL literal.
std::string sparql_string_literal(std::string_view s);

}  // namespace kgqa::resolvers
