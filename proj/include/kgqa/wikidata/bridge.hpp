#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgqa/sparql/endpoint.hpp"

namespace kgqa::wikidata {

inline constexpr std::string_view kEntityPrefix = "http://www.wikidata.org/entity/";

/// Canonical entity IRI for a bare Q-id, a wd: name or an entity/wiki URL
/// (surrounding whitespace and angle brackets ignored). None if the value is
/// not a Wikidata item identifier.
std::optional<std::string> canonicalize_id(std::string_view value);

/// Numeric part of a canonical id, for ordering.
unsigned long long numeric_id(std::string_view canonical);

struct CompoundIdList {
    std::filesystem::path spill_path;
    std::vector<std::string> ids;  // canonical, deduplicated, ascending
};

/// Property identifiers for the genus query. Defaults follow Wikidata:
/// P171 parent taxon, P105 taxon rank, Q34740 genus, P703 found in taxon.
struct GenusQueryOptions {
    std::string parent_taxon = "P171";
    std::string taxon_rank = "P105";
    std::string genus_rank = "Q34740";
    std::string found_in_taxon = "P703";
    std::size_t row_cap = 10000;
};

std::string build_genus_query(const std::string& canonical_taxon, const GenusQueryOptions& options = {});

/// Compounds annotated to any species in the genus of `taxon_id`. Throws
/// Error(InvalidInput) for a malformed id before any request is made.
/// Returns none when nothing is found; otherwise writes a one-column CSV.
std::optional<CompoundIdList> genus_compounds(std::string_view taxon_id, sparql::Endpoint& endpoint,
                                              const std::filesystem::path& spill_path,
                                              const GenusQueryOptions& options = {});

/// Canonical ids from the id column of a CSV: the first column whose values
/// look like Wikidata ids, else the first column.
std::vector<std::string> read_ids(const std::filesystem::path& csv_path);

/// Ids present in both files, deduplicated and sorted by numeric Q-id,
/// written as a `wikidata_id` CSV to `out_path`.
std::filesystem::path merge_outputs(const std::filesystem::path& enpkg_csv, const std::filesystem::path& wikidata_csv,
                                    const std::filesystem::path& out_path);

}  // namespace kgqa::wikidata
