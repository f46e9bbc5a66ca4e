#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace kgqa::resolvers {

enum class EntityKind { Taxon, ChemicalClass, Target, Structure };
enum class Source { PlantDb, ChemicalIndex, GnpsApi, ChemblApi, WikidataEndpoint };

std::string to_string(EntityKind k);
std::string to_string(Source s);
EntityKind parse_entity_kind(std::string_view s);
Source parse_source(std::string_view s);

struct ResolvedEntity {
    std::string surface;
    EntityKind kind = EntityKind::Taxon;
    std::string identifier;  // IRI, or InChIKey for structures
    Source source = Source::PlantDb;
    std::optional<double> score;  // chemical classes only

    bool operator==(const ResolvedEntity&) const = default;
};

nlohmann::json to_json(const ResolvedEntity& e);
ResolvedEntity entity_from_json(const nlohmann::json& j);

/// Outcome of a lookup that can legitimately find nothing. Hard failures
/// (empty input, transport errors) are thrown instead.
struct Resolution {
    std::optional<ResolvedEntity> entity;
    std::string detail;  // NoMatch explanation or refinement hint

    bool matched() const { return entity.has_value(); }
};

/// 14-10-1 upper-case letters joined by hyphens.
bool is_valid_inchikey(std::string_view key);
/// Absolute IRI with a scheme and no whitespace or angle brackets.
bool is_valid_iri(std::string_view iri);

}  // namespace kgqa::resolvers
