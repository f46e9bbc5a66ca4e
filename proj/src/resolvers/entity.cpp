#include "kgqa/resolvers/entity.hpp"

#include <cctype>

#include "kgqa/core/error.hpp"

namespace kgqa::resolvers {

std::string to_string(EntityKind k) {
    switch (k) {
        case EntityKind::Taxon: return "taxon";
        case EntityKind::ChemicalClass: return "chemical_class";
        case EntityKind::Target: return "target";
        case EntityKind::Structure: return "structure";
    }
    return "?";
}

std::string to_string(Source s) {
    switch (s) {
        case Source::PlantDb: return "plant_db";
        case Source::ChemicalIndex: return "chemical_index";
        case Source::GnpsApi: return "gnps_api";
        case Source::ChemblApi: return "chembl_api";
        case Source::WikidataEndpoint: return "wikidata_endpoint";
    }
    return "?";
}

EntityKind parse_entity_kind(std::string_view s) {
    if (s == "taxon") return EntityKind::Taxon;
    if (s == "chemical_class") return EntityKind::ChemicalClass;
    if (s == "target") return EntityKind::Target;
    if (s == "structure") return EntityKind::Structure;
    throw Error(ErrorCode::InvalidInput, "unknown entity kind '" + std::string(s) + "'");
}

Source parse_source(std::string_view s) {
    if (s == "plant_db") return Source::PlantDb;
    if (s == "chemical_index") return Source::ChemicalIndex;
    if (s == "gnps_api") return Source::GnpsApi;
    if (s == "chembl_api") return Source::ChemblApi;
    if (s == "wikidata_endpoint") return Source::WikidataEndpoint;
    throw Error(ErrorCode::InvalidInput, "unknown entity source '" + std::string(s) + "'");
}

nlohmann::json to_json(const ResolvedEntity& e) {
    nlohmann::json j{{"surface", e.surface},
                     {"kind", to_string(e.kind)},
                     {"identifier", e.identifier},
                     {"source", to_string(e.source)}};
    if (e.score) j["score"] = *e.score;
    return j;
}

ResolvedEntity entity_from_json(const nlohmann::json& j) {
    ResolvedEntity e;
    e.surface = j.at("surface").get<std::string>();
    e.kind = parse_entity_kind(j.at("kind").get<std::string>());
    e.identifier = j.at("identifier").get<std::string>();
    e.source = parse_source(j.at("source").get<std::string>());
    if (j.contains("score")) e.score = j["score"].get<double>();
    return e;
}

bool is_valid_inchikey(std::string_view key) {
    if (key.size() != 27 || key[14] != '-' || key[25] != '-') return false;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (i == 14 || i == 25) continue;
        if (key[i] < 'A' || key[i] > 'Z') return false;
    }
    return true;
}

bool is_valid_iri(std::string_view iri) {
    auto colon = iri.find(':');
    if (colon == std::string_view::npos || colon == 0) return false;
    if (!std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
    for (std::size_t i = 0; i < colon; ++i) {
        char c = iri[i];
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return false;
    }
    if (colon + 1 >= iri.size()) return false;
    for (char c : iri) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>' || c == '"') return false;
    }
    return true;
}

}  // namespace kgqa::resolvers
