#include "kgqa/resolvers/local.hpp"

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::resolvers {

std::string normalize_plant_name(std::string_view name) {
    return text::lower(text::collapse_whitespace(text::trim(name)));
}

PlantDb PlantDb::load(const std::filesystem::path& csv_path, const std::string& column) {
    csv::Table table;
    try {
        table = csv::read_file(csv_path);
    } catch (const Error& e) {
        throw Error(ErrorCode::Io, "cannot read plant database " + csv_path.string() + ": " + e.what());
    }
    auto col = table.column_index(column);
    if (!col) throw Error(ErrorCode::Config, "plant database " + csv_path.string() + " has no column '" + column + "'");
    std::vector<std::string> names;
    for (const auto& row : table.rows) {
        if (*col < row.size()) names.push_back(row[*col]);
    }
    return from_names(names);
}

PlantDb PlantDb::from_names(const std::vector<std::string>& names) {
    PlantDb db;
    for (const auto& n : names) {
        auto key = normalize_plant_name(n);
        if (!key.empty()) db.names_.emplace(key, text::trim(n));
    }
    return db;
}

bool PlantDb::contains(std::string_view name) const {
    auto key = normalize_plant_name(name);
    return !key.empty() && names_.count(key) > 0;
}

std::string PlantDb::canonical(std::string_view name) const {
    auto it = names_.find(normalize_plant_name(name));
    return it == names_.end() ? std::string() : it->second;
}

PlantPresence check_plant(std::string_view name, const PlantDb& db) {
    return db.contains(name) ? PlantPresence::Present : PlantPresence::Absent;
}

ChemicalIndex ChemicalIndex::load(const std::filesystem::path& csv_path) {
    csv::Table table;
    try {
        table = csv::read_file(csv_path);
    } catch (const Error& e) {
        throw Error(ErrorCode::Io, "cannot read chemical index " + csv_path.string() + ": " + e.what());
    }
    auto label = table.column_index("label");
    auto iri = table.column_index("iri");
    if (!label || !iri) {
        throw Error(ErrorCode::Config, "chemical index " + csv_path.string() + " needs columns label,iri");
    }
    std::vector<Entry> entries;
    for (const auto& row : table.rows) {
        if (std::max(*label, *iri) >= row.size()) continue;
        entries.push_back({row[*label], row[*iri]});
    }
    return ChemicalIndex(std::move(entries));
}

namespace {
std::vector<std::string> labels_of(const std::vector<ChemicalIndex::Entry>& entries) {
    std::vector<std::string> out;
    for (const auto& e : entries) out.push_back(e.label);
    return out;
}
}  // namespace

ChemicalIndex::ChemicalIndex(std::vector<Entry> entries)
    : entries_(std::move(entries)), index_(labels_of(entries_)) {}

Resolution resolve_chemical_class(std::string_view name, const ChemicalIndex& index, double threshold) {
    if (text::trim(name).empty()) return {std::nullopt, "empty chemical name"};
    auto hit = index.similarity().best(name);
    if (!hit || hit->score < threshold) {
        std::string detail = "no chemical class similar to '" + std::string(name) + "'";
        if (hit) detail += " (best '" + index.entries()[hit->doc].label + "' scored " + std::to_string(hit->score) + ")";
        return {std::nullopt, detail};
    }
    const auto& e = index.entries()[hit->doc];
    ResolvedEntity ent{std::string(name), EntityKind::ChemicalClass, e.iri, Source::ChemicalIndex, hit->score};
    return {ent, "matched label '" + e.label + "'"};
}

}  // namespace kgqa::resolvers
