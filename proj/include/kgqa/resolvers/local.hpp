#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgqa/core/similarity.hpp"
#include "kgqa/resolvers/entity.hpp"

namespace kgqa::resolvers {

/// Trim, ASCII case-fold, collapse internal whitespace runs to one space.
std::string normalize_plant_name(std::string_view name);

enum class PlantPresence { Present, Absent };

class PlantDb {
public:
    /// Throws Error(Io) naming the path when unreadable, Error(Config) when
    /// the column is missing.
    static PlantDb load(const std::filesystem::path& csv_path, const std::string& column);
    static PlantDb from_names(const std::vector<std::string>& names);

    bool contains(std::string_view name) const;
    /// The stored (trimmed) spelling for a normalized match.
    std::string canonical(std::string_view name) const;
    std::size_t size() const { return names_.size(); }

private:
    std::unordered_map<std::string, std::string> names_;  // normalized -> trimmed original
};

PlantPresence check_plant(std::string_view name, const PlantDb& db);

/// Chemical-class labels with a trigram similarity index over them.
class ChemicalIndex {
public:
    struct Entry {
        std::string label;
        std::string iri;
    };

    static ChemicalIndex load(const std::filesystem::path& csv_path);
    explicit ChemicalIndex(std::vector<Entry> entries);

    const std::vector<Entry>& entries() const { return entries_; }
    const TrigramIndex& similarity() const { return index_; }

private:
    std::vector<Entry> entries_;
    TrigramIndex index_;
};

inline constexpr double kChemicalMatchThreshold = 0.25;

Resolution resolve_chemical_class(std::string_view name, const ChemicalIndex& index,
                                  double threshold = kChemicalMatchThreshold);

}  // namespace kgqa::resolvers
