#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgqa/core/similarity.hpp"

namespace kgqa::chain {

struct Exemplar {
    std::string question;
    std::string query;
};

/// Question/reference-query pairs retrieved by question similarity during
/// refinement.
class RefinementStore {
public:
    RefinementStore() = default;
    explicit RefinementStore(std::vector<Exemplar> exemplars);

    /// Reads a CSV with `question` and `reference_query` columns.
    static RefinementStore load_csv(const std::filesystem::path& path);

    /// Copy without exemplars whose question matches `question` (trimmed,
    /// case-insensitive). Used to keep the question under evaluation out.
    RefinementStore without(std::string_view question) const;

    bool empty() const { return exemplars_.empty(); }
    std::size_t size() const { return exemplars_.size(); }
    const std::vector<Exemplar>& exemplars() const { return exemplars_; }

    /// The single most similar exemplar; none only when the store is empty.
    std::optional<Exemplar> retrieve(std::string_view question) const;

private:
    std::vector<Exemplar> exemplars_;
    TrigramIndex index_;
};

}  // namespace kgqa::chain
