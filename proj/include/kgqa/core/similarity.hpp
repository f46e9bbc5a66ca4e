#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgqa {

/// Character-trigram TF-IDF cosine similarity over a fixed corpus.
///
/// Trigrams come from the trimmed, whitespace-collapsed, lower-cased text
/// padded with one space on each side. idf(t) = ln((1 + N) / (1 + df(t))) + 1.
/// Query trigrams unseen in the corpus get the maximal idf and still count
/// towards the query norm.
class TrigramIndex {
public:
    struct Hit {
        std::size_t doc = 0;
        double score = 0.0;
    };

    TrigramIndex() = default;
    explicit TrigramIndex(const std::vector<std::string>& docs);

    std::size_t size() const { return vectors_.size(); }
    double score(std::string_view query, std::size_t doc) const;
    /// Highest-scoring document; ties go to the earlier one. None when empty.
    std::optional<Hit> best(std::string_view query) const;

    static std::vector<std::string> trigrams(std::string_view text);

private:
    using Vector = std::unordered_map<std::string, double>;
    Vector vectorize(std::string_view text) const;

    std::unordered_map<std::string, double> idf_;
    std::vector<Vector> vectors_;
    std::vector<double> norms_;
};

}  // namespace kgqa
