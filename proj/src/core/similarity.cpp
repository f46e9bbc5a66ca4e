#include "kgqa/core/similarity.hpp"

#include <cmath>

#include "kgqa/core/text.hpp"

namespace kgqa {

std::vector<std::string> TrigramIndex::trigrams(std::string_view text) {
    const std::string core = text::lower(text::collapse_whitespace(text::trim(text)));
    std::vector<std::string> out;
    if (core.empty()) return out;
    const std::string padded = " " + core + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
    return out;
}

TrigramIndex::TrigramIndex(const std::vector<std::string>& docs) {
    std::unordered_map<std::string, int> df;
    std::vector<std::unordered_map<std::string, int>> counts;
    for (const auto& d : docs) {
        std::unordered_map<std::string, int> tf;
        for (auto& t : trigrams(d)) ++tf[t];
        for (const auto& [t, c] : tf) ++df[t];
        counts.push_back(std::move(tf));
    }
    const double n = static_cast<double>(docs.size());
    for (const auto& [t, d] : df) idf_[t] = std::log((1.0 + n) / (1.0 + d)) + 1.0;
    for (const auto& tf : counts) {
        Vector v;
        double norm = 0;
        for (const auto& [t, c] : tf) {
            double w = c * idf_[t];
            v[t] = w;
            norm += w * w;
        }
        vectors_.push_back(std::move(v));
        norms_.push_back(std::sqrt(norm));
    }
}

TrigramIndex::Vector TrigramIndex::vectorize(std::string_view text) const {
    const double unseen = std::log(1.0 + static_cast<double>(vectors_.size())) + 1.0;
    std::unordered_map<std::string, int> tf;
    for (auto& t : trigrams(text)) ++tf[t];
    Vector v;
    for (const auto& [t, c] : tf) {
        auto it = idf_.find(t);
        v[t] = c * (it == idf_.end() ? unseen : it->second);
    }
    return v;
}

double TrigramIndex::score(std::string_view query, std::size_t doc) const {
    auto q = vectorize(query);
    double qn = 0;
    for (const auto& [t, w] : q) qn += w * w;
    qn = std::sqrt(qn);
    if (qn == 0 || norms_[doc] == 0) return 0.0;
    double dot = 0;
    for (const auto& [t, w] : q) {
        auto it = vectors_[doc].find(t);
        if (it != vectors_[doc].end()) dot += w * it->second;
    }
    return dot / (qn * norms_[doc]);
}

std::optional<TrigramIndex::Hit> TrigramIndex::best(std::string_view query) const {
    std::optional<Hit> best;
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        double s = score(query, i);
        if (!best || s > best->score) best = Hit{i, s};
    }
    return best;
}

}  // namespace kgqa
