#include "kgqa/chain/store.hpp"

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::chain {

namespace {
std::vector<std::string> questions_of(const std::vector<Exemplar>& ex) {
    std::vector<std::string> out;
    for (const auto& e : ex) out.push_back(e.question);
    return out;
}
}  // namespace

RefinementStore::RefinementStore(std::vector<Exemplar> exemplars)
    : exemplars_(std::move(exemplars)), index_(questions_of(exemplars_)) {}

RefinementStore RefinementStore::load_csv(const std::filesystem::path& path) {
    auto table = csv::read_file(path);
    auto q = table.column_index("question");
    auto r = table.column_index("reference_query");
    if (!q || !r) throw Error(ErrorCode::Config, path.string() + ": refinement store needs question,reference_query");
    std::vector<Exemplar> ex;
    for (const auto& row : table.rows) {
        if (std::max(*q, *r) < row.size()) ex.push_back({row[*q], row[*r]});
    }
    return RefinementStore(std::move(ex));
}

RefinementStore RefinementStore::without(std::string_view question) const {
    const auto key = text::lower(text::trim(question));
    std::vector<Exemplar> kept;
    for (const auto& e : exemplars_) {
        if (text::lower(text::trim(e.question)) != key) kept.push_back(e);
    }
    return RefinementStore(std::move(kept));
}

std::optional<Exemplar> RefinementStore::retrieve(std::string_view question) const {
    auto hit = index_.best(question);
    if (!hit) return std::nullopt;
    return exemplars_[hit->doc];
}

}  // namespace kgqa::chain
