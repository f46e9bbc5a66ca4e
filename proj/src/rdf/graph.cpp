#include "kgqa/rdf/graph.hpp"

namespace kgqa::rdf {

namespace {

std::uint64_t triple_key(const IdTriple& t) {
    // 21 bits per position is ample for fixture-scale graphs; collisions on
    // larger graphs are resolved by the explicit comparison in add().
    return (static_cast<std::uint64_t>(t.s) << 42) ^ (static_cast<std::uint64_t>(t.p) << 21) ^ t.o;
}

}  // namespace

TermId Graph::intern(const Term& term) {
    if (auto it = ids_.find(term); it != ids_.end()) return it->second;
    auto id = static_cast<TermId>(terms_.size());
    terms_.push_back(term);
    ids_.emplace(term, id);
    return id;
}

std::optional<TermId> Graph::find(const Term& term) const {
    if (auto it = ids_.find(term); it != ids_.end()) return it->second;
    return std::nullopt;
}

void Graph::add(const Term& s, const Term& p, const Term& o) {
    IdTriple t{intern(s), intern(p), intern(o)};
    auto key = triple_key(t);
    if (seen_.count(key)) {
        for (auto idx : by_s_[t.s]) {
            if (triples_[idx] == t) return;
        }
    }
    seen_[key] = true;
    auto idx = static_cast<std::uint32_t>(triples_.size());
    triples_.push_back(t);
    by_s_[t.s].push_back(idx);
    by_p_[t.p].push_back(idx);
    by_o_[t.o].push_back(idx);
}

void Graph::match(std::optional<TermId> s, std::optional<TermId> p, std::optional<TermId> o,
                  const std::function<void(const IdTriple&)>& fn) const {
    const std::vector<std::uint32_t>* candidates = nullptr;
    auto pick = [&](const std::optional<TermId>& id,
                    const std::unordered_map<TermId, std::vector<std::uint32_t>>& index) -> bool {
        if (!id) return true;
        auto it = index.find(*id);
        if (it == index.end()) return false;
        if (!candidates || it->second.size() < candidates->size()) candidates = &it->second;
        return true;
    };
    if (!pick(s, by_s_) || !pick(p, by_p_) || !pick(o, by_o_)) return;

    auto check = [&](const IdTriple& t) {
        if (s && t.s != *s) return;
        if (p && t.p != *p) return;
        if (o && t.o != *o) return;
        fn(t);
    };
    if (candidates) {
        for (auto idx : *candidates) check(triples_[idx]);
    } else {
        for (const auto& t : triples_) check(t);
    }
}

}  // namespace kgqa::rdf
