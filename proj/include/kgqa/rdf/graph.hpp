#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "kgqa/rdf/term.hpp"

namespace kgqa::rdf {

using TermId = std::uint32_t;

struct Triple {
    Term subject;
    Term predicate;
    Term object;
};

struct IdTriple {
    TermId s, p, o;
    bool operator==(const IdTriple&) const = default;
};

/// In-memory triple store with dictionary-encoded terms and per-position
/// indexes. Duplicate triples are ignored (set semantics).
class Graph {
public:
    void add(const Term& s, const Term& p, const Term& o);
    void add(const Triple& t) { add(t.subject, t.predicate, t.object); }

    std::size_t size() const { return triples_.size(); }
    const std::vector<IdTriple>& triples() const { return triples_; }

    std::optional<TermId> find(const Term& term) const;
    const Term& term(TermId id) const { return terms_[id]; }
    std::size_t term_count() const { return terms_.size(); }

    /// Calls `fn` for every triple matching the pattern; nullopt is a wildcard.
    void match(std::optional<TermId> s, std::optional<TermId> p, std::optional<TermId> o,
               const std::function<void(const IdTriple&)>& fn) const;

private:
    TermId intern(const Term& term);

    std::vector<Term> terms_;
    std::unordered_map<Term, TermId, TermHash> ids_;
    std::vector<IdTriple> triples_;
    std::unordered_map<std::uint64_t, bool> seen_;
    std::unordered_map<TermId, std::vector<std::uint32_t>> by_s_, by_p_, by_o_;
};

}  // namespace kgqa::rdf
