#pragma once

// Randomized properties shared by the unit tests and the acceptance binary.
// Each returns the number of violations and writes the first few to `log`.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/http.hpp"
#include "kgqa/interp/interpret.hpp"
#include "kgqa/resolvers/local.hpp"
#include "kgqa/resolvers/remote.hpp"
#include "kgqa/sparql/endpoint.hpp"
#include "kgqa/wikidata/bridge.hpp"
#include "support.hpp"

namespace kgqa::testing {

namespace detail {

inline std::string random_letters(std::mt19937_64& rng, std::size_t n, const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ") {
    const std::string a(alphabet);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(a[rng() % a.size()]);
    return s;
}

inline std::string random_inchikey(std::mt19937_64& rng) {
    return random_letters(rng, 14) + "-" + random_letters(rng, 10) + "-" + random_letters(rng, 1);
}

inline std::string random_name(std::mt19937_64& rng) {
    return random_letters(rng, 1) + random_letters(rng, 3 + rng() % 6, "abcdefghijklmnopqrstuvwxyz") + " " +
           random_letters(rng, 4 + rng() % 6, "abcdefghijklmnopqrstuvwxyz");
}

inline void note(std::ostream* log, int& shown, const std::string& msg) {
    if (log && shown++ < 5) *log << "  " << msg << "\n";
}

}  // namespace detail

/// Randomized calls across the four resolvers, each against a mock whose
/// payload is generated per call. Every identifier a resolver returns must
/// occur verbatim in the payload it was served (or in the chemical index for
/// chemical classes). Payloads include junk, empty hits and malformed values.
inline int resolver_provenance_violations(unsigned seed, int calls, std::ostream* log = nullptr) {
    using namespace resolvers;
    using namespace detail;
    std::mt19937_64 rng(seed);
    int violations = 0, shown = 0;
    std::string payload;  // what the current mock served

    auto transport = std::make_shared<http::FunctionTransport>([&](const http::Request&) {
        http::Response r;
        r.status = 200;
        r.body = payload;
        return r;
    });
    SmilesResolver smiles("https://gnps.mock", transport);
    TargetResolver targets("https://chembl.mock/api", transport);
    auto endpoint = std::make_shared<sparql::HttpEndpoint>("https://wikidata.mock/sparql", transport);
    TaxonResolver taxa(endpoint);

    for (int i = 0; i < calls; ++i) {
        const int which = static_cast<int>(rng() % 4);
        std::optional<ResolvedEntity> got;
        std::string source_text;
        try {
            if (which == 0) {
                switch (rng() % 4) {
                    case 0: payload = random_inchikey(rng); break;
                    case 1: payload = "{\"inchikey\": \"" + random_inchikey(rng) + "\"}"; break;
                    case 2: payload = random_letters(rng, 20); break;  // not a key
                    default: payload = "{\"other\": 1}"; break;
                }
                source_text = payload;
                got = smiles.resolve("C" + random_letters(rng, 1 + rng() % 8, "CNO()=1"));
            } else if (which == 1) {
                const int hits = static_cast<int>(rng() % 4);
                std::string body = "<response><targets>";
                std::string query = random_name(rng);
                for (int h = 0; h < hits; ++h) {
                    std::string id = (rng() % 5 == 0) ? "NOTCHEMBL" : "CHEMBL" + std::to_string(rng() % 100000 + 1);
                    std::string pref = (rng() % 3 == 0) ? query : random_name(rng);
                    body += "<target><target_chembl_id>" + id + "</target_chembl_id><pref_name>" + pref +
                            "</pref_name></target>";
                }
                payload = body + "</targets></response>";
                source_text = payload;
                got = targets.resolve(query).entity;
            } else if (which == 2) {
                const int rows = static_cast<int>(rng() % 3);
                nlohmann::json doc{{"head", {{"vars", {"item", "name"}}}}, {"results", {{"bindings", nlohmann::json::array()}}}};
                std::string query = random_name(rng);
                for (int r = 0; r < rows; ++r) {
                    nlohmann::json b;
                    b["item"] = {{"type", "uri"}, {"value", "http://www.wikidata.org/entity/Q" + std::to_string(rng() % 1000000 + 1)}};
                    b["name"] = {{"type", "literal"}, {"value", r == 0 ? query : random_name(rng)}};
                    doc["results"]["bindings"].push_back(b);
                }
                payload = doc.dump();
                source_text = payload;
                got = taxa.resolve(query).entity;
            } else {
                std::vector<ChemicalIndex::Entry> entries;
                const int n = 1 + static_cast<int>(rng() % 6);
                for (int k = 0; k < n; ++k) {
                    entries.push_back({random_name(rng), "https://kg.mock/npc_" + random_letters(rng, 8)});
                }
                for (const auto& e : entries) source_text += e.label + "," + e.iri + "\n";
                ChemicalIndex index(entries);
                const auto& target = entries[rng() % entries.size()].label;
                std::string q = (rng() % 2) ? target : random_name(rng);
                got = resolve_chemical_class(q, index).entity;
            }
        } catch (const Error&) {
            continue;  // refusing is always allowed
        }
        if (!got) continue;
        std::string needle = got->identifier;
        if (which == 1) needle = needle.substr(std::string(kChemblTargetIriPrefix).size());
        if (source_text.find(needle) == std::string::npos) {
            ++violations;
            detail::note(log, shown, "call " + std::to_string(i) + " returned " + got->identifier + " not in payload");
        }
    }
    return violations;
}

/// merge_outputs against normalize-then-intersect over random id sets in
/// mixed spellings (bare Q-id, wd: name, entity IRI, wiki URL, <IRI>).
inline int merger_oracle_mismatches(unsigned seed, int pairs, const std::filesystem::path& dir,
                                    std::ostream* log = nullptr) {
    std::mt19937_64 rng(seed);
    int mismatches = 0, shown = 0;
    const std::regex qid_re(R"(Q([1-9][0-9]*))");
    auto spell = [&](unsigned long long n) {
        const std::string q = "Q" + std::to_string(n);
        switch (rng() % 5) {
            case 0: return q;
            case 1: return "wd:" + q;
            case 2: return "http://www.wikidata.org/entity/" + q;
            case 3: return "https://www.wikidata.org/wiki/" + q;
            default: return "<http://www.wikidata.org/entity/" + q + ">";
        }
    };
    auto oracle_norm = [&](const std::string& cell) -> std::optional<unsigned long long> {
        std::smatch m;
        if (!std::regex_search(cell, m, qid_re)) return std::nullopt;
        return std::stoull(m[1].str());
    };
    for (int i = 0; i < pairs; ++i) {
        const unsigned long long universe = 5 + rng() % 120;  // small universe forces overlap
        csv::Table a{{"wikidata_id"}, {}}, b{{"compound"}, {}};
        for (std::size_t k = 0, n = rng() % 51; k < n; ++k) a.rows.push_back({spell(1 + rng() % universe)});
        for (std::size_t k = 0, n = rng() % 51; k < n; ++k) b.rows.push_back({spell(1 + rng() % universe)});
        csv::write_file(dir / "a.csv", a);
        csv::write_file(dir / "b.csv", b);
        wikidata::merge_outputs(dir / "a.csv", dir / "b.csv", dir / "m.csv");
        auto merged = csv::read_file(dir / "m.csv");

        std::set<unsigned long long> sa, sb;
        for (const auto& r : a.rows) sa.insert(*oracle_norm(r[0]));
        for (const auto& r : b.rows) sb.insert(*oracle_norm(r[0]));
        std::vector<std::string> expected;
        for (auto n : sa) {
            if (sb.count(n)) expected.push_back("http://www.wikidata.org/entity/Q" + std::to_string(n));
        }
        std::vector<std::string> actual;
        for (const auto& r : merged.rows) actual.push_back(r.at(0));
        if (merged.header != csv::Row{"wikidata_id"} || actual != expected) {
            ++mismatches;
            detail::note(log, shown, "pair " + std::to_string(i) + ": expected " + std::to_string(expected.size()) +
                                         " ids, got " + std::to_string(actual.size()));
        }
    }
    return mismatches;
}

/// Independent percent-encoder: RFC 3986 unreserved bytes literal, the rest
/// as %XX with upper-case hex.
inline std::string oracle_percent_encode(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

inline std::string random_usi(std::mt19937_64& rng) {
    const char* files = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-. +#&/";
    std::string usi = "mzspec:";
    usi += (rng() % 2) ? "MSV" + std::to_string(100000000 + rng() % 900000000) : "GNPS";
    usi += ":";
    if (rng() % 2) usi += "TASK-" + detail::random_letters(rng, 8, "0123456789abcdef") + "-";
    usi += detail::random_letters(rng, 4 + rng() % 12, files);
    usi += ".mzML:scan:" + std::to_string(1 + rng() % 20000);
    if (rng() % 3 == 0) usi += ":[Formula]C" + std::to_string(rng() % 40) + "H" + std::to_string(rng() % 80) + "O2";
    return usi;
}

/// spectrum_url for random USIs against template + oracle encoding, both for
/// a literal USI and for a CSV whose first row carries it.
inline int spectrum_url_mismatches(unsigned seed, int count, const std::filesystem::path& dir,
                                   std::ostream* log = nullptr) {
    std::mt19937_64 rng(seed);
    const std::string prefix = "https://metabolomics-usi.gnps2.org/dashinterface/?usi1=";
    int mismatches = 0, shown = 0;
    for (int i = 0; i < count; ++i) {
        const std::string usi = random_usi(rng);
        const std::string expected = prefix + oracle_percent_encode(usi);
        const std::string direct = interp::spectrum_url(usi);
        csv::Table t{{"feature", "usi"}, {{"f1", usi}, {"f2", "mzspec:GNPS:other:scan:1"}}};
        csv::write_file(dir / "usi.csv", t);
        const std::string via_csv = interp::spectrum_url((dir / "usi.csv").string());
        const auto query = direct.substr(std::min(direct.size(), prefix.size()));
        if (direct != expected || via_csv != expected || query.find(':') != std::string::npos) {
            ++mismatches;
            detail::note(log, shown, usi + " -> " + direct);
        }
    }
    return mismatches;
}

}  // namespace kgqa::testing
