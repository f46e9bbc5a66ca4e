#include "kgqa/wikidata/bridge.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <spdlog/spdlog.h>

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::wikidata {

namespace {
bool is_qid(std::string_view s) {
    if (s.size() < 2 || s.size() > 19 || s[0] != 'Q' || s[1] == '0') return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

void sort_ids(std::vector<std::string>& ids) {
    std::sort(ids.begin(), ids.end(), [](const auto& a, const auto& b) { return numeric_id(a) < numeric_id(b); });
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}
}  // namespace

std::optional<std::string> canonicalize_id(std::string_view value) {
    std::string v = text::trim(value);
    if (v.size() >= 2 && v.front() == '<' && v.back() == '>') v = v.substr(1, v.size() - 2);
    static const std::vector<std::string> prefixes{
        "http://www.wikidata.org/entity/", "https://www.wikidata.org/entity/", "http://www.wikidata.org/wiki/",
        "https://www.wikidata.org/wiki/",  "wd:"};
    for (const auto& p : prefixes) {
        if (v.rfind(p, 0) == 0) {
            v = v.substr(p.size());
            break;
        }
    }
    if (!is_qid(v)) return std::nullopt;
    return std::string(kEntityPrefix) + v;
}

unsigned long long numeric_id(std::string_view canonical) {
    auto q = canonical.rfind('Q');
    if (q == std::string_view::npos) return 0;
    return std::stoull(std::string(canonical.substr(q + 1)));
}

std::string build_genus_query(const std::string& canonical_taxon, const GenusQueryOptions& o) {
    return "PREFIX wd: <http://www.wikidata.org/entity/>\n"
           "PREFIX wdt: <http://www.wikidata.org/prop/direct/>\n"
           "SELECT DISTINCT ?compound WHERE {\n"
           "  <" + canonical_taxon + "> wdt:" + o.parent_taxon + "* ?genus .\n"
           "  ?genus wdt:" + o.taxon_rank + " wd:" + o.genus_rank + " .\n"
           "  ?species wdt:" + o.parent_taxon + "* ?genus .\n"
           "  ?compound wdt:" + o.found_in_taxon + " ?species .\n"
           "}\nLIMIT " + std::to_string(o.row_cap);
}

std::optional<CompoundIdList> genus_compounds(std::string_view taxon_id, sparql::Endpoint& endpoint,
                                              const std::filesystem::path& spill_path,
                                              const GenusQueryOptions& options) {
    auto canonical = canonicalize_id(taxon_id);
    if (!canonical) throw Error(ErrorCode::InvalidInput, "not a Wikidata item id: '" + std::string(taxon_id) + "'");
    auto rs = endpoint.select(build_genus_query(*canonical, options));
    CompoundIdList out;
    for (const auto& row : rs.rows) {
        if (row.empty() || !row[0]) continue;
        if (auto id = canonicalize_id(row[0]->value)) out.ids.push_back(*id);
    }
    sort_ids(out.ids);
    if (out.ids.empty()) {
        spdlog::info("no compounds found for the genus of {}", *canonical);
        return std::nullopt;
    }
    csv::Table t{{"compound"}, {}};
    for (const auto& id : out.ids) t.rows.push_back({id});
    csv::write_file(spill_path, t);
    out.spill_path = spill_path;
    return out;
}

std::vector<std::string> read_ids(const std::filesystem::path& csv_path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(csv_path, ec)) {
        throw Error(ErrorCode::Io, "cannot read id file " + csv_path.string());
    }
    auto table = csv::read_file(csv_path);
    if (table.header.empty()) throw Error(ErrorCode::InvalidInput, csv_path.string() + " has no columns");
    std::size_t col = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        bool looks = std::any_of(table.rows.begin(), table.rows.end(),
                                 [&](const auto& r) { return c < r.size() && canonicalize_id(r[c]); });
        if (looks) {
            col = c;
            break;
        }
    }
    std::vector<std::string> ids;
    for (const auto& r : table.rows) {
        if (col >= r.size()) continue;
        if (auto id = canonicalize_id(r[col])) ids.push_back(*id);
    }
    sort_ids(ids);
    return ids;
}

std::filesystem::path merge_outputs(const std::filesystem::path& enpkg_csv, const std::filesystem::path& wikidata_csv,
                                    const std::filesystem::path& out_path) {
    auto a = read_ids(enpkg_csv);
    auto b = read_ids(wikidata_csv);
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common),
                          [](const auto& x, const auto& y) { return numeric_id(x) < numeric_id(y); });
    csv::Table t{{"wikidata_id"}, {}};
    for (const auto& id : common) t.rows.push_back({id});
    csv::write_file(out_path, t);
    return out_path;
}

}  // namespace kgqa::wikidata
