#include "kgqa/resolvers/remote.hpp"

#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::resolvers {

namespace {
std::string strip_slash(std::string s) {
    while (!s.empty() && s.back() == '/') s.pop_back();
    return s;
}

bool is_chembl_id(std::string_view id) {
    if (id.size() < 7 || id.substr(0, 6) != "CHEMBL") return false;
    for (char c : id.substr(6)) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}
}  // namespace

SmilesResolver::SmilesResolver(std::string base_url, std::shared_ptr<http::Transport> transport)
    : base_url_(strip_slash(std::move(base_url))), transport_(std::move(transport)) {}

ResolvedEntity SmilesResolver::resolve(std::string_view smiles) const {
    const std::string s = text::trim(smiles);
    if (s.empty()) throw Error(ErrorCode::InvalidInput, "empty structure: no SMILES given");
    http::Request req;
    req.url = base_url_ + "/inchikey?smiles=" + text::percent_encode(s);
    auto res = transport_->send(req);
    if (!res.ok()) {
        spdlog::warn("GNPS SMILES lookup failed for '{}': HTTP {}", s, res.status);
        throw Error(ErrorCode::Upstream,
                    "GNPS rejected SMILES '" + s + "' (HTTP " + std::to_string(res.status) + "): " + text::trim(res.body),
                    res.status >= 500);
    }
    std::string key = text::trim(res.body);
    if (!key.empty() && key.front() == '{') {
        try {
            key = nlohmann::json::parse(key).at("inchikey").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Upstream, std::string("GNPS returned malformed JSON: ") + e.what());
        }
    }
    if (!is_valid_inchikey(key)) {
        spdlog::warn("GNPS returned no valid InChIKey for '{}'", s);
        throw Error(ErrorCode::Upstream, "GNPS returned no valid InChIKey for '" + s + "': " + key.substr(0, 120));
    }
    spdlog::info("GNPS resolved '{}' to {}", s, key);
    return {s, EntityKind::Structure, key, Source::GnpsApi, std::nullopt};
}

TargetResolver::TargetResolver(std::string base_url, std::shared_ptr<http::Transport> transport)
    : base_url_(strip_slash(std::move(base_url))), transport_(std::move(transport)) {}

Resolution TargetResolver::resolve(std::string_view name) const {
    const std::string n = text::trim(name);
    if (n.empty()) throw Error(ErrorCode::InvalidInput, "empty target name");
    http::Request req;
    req.url = base_url_ + "/target/search?q=" + text::percent_encode(n);
    req.headers = {{"Accept", "application/xml"}};
    auto res = transport_->send(req);
    if (!res.ok()) {
        spdlog::warn("ChEMBL target search for '{}' failed: HTTP {}", n, res.status);
        throw Error(ErrorCode::Upstream, "ChEMBL target search failed (HTTP " + std::to_string(res.status) + ")",
                    res.status >= 500 || res.status == 429);
    }
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(res.body);
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw Error(ErrorCode::Upstream, std::string("ChEMBL returned malformed XML: ") + e.what());
    }
    struct Hit {
        std::string id, pref_name;
    };
    std::vector<Hit> hits;
    if (auto targets = tree.get_child_optional("response.targets")) {
        for (const auto& [tag, node] : *targets) {
            if (tag != "target") continue;
            auto id = text::trim(node.get<std::string>("target_chembl_id", ""));
            if (!is_chembl_id(id)) continue;
            hits.push_back({id, node.get<std::string>("pref_name", "")});
        }
    }
    if (hits.empty()) {
        spdlog::info("ChEMBL target search for '{}' returned no hits", n);
        return {std::nullopt, "no ChEMBL target matches '" + n +
                                  "'; try the full protein or organism name, a gene symbol, or drop qualifiers "
                                  "such as 'human' or 'inhibitor'"};
    }
    const Hit* chosen = &hits.front();
    for (const auto& h : hits) {
        if (text::lower(text::trim(h.pref_name)) == text::lower(n)) {
            chosen = &h;
            break;
        }
    }
    spdlog::info("ChEMBL resolved '{}' to {}", n, chosen->id);
    ResolvedEntity e{n, EntityKind::Target, std::string(kChemblTargetIriPrefix) + chosen->id, Source::ChemblApi,
                     std::nullopt};
    return {e, chosen->pref_name};
}

std::string sparql_string_literal(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

TaxonResolver::TaxonResolver(std::shared_ptr<sparql::Endpoint> wikidata, std::string taxon_name_property)
    : endpoint_(std::move(wikidata)), name_property_(std::move(taxon_name_property)) {}

std::string TaxonResolver::build_query(std::string_view name) const {
    const auto lit = sparql_string_literal(name);
    return "PREFIX wdt: <http://www.wikidata.org/prop/direct/>\n"
           "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n"
           "SELECT DISTINCT ?item ?name WHERE {\n"
           "  { ?item wdt:" + name_property_ + " " + lit + " . }\n"
           "  UNION\n"
           "  { ?item rdfs:label " + lit + "@en . }\n"
           "  OPTIONAL { ?item wdt:" + name_property_ + " ?name . }\n"
           "}\nLIMIT 50";
}

Resolution TaxonResolver::resolve(std::string_view name) const {
    const std::string n = text::trim(name);
    if (n.empty()) throw Error(ErrorCode::InvalidInput, "empty taxon name");
    auto rs = endpoint_->select(build_query(n));
    std::vector<std::string> items;
    std::set<std::string> exact;
    std::size_t item_col = 0, name_col = 1;
    for (std::size_t i = 0; i < rs.variables.size(); ++i) {
        if (rs.variables[i] == "item") item_col = i;
        if (rs.variables[i] == "name") name_col = i;
    }
    for (const auto& row : rs.rows) {
        if (item_col >= row.size() || !row[item_col] || !row[item_col]->is_iri()) continue;
        const auto& iri = row[item_col]->value;
        if (std::find(items.begin(), items.end(), iri) == items.end()) items.push_back(iri);
        if (name_col < row.size() && row[name_col] && row[name_col]->value == n) exact.insert(iri);
    }
    if (items.empty()) return {std::nullopt, "no Wikidata taxon named '" + n + "'"};
    std::string chosen;
    if (items.size() == 1) chosen = items.front();
    else if (exact.size() == 1) chosen = *exact.begin();
    else {
        std::string list;
        for (const auto& i : items) list += (list.empty() ? "" : ", ") + i;
        throw Error(ErrorCode::InvalidInput, "taxon name '" + n + "' is ambiguous; candidates: " + list);
    }
    spdlog::info("Wikidata resolved taxon '{}' to {}", n, chosen);
    return {ResolvedEntity{n, EntityKind::Taxon, chosen, Source::WikidataEndpoint, std::nullopt}, ""};
}

}  // namespace kgqa::resolvers
