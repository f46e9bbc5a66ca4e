#include "kgqa/chain/schema.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"
#include "kgqa/rdf/turtle.hpp"

namespace kgqa::chain {

namespace vocab = rdf::vocab;

namespace {
const std::string kOwl = std::string(vocab::owl);
const std::string kRdfs = std::string(vocab::rdfs);
const std::string kRdf = std::string(vocab::rdf);

bool is_class_type(const std::string& t) { return t == kOwl + "Class" || t == kRdfs + "Class"; }

bool is_property_type(const std::string& t) {
    return t == kRdf + "Property" || t == kOwl + "ObjectProperty" || t == kOwl + "DatatypeProperty" ||
           t == kOwl + "AnnotationProperty" || t == kOwl + "FunctionalProperty";
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}
}  // namespace

bool SchemaDocument::has_class(std::string_view iri) const {
    return std::find(classes.begin(), classes.end(), iri) != classes.end();
}

bool SchemaDocument::has_property(std::string_view iri) const {
    return std::any_of(properties.begin(), properties.end(), [&](const auto& p) { return p.iri == iri; });
}

std::optional<std::string> SchemaDocument::namespace_for(std::string_view label) const {
    for (const auto& [l, ns] : prefixes) {
        if (l == label) return ns;
    }
    return std::nullopt;
}

std::string SchemaDocument::compact_iri(std::string_view iri) const {
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& p : prefixes) {
        if (iri.substr(0, p.second.size()) == p.second && (!best || p.second.size() > best->second.size())) best = &p;
    }
    if (best) return best->first + ":" + std::string(iri.substr(best->second.size()));
    return "<" + std::string(iri) + ">";
}

std::string SchemaDocument::compact_inventory() const {
    std::string out = "Classes:\n";
    for (const auto& c : classes) out += "- " + compact_iri(c) + "\n";
    out += "Properties:\n";
    for (const auto& p : properties) {
        out += "- " + compact_iri(p.iri);
        if (!p.domain.empty() || !p.range.empty()) {
            auto join = [&](const std::vector<std::string>& v) {
                std::string s;
                for (const auto& x : v) s += (s.empty() ? "" : "|") + compact_iri(x);
                return s.empty() ? std::string("?") : s;
            };
            out += " (" + join(p.domain) + " -> " + join(p.range) + ")";
        }
        out += "\n";
    }
    return out;
}

SchemaDocument load_schema(std::string_view turtle_text) {
    SchemaDocument doc;
    doc.turtle_text = std::string(turtle_text);
    rdf::TurtleDocument parsed;
    try {
        parsed = rdf::parse_turtle(turtle_text);
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, std::string("schema: ") + e.what());
    }
    doc.prefixes = parsed.prefixes;
    std::map<std::string, PropertyInfo> props;
    std::vector<std::string> prop_order;
    auto prop = [&](const std::string& iri) -> PropertyInfo& {
        auto [it, inserted] = props.emplace(iri, PropertyInfo{iri, {}, {}});
        if (inserted) prop_order.push_back(iri);
        return it->second;
    };
    for (const auto& t : parsed.triples) {
        if (!t.subject.is_iri()) continue;
        const auto& p = t.predicate.value;
        if (p == vocab::rdf_type && t.object.is_iri()) {
            if (is_class_type(t.object.value)) add_unique(doc.classes, t.subject.value);
            else if (is_property_type(t.object.value)) prop(t.subject.value);
        } else if (p == kRdfs + "domain" && t.object.is_iri()) {
            add_unique(prop(t.subject.value).domain, t.object.value);
        } else if (p == kRdfs + "range" && t.object.is_iri()) {
            add_unique(prop(t.subject.value).range, t.object.value);
        }
    }
    for (const auto& iri : prop_order) doc.properties.push_back(props[iri]);
    if (doc.empty()) spdlog::warn("schema has no classes or properties");
    return doc;
}

const std::map<std::string, std::string>& standard_prefixes() {
    static const std::map<std::string, std::string> m{
        {"rdf", std::string(vocab::rdf)},
        {"rdfs", std::string(vocab::rdfs)},
        {"owl", std::string(vocab::owl)},
        {"xsd", std::string(vocab::xsd)},
        {"wd", "http://www.wikidata.org/entity/"},
        {"wdt", "http://www.wikidata.org/prop/direct/"},
    };
    return m;
}

bool is_standard_vocabulary(std::string_view iri) {
    for (auto ns : {vocab::rdf, vocab::rdfs, vocab::owl, vocab::xsd}) {
        if (iri.substr(0, ns.size()) == ns) return true;
    }
    return false;
}

std::string local_name(std::string_view iri) {
    auto pos = iri.find_last_of("#/:");
    return std::string(pos == std::string_view::npos ? iri : iri.substr(pos + 1));
}

}  // namespace kgqa::chain
