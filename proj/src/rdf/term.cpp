#include "kgqa/rdf/term.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

namespace kgqa::rdf {

Term Term::literal(std::string lexical, std::string datatype, std::string lang) {
    Term t{TermKind::Literal, std::move(lexical), std::move(datatype), std::move(lang)};
    if (!t.lang.empty()) t.datatype = std::string(vocab::rdf_lang_string);
    if (t.datatype.empty()) t.datatype = std::string(vocab::xsd_string);
    return t;
}

Term Term::integer(long long v) {
    return literal(std::to_string(v), std::string(vocab::xsd_integer));
}

Term Term::decimal(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.1f", v);
        return literal(buf, std::string(vocab::xsd_decimal));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return literal(buf, std::string(vocab::xsd_decimal));
}

bool is_numeric_datatype(std::string_view dt) {
    if (dt.substr(0, vocab::xsd.size()) != vocab::xsd) return false;
    auto local = dt.substr(vocab::xsd.size());
    static constexpr std::string_view numeric[] = {
        "integer", "decimal", "double", "float", "int", "long", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "negativeInteger", "nonPositiveInteger",
        "unsignedInt", "unsignedLong", "unsignedShort", "unsignedByte"};
    for (auto n : numeric) {
        if (local == n) return true;
    }
    return false;
}

bool Term::is_numeric() const {
    return kind == TermKind::Literal && is_numeric_datatype(datatype) && as_number().has_value();
}

std::optional<double> Term::as_number() const {
    if (kind != TermKind::Literal) return std::nullopt;
    const char* begin = value.data();
    const char* end = value.data() + value.size();
    if (begin != end && *begin == '+') ++begin;
    double out = 0;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return out;
}

std::string Term::to_ntriples() const {
    switch (kind) {
        case TermKind::Iri: return "<" + value + ">";
        case TermKind::Blank: return "_:" + value;
        case TermKind::Literal: {
            std::string out = "\"";
            for (char c : value) {
                switch (c) {
                    case '"': out += "\\\""; break;
                    case '\\': out += "\\\\"; break;
                    case '\n': out += "\\n"; break;
                    case '\r': out += "\\r"; break;
                    default: out += c;
                }
            }
            out += '"';
            if (!lang.empty()) {
                out += "@" + lang;
            } else if (datatype != vocab::xsd_string) {
                out += "^^<" + datatype + ">";
            }
            return out;
        }
    }
    return {};
}

std::size_t TermHash::operator()(const Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.value);
    h ^= std::hash<std::string>{}(t.datatype) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::string>{}(t.lang) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(t.kind) * 31;
    return h;
}

}  // namespace kgqa::rdf
