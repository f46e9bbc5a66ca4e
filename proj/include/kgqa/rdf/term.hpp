#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kgqa::rdf {

namespace vocab {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view rdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view owl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view xsd_string = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr std::string_view xsd_double = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr std::string_view xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";
inline constexpr std::string_view rdf_lang_string = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}  // namespace vocab

enum class TermKind : std::uint8_t { Iri, Blank, Literal };

/// An RDF term. Literals without an explicit datatype carry xsd:string (or
/// rdf:langString when tagged), following RDF 1.1.
struct Term {
    TermKind kind = TermKind::Iri;
    std::string value;
    std::string datatype;
    std::string lang;

    static Term iri(std::string v) { return {TermKind::Iri, std::move(v), {}, {}}; }
    static Term blank(std::string label) { return {TermKind::Blank, std::move(label), {}, {}}; }
    static Term literal(std::string lexical, std::string datatype = std::string(vocab::xsd_string),
                        std::string lang = {});
    static Term integer(long long v);
    static Term decimal(double v);

    bool is_iri() const { return kind == TermKind::Iri; }
    bool is_blank() const { return kind == TermKind::Blank; }
    bool is_literal() const { return kind == TermKind::Literal; }
    bool is_numeric() const;
    std::optional<double> as_number() const;

    /// N-Triples style rendering, used for hashing and debugging.
    std::string to_ntriples() const;

    auto operator<=>(const Term&) const = default;
};

struct TermHash {
    std::size_t operator()(const Term& t) const noexcept;
};

bool is_numeric_datatype(std::string_view datatype);

}  // namespace kgqa::rdf
