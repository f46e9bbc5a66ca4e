#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgqa/rdf/graph.hpp"

namespace kgqa::rdf {

struct TurtleDocument {
    /// Prefix declarations in document order (label without ':', namespace IRI).
    std::vector<std::pair<std::string, std::string>> prefixes;
    std::vector<Triple> triples;
};

/// Parses RDF 1.1 Turtle. Throws Error(Parse) with the 1-based line number of
/// the offending token.
TurtleDocument parse_turtle(std::string_view text);

Graph load_graph(std::string_view turtle);

}  // namespace kgqa::rdf
