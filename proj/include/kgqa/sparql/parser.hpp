#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kgqa/sparql/ast.hpp"

namespace kgqa::sparql {

/// Parses a SPARQL 1.1 SELECT query (prologue, SELECT, WHERE with the
/// common graph-pattern forms and property paths, solution modifiers).
/// Throws Error(Parse) naming the line and offending token. Any other query
/// form (ASK, CONSTRUCT, DESCRIBE, updates) is rejected.
Query parse_query(std::string_view text);

/// Prefix labels declared in the prologue and those referenced through
/// prefixed names anywhere in the text, without resolving them.
struct PrefixScan {
    std::map<std::string, std::string> declared;
    std::vector<std::string> used;  // unique, first-use order
};

PrefixScan scan_prefixes(std::string_view text);

}  // namespace kgqa::sparql
