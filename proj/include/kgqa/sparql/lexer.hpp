#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kgqa::sparql {

enum class Tok {
    Iri,        // <...>, text = IRI without brackets
    PName,      // prefix:local, text = full "prefix:local"
    Var,        // ?x / $x, text = name
    String,     // text = unescaped value
    Integer,
    Decimal,
    Double,
    Word,       // bare keyword / function name / 'a'
    Blank,      // _:label
    LangTag,    // @en, text = tag
    Punct,      // text = the operator / punctuation
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line = 1;
    std::size_t offset = 0;  // byte offset in the source
    std::size_t length = 0;
};

/// Tokenizes SPARQL text. Throws Error(Parse) on malformed input.
std::vector<Token> tokenize(std::string_view text);

}  // namespace kgqa::sparql
