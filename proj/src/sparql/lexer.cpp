#include "kgqa/sparql/lexer.hpp"

#include <cctype>
#include <optional>

#include "kgqa/core/error.hpp"

namespace kgqa::sparql {

namespace {

bool name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}
bool name_char(char c) {
    return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-';
}
bool var_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip();
            if (pos_ >= s_.size()) {
                out.push_back({Tok::End, "", line_, pos_, 0});
                return out;
            }
            std::size_t start = pos_;
            int line = line_;
            Token t = next();
            t.line = line;
            t.offset = start;
            t.length = pos_ - start;
            out.push_back(std::move(t));
        }
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::Parse, "sparql: line " + std::to_string(line_) + ": " + msg);
    }
    char peek(std::size_t k = 0) const { return pos_ + k < s_.size() ? s_[pos_ + k] : '\0'; }
    char get() {
        char c = s_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    void skip() {
        while (pos_ < s_.size()) {
            char c = peek();
            if (c == '#') {
                while (pos_ < s_.size() && peek() != '\n') get();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else {
                break;
            }
        }
    }

    Token next() {
        char c = peek();
        if (c == '<') {
            if (auto iri = try_iri()) return {Tok::Iri, *iri};
            get();
            if (peek() == '=') {
                get();
                return {Tok::Punct, "<="};
            }
            return {Tok::Punct, "<"};
        }
        if ((c == '?' || c == '$') && var_char(peek(1))) {
            get();
            std::string name;
            while (var_char(peek())) name += get();
            return {Tok::Var, name};
        }
        if (c == '"' || c == '\'') return string_tok();
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))))
            return number();
        if (c == '_' && peek(1) == ':') {
            pos_ += 2;
            std::string label;
            while (name_char(peek()) || (peek() == '.' && name_char(peek(1)))) label += get();
            if (label.empty()) fail("empty blank node label");
            return {Tok::Blank, label};
        }
        if (c == '@' && std::isalpha(static_cast<unsigned char>(peek(1)))) {
            get();
            std::string tag;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-') tag += get();
            return {Tok::LangTag, tag};
        }
        if (name_start(c) || c == ':') return name_or_pname();

        // Punctuation and operators.
        static constexpr std::string_view two[] = {"&&", "||", "!=", ">=", "<=", "^^"};
        for (auto op : two) {
            if (s_.substr(pos_, 2) == op) {
                pos_ += 2;
                return {Tok::Punct, std::string(op)};
            }
        }
        static constexpr std::string_view one = "{}()[].,;*+-/!^|?=<>";
        if (one.find(c) != std::string_view::npos) {
            get();
            return {Tok::Punct, std::string(1, c)};
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::optional<std::string> try_iri() {
        std::size_t p = pos_ + 1;
        std::string out;
        while (p < s_.size()) {
            char c = s_[p];
            if (c == '>') {
                pos_ = p + 1;
                return out;
            }
            if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' ||
                c == '|' || c == '^' || c == '`' || c == '\\')
                return std::nullopt;
            out += c;
            ++p;
        }
        return std::nullopt;
    }

    Token name_or_pname() {
        std::string prefix;
        while (name_char(peek()) || (peek() == '.' && name_char(peek(1)) && !prefix.empty())) prefix += get();
        if (peek() != ':') return {Tok::Word, prefix};
        get();
        std::string local;
        while (pos_ < s_.size()) {
            char c = peek();
            if (name_char(c) || c == ':') {
                local += get();
            } else if (c == '.' && (name_char(peek(1)) || peek(1) == ':')) {
                local += get();
            } else if (c == '%' && std::isxdigit(static_cast<unsigned char>(peek(1)))) {
                local += get();
                local += get();
                local += get();
            } else if (c == '\\' && pos_ + 1 < s_.size()) {
                get();
                local += get();
            } else {
                break;
            }
        }
        return {Tok::PName, prefix + ":" + local};
    }

    Token string_tok() {
        char q = get();
        bool long_form = peek() == q && peek(1) == q;
        if (long_form) {
            get();
            get();
        } else if (peek() == q) {
            get();
            return {Tok::String, ""};
        }
        std::string v;
        for (;;) {
            if (pos_ >= s_.size()) fail("unterminated string");
            char c = peek();
            if (long_form && c == q && peek(1) == q && peek(2) == q) {
                pos_ += 3;
                break;
            }
            if (!long_form && c == q) {
                get();
                break;
            }
            if (!long_form && c == '\n') fail("newline in string");
            get();
            if (c == '\\') {
                if (pos_ >= s_.size()) fail("dangling escape");
                char e = get();
                switch (e) {
                    case 't': v += '\t'; break;
                    case 'n': v += '\n'; break;
                    case 'r': v += '\r'; break;
                    case 'b': v += '\b'; break;
                    case 'f': v += '\f'; break;
                    case '"': v += '"'; break;
                    case '\'': v += '\''; break;
                    case '\\': v += '\\'; break;
                    case 'u':
                    case 'U': {
                        int n = e == 'u' ? 4 : 8;
                        unsigned long cp = 0;
                        for (int i = 0; i < n; ++i) {
                            char h = peek();
                            if (!std::isxdigit(static_cast<unsigned char>(h))) fail("bad unicode escape");
                            get();
                            cp = cp * 16 + static_cast<unsigned long>(
                                               std::isdigit(static_cast<unsigned char>(h))
                                                   ? h - '0'
                                                   : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
                        }
                        append_utf8(v, cp);
                        break;
                    }
                    default: fail(std::string("unknown escape \\") + e);
                }
                continue;
            }
            v += c;
        }
        return {Tok::String, v};
    }

    Token number() {
        std::string n;
        bool dot = false, exp = false;
        while (pos_ < s_.size()) {
            char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                n += get();
            } else if (c == '.' && !dot && !exp && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                dot = true;
                n += get();
            } else if ((c == 'e' || c == 'E') && !exp &&
                       (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                        ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
                exp = true;
                n += get();
                if (peek() == '+' || peek() == '-') n += get();
            } else {
                break;
            }
        }
        return {exp ? Tok::Double : dot ? Tok::Decimal : Tok::Integer, n};
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    return Lexer(text).run();
}

}  // namespace kgqa::sparql
