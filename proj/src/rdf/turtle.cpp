#include "kgqa/rdf/turtle.hpp"

#include <cctype>
#include <map>

#include "kgqa/core/error.hpp"

namespace kgqa::rdf {

namespace {

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

bool is_pn_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           static_cast<unsigned char>(c) >= 0x80;
}

class Parser {
public:
    explicit Parser(std::string_view text) : src_(text) {}

    TurtleDocument run() {
        skip_ws();
        while (!eof()) {
            statement();
            skip_ws();
        }
        return std::move(doc_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(ErrorCode::Parse, "turtle: line " + std::to_string(line_) + ": " + msg);
    }

    bool eof() const { return pos_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    char get() {
        char c = src_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }
    void expect(char c) {
        skip_ws();
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        get();
    }

    void skip_ws() {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') get();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else {
                break;
            }
        }
    }

    bool keyword_ci(std::string_view kw) {
        if (pos_ + kw.size() > src_.size()) return false;
        for (std::size_t i = 0; i < kw.size(); ++i) {
            if (std::toupper(static_cast<unsigned char>(src_[pos_ + i])) != kw[i]) return false;
        }
        char after = peek(kw.size());
        return !(std::isalnum(static_cast<unsigned char>(after)) || after == '_' || after == ':');
    }

    void statement() {
        if (peek() == '@') {
            get();
            std::string word;
            while (std::isalpha(static_cast<unsigned char>(peek()))) word += get();
            if (word == "prefix") {
                prefix_decl();
            } else if (word == "base") {
                skip_ws();
                base_ = iri_ref();
            } else {
                fail("unknown directive @" + word);
            }
            expect('.');
            return;
        }
        if (keyword_ci("PREFIX")) {
            pos_ += 6;
            prefix_decl();
            return;
        }
        if (keyword_ci("BASE")) {
            pos_ += 4;
            skip_ws();
            base_ = iri_ref();
            return;
        }
        triples();
        expect('.');
    }

    void prefix_decl() {
        skip_ws();
        std::string label;
        while (!eof() && peek() != ':') {
            if (!is_pn_char(peek()) && peek() != '.') fail("bad prefix label");
            label += get();
        }
        if (eof()) fail("unterminated prefix declaration");
        get();  // ':'
        skip_ws();
        std::string ns = iri_ref();
        prefixes_[label] = ns;
        doc_.prefixes.emplace_back(label, ns);
    }

    void triples() {
        skip_ws();
        Term subject;
        if (peek() == '[') {
            subject = blank_node_property_list();
            skip_ws();
            if (peek() == '.') return;
        } else {
            subject = subject_term();
        }
        predicate_object_list(subject);
    }

    void predicate_object_list(const Term& subject) {
        for (;;) {
            skip_ws();
            Term pred = verb();
            object_list(subject, pred);
            skip_ws();
            if (peek() != ';') return;
            while (peek() == ';') {
                get();
                skip_ws();
            }
            if (peek() == '.' || peek() == ']' || eof()) return;
        }
    }

    void object_list(const Term& subject, const Term& pred) {
        for (;;) {
            skip_ws();
            Term obj = object_term();
            doc_.triples.push_back({subject, pred, obj});
            skip_ws();
            if (peek() != ',') return;
            get();
        }
    }

    Term verb() {
        if (peek() == 'a') {
            char n = peek(1);
            if (std::isspace(static_cast<unsigned char>(n)) || n == '<' || n == '[' || n == '"' || n == '_') {
                get();
                return Term::iri(std::string(vocab::rdf_type));
            }
        }
        if (peek() == '<') return Term::iri(iri_ref());
        return Term::iri(prefixed_name());
    }

    Term subject_term() {
        char c = peek();
        if (c == '<') return Term::iri(iri_ref());
        if (c == '_' && peek(1) == ':') return blank_label();
        if (c == '(') return collection();
        return Term::iri(prefixed_name());
    }

    Term object_term() {
        char c = peek();
        if (c == '<') return Term::iri(iri_ref());
        if (c == '_' && peek(1) == ':') return blank_label();
        if (c == '[') return blank_node_property_list();
        if (c == '(') return collection();
        if (c == '"' || c == '\'') return string_literal();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))))
            return numeric_literal();
        if (keyword_ci("TRUE") && src_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return Term::literal("true", std::string(vocab::xsd_boolean));
        }
        if (keyword_ci("FALSE") && src_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return Term::literal("false", std::string(vocab::xsd_boolean));
        }
        return Term::iri(prefixed_name());
    }

    Term blank_label() {
        pos_ += 2;
        std::string label;
        while (!eof() && (is_pn_char(peek()) || (peek() == '.' && is_pn_char(peek(1))))) label += get();
        if (label.empty()) fail("empty blank node label");
        return Term::blank("b" + std::to_string(doc_id_) + "_" + label);
    }

    Term fresh_blank() { return Term::blank("anon" + std::to_string(++anon_)); }

    Term blank_node_property_list() {
        get();  // '['
        Term node = fresh_blank();
        skip_ws();
        if (peek() == ']') {
            get();
            return node;
        }
        predicate_object_list(node);
        expect(']');
        return node;
    }

    Term collection() {
        get();  // '('
        std::vector<Term> items;
        for (;;) {
            skip_ws();
            if (eof()) fail("unterminated collection");
            if (peek() == ')') {
                get();
                break;
            }
            items.push_back(object_term());
        }
        Term nil = Term::iri(std::string(vocab::rdf) + "nil");
        if (items.empty()) return nil;
        Term head = fresh_blank();
        Term cur = head;
        for (std::size_t i = 0; i < items.size(); ++i) {
            doc_.triples.push_back({cur, Term::iri(std::string(vocab::rdf) + "first"), items[i]});
            Term next = i + 1 < items.size() ? fresh_blank() : nil;
            doc_.triples.push_back({cur, Term::iri(std::string(vocab::rdf) + "rest"), next});
            cur = next;
        }
        return head;
    }

    std::string iri_ref() {
        if (peek() != '<') fail("expected IRI");
        get();
        std::string out;
        for (;;) {
            if (eof()) fail("unterminated IRI");
            char c = get();
            if (c == '>') break;
            if (c == '\n' || c == ' ') fail("whitespace in IRI");
            if (c == '\\') {
                char k = eof() ? '\0' : get();
                if (k == 'u' || k == 'U') {
                    append_utf8(out, hex_digits(k == 'u' ? 4 : 8));
                } else {
                    fail("bad escape in IRI");
                }
                continue;
            }
            out += c;
        }
        if (!base_.empty() && out.find(':') == std::string::npos) {
            if (!out.empty() && out[0] == '#') return base_ + out;
            auto slash = base_.rfind('/');
            return base_.substr(0, slash + 1) + out;
        }
        return out;
    }

    unsigned long hex_digits(int n) {
        unsigned long cp = 0;
        for (int i = 0; i < n; ++i) {
            if (eof() || !std::isxdigit(static_cast<unsigned char>(peek()))) fail("bad unicode escape");
            char h = get();
            cp = cp * 16 + static_cast<unsigned long>(std::isdigit(static_cast<unsigned char>(h))
                                                          ? h - '0'
                                                          : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
        }
        return cp;
    }

    std::string prefixed_name() {
        std::string label;
        while (!eof() && peek() != ':' && (is_pn_char(peek()) || peek() == '.')) label += get();
        if (eof() || peek() != ':') {
            if (label.empty()) fail(std::string("unexpected character '") + (eof() ? ' ' : peek()) + "'");
            fail("expected prefixed name, got '" + label + "'");
        }
        get();  // ':'
        auto it = prefixes_.find(label);
        if (it == prefixes_.end()) fail("undeclared prefix '" + label + ":'");
        std::string local;
        while (!eof()) {
            char c = peek();
            if (is_pn_char(c) || c == ':') {
                local += get();
            } else if (c == '.' && (is_pn_char(peek(1)) || peek(1) == ':')) {
                local += get();
            } else if (c == '%' && std::isxdigit(static_cast<unsigned char>(peek(1)))) {
                local += get();
                local += get();
                local += get();
            } else if (c == '\\') {
                get();
                if (eof()) fail("dangling escape");
                local += get();
            } else {
                break;
            }
        }
        return it->second + local;
    }

    Term string_literal() {
        char q = get();
        bool long_form = peek() == q && peek(1) == q;
        if (long_form) {
            get();
            get();
        } else if (peek() == q) {
            // empty short string
            get();
            return literal_suffix("");
        }
        std::string value;
        for (;;) {
            if (eof()) fail("unterminated string literal");
            char c = peek();
            if (long_form) {
                if (c == q && peek(1) == q && peek(2) == q) {
                    get();
                    get();
                    get();
                    // Allow up to two extra quotes inside the closing run.
                    while (peek() == q) value += get();
                    break;
                }
            } else {
                if (c == q) {
                    get();
                    break;
                }
                if (c == '\n') fail("newline in short string literal");
            }
            get();
            if (c == '\\') {
                if (eof()) fail("dangling escape");
                char e = get();
                switch (e) {
                    case 't': value += '\t'; break;
                    case 'b': value += '\b'; break;
                    case 'n': value += '\n'; break;
                    case 'r': value += '\r'; break;
                    case 'f': value += '\f'; break;
                    case '"': value += '"'; break;
                    case '\'': value += '\''; break;
                    case '\\': value += '\\'; break;
                    case 'u': append_utf8(value, hex_digits(4)); break;
                    case 'U': append_utf8(value, hex_digits(8)); break;
                    default: fail(std::string("unknown escape \\") + e);
                }
                continue;
            }
            value += c;
        }
        return literal_suffix(std::move(value));
    }

    Term literal_suffix(std::string value) {
        if (peek() == '@') {
            get();
            std::string lang;
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) lang += get();
            if (lang.empty()) fail("empty language tag");
            return Term::literal(std::move(value), {}, std::move(lang));
        }
        if (peek() == '^' && peek(1) == '^') {
            pos_ += 2;
            std::string dt = peek() == '<' ? iri_ref() : prefixed_name();
            return Term::literal(std::move(value), std::move(dt));
        }
        return Term::literal(std::move(value));
    }

    Term numeric_literal() {
        std::string num;
        if (peek() == '+' || peek() == '-') num += get();
        bool dot = false, exp = false;
        while (!eof()) {
            char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                num += get();
            } else if (c == '.' && !dot && !exp && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                dot = true;
                num += get();
            } else if ((c == 'e' || c == 'E') && !exp) {
                exp = true;
                num += get();
                if (peek() == '+' || peek() == '-') num += get();
            } else {
                break;
            }
        }
        if (num.empty() || num == "+" || num == "-") fail("malformed number");
        std::string_view dt = exp ? vocab::xsd_double : dot ? vocab::xsd_decimal : vocab::xsd_integer;
        return Term::literal(std::move(num), std::string(dt));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::string base_;
    std::map<std::string, std::string> prefixes_;
    TurtleDocument doc_;
    int anon_ = 0;
    int doc_id_ = 0;
};

}  // namespace

TurtleDocument parse_turtle(std::string_view text) {
    return Parser(text).run();
}

Graph load_graph(std::string_view turtle) {
    Graph g;
    for (const auto& t : parse_turtle(turtle).triples) g.add(t);
    return g;
}

}  // namespace kgqa::rdf
