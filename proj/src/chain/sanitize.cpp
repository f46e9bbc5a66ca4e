#include "kgqa/chain/sanitize.hpp"

#include <cctype>
#include <regex>

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"
#include "kgqa/sparql/parser.hpp"

namespace kgqa::chain {

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '?' || c == '$';
}

/// Content of the first fenced block mentioning SELECT, else of the first
/// fenced block, else the input unchanged.
std::string unfence(std::string_view raw) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while (true) {
        auto open = raw.find("```", pos);
        if (open == std::string_view::npos) break;
        auto line_end = raw.find('\n', open);
        if (line_end == std::string_view::npos) break;
        auto close = raw.find("```", line_end);
        std::size_t end = close == std::string_view::npos ? raw.size() : close;
        blocks.emplace_back(raw.substr(line_end + 1, end - line_end - 1));
        if (close == std::string_view::npos) break;
        pos = close + 3;
    }
    if (blocks.empty()) return std::string(raw);
    for (const auto& b : blocks) {
        if (text::contains_ci(b, "select")) return b;
    }
    return blocks.front();
}

std::vector<std::size_t> select_positions(const std::string& s) {
    std::vector<std::size_t> out;
    const std::string low = text::lower(s);
    std::size_t pos = 0;
    while ((pos = low.find("select", pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !ident_char(s[pos - 1]);
        std::size_t after = pos + 6;
        bool right_ok = after < s.size() &&
                        (std::isspace(static_cast<unsigned char>(s[after])) || s[after] == '*' || s[after] == '(' ||
                         s[after] == '?' || s[after] == '$');
        if (left_ok && right_ok) out.push_back(pos);
        pos = after;
    }
    return out;
}

/// Start of the run of PREFIX/BASE declarations that ends right before `select`.
std::size_t prologue_start(const std::string& s, std::size_t select) {
    static const std::regex decl(R"((PREFIX\s+[A-Za-z0-9_.\-]*:\s*<[^<>\s]*>|BASE\s*<[^<>\s]*>))",
                                 std::regex::icase);
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (auto it = std::sregex_iterator(s.begin(), s.begin() + static_cast<long>(select), decl);
         it != std::sregex_iterator(); ++it) {
        spans.emplace_back(static_cast<std::size_t>(it->position()),
                           static_cast<std::size_t>(it->position() + it->length()));
    }
    auto only_space = [&](std::size_t a, std::size_t b) {
        for (std::size_t i = a; i < b; ++i) {
            if (!std::isspace(static_cast<unsigned char>(s[i]))) return false;
        }
        return true;
    };
    std::size_t start = select;
    for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
        if (!only_space(it->second, start)) break;
        start = it->first;
    }
    return start;
}

/// Cursor over query text that skips strings, IRIs and comments.
class Scanner {
public:
    Scanner(const std::string& s, std::size_t pos) : s_(&s), pos_(pos) {}

    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ >= s_->size(); }

    void skip_space() {
        while (!done()) {
            if (std::isspace(static_cast<unsigned char>((*s_)[pos_]))) {
                ++pos_;
            } else if ((*s_)[pos_] == '#') {
                while (!done() && (*s_)[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    /// Advances over one lexical unit; returns false at end.
    bool step() {
        if (done()) return false;
        char c = (*s_)[pos_];
        if (c == '"' || c == '\'') return skip_string(c);
        if (c == '<') {
            std::size_t j = pos_ + 1;
            while (j < s_->size() && (*s_)[j] != '>' && !std::isspace(static_cast<unsigned char>((*s_)[j])) &&
                   (*s_)[j] != '{' && (*s_)[j] != '}' && (*s_)[j] != '"' && (*s_)[j] != '<')
                ++j;
            pos_ = (j < s_->size() && (*s_)[j] == '>') ? j + 1 : pos_ + 1;
            return true;
        }
        if (c == '#') {
            while (!done() && (*s_)[pos_] != '\n') ++pos_;
            return true;
        }
        ++pos_;
        return true;
    }

    /// From an opening bracket, moves just past its match. False if unbalanced.
    bool skip_balanced(char open, char close) {
        if (done() || (*s_)[pos_] != open) return false;
        int depth = 0;
        while (!done()) {
            char c = (*s_)[pos_];
            if (c == open) ++depth;
            else if (c == close) --depth;
            if (!step()) return false;
            if (depth == 0) return true;
        }
        return false;
    }

    std::string peek_word() const {
        std::size_t j = pos_;
        while (j < s_->size() && (std::isalpha(static_cast<unsigned char>((*s_)[j])) || (*s_)[j] == '_')) ++j;
        return text::lower(s_->substr(pos_, j - pos_));
    }

    void advance(std::size_t n) { pos_ += n; }
    char peek() const { return done() ? '\0' : (*s_)[pos_]; }

private:
    bool skip_string(char q) {
        bool longq = s_->compare(pos_, 3, std::string(3, q)) == 0;
        pos_ += longq ? 3 : 1;
        while (!done()) {
            if ((*s_)[pos_] == '\\') {
                pos_ += 2;
                continue;
            }
            if (longq ? s_->compare(pos_, 3, std::string(3, q)) == 0 : (*s_)[pos_] == q) {
                pos_ += longq ? 3 : 1;
                return true;
            }
            if (!longq && (*s_)[pos_] == '\n') return true;
            ++pos_;
        }
        return true;
    }

    const std::string* s_;
    std::size_t pos_;
};

bool is_var_start(char c) { return c == '?' || c == '$'; }

void skip_var(Scanner& sc, const std::string& s) {
    sc.advance(1);
    while (!sc.done() && (std::isalnum(static_cast<unsigned char>(s[sc.pos()])) || s[sc.pos()] == '_')) sc.advance(1);
}

/// One GROUP BY / ORDER BY / HAVING item: a variable, a bracketed
/// expression, or a call like ASC(...) or COUNT(...).
bool consume_item(Scanner& sc, const std::string& s) {
    sc.skip_space();
    char c = sc.peek();
    if (is_var_start(c)) {
        skip_var(sc, s);
        return true;
    }
    if (c == '(') return sc.skip_balanced('(', ')');
    auto w = sc.peek_word();
    if (!w.empty()) {
        Scanner probe = sc;
        probe.advance(w.size());
        probe.skip_space();
        if (probe.peek() == '(') {
            if (!probe.skip_balanced('(', ')')) return false;
            sc = probe;
            return true;
        }
    }
    return false;
}

/// Consumes solution modifiers after the WHERE group; returns the end offset.
std::size_t consume_modifiers(const std::string& s, std::size_t pos) {
    std::size_t end = pos;
    Scanner sc(s, pos);
    while (true) {
        sc.skip_space();
        auto w = sc.peek_word();
        Scanner next = sc;
        if (w == "group" || w == "order") {
            next.advance(w.size());
            next.skip_space();
            if (next.peek_word() != "by") break;
            next.advance(2);
            if (!consume_item(next, s)) break;
            while (true) {
                Scanner more = next;
                if (!consume_item(more, s)) break;
                next = more;
            }
        } else if (w == "having") {
            next.advance(w.size());
            if (!consume_item(next, s)) break;
            while (true) {
                Scanner more = next;
                if (!consume_item(more, s)) break;
                next = more;
            }
        } else if (w == "limit" || w == "offset") {
            next.advance(w.size());
            next.skip_space();
            if (!std::isdigit(static_cast<unsigned char>(next.peek()))) break;
            while (std::isdigit(static_cast<unsigned char>(next.peek()))) next.advance(1);
        } else if (w == "values") {
            next.advance(w.size());
            next.skip_space();
            if (is_var_start(next.peek())) skip_var(next, s);
            else if (!next.skip_balanced('(', ')')) break;
            next.skip_space();
            if (!next.skip_balanced('{', '}')) break;
        } else {
            break;
        }
        sc = next;
        end = sc.pos();
    }
    return end;
}

/// End offset of the query body that starts at `select`, or npos.
std::size_t query_end(const std::string& s, std::size_t select) {
    Scanner sc(s, select + 6);
    while (!sc.done() && sc.peek() != '{') {
        // Projection expressions may hold parentheses but never braces.
        sc.step();
    }
    if (sc.done()) return std::string::npos;
    if (!sc.skip_balanced('{', '}')) return std::string::npos;
    return consume_modifiers(s, sc.pos());
}

std::string inject_prefixes(const std::string& query, const SchemaDocument* schema) {
    sparql::PrefixScan scan;
    try {
        scan = sparql::scan_prefixes(query);
    } catch (const Error&) {
        return query;
    }
    std::string header;
    for (const auto& label : scan.used) {
        if (scan.declared.count(label)) continue;
        std::optional<std::string> ns;
        if (schema) ns = schema->namespace_for(label);
        if (!ns) {
            auto it = standard_prefixes().find(label);
            if (it != standard_prefixes().end()) ns = it->second;
        }
        if (ns) header += "PREFIX " + label + ": <" + *ns + ">\n";
    }
    return header + query;
}

}  // namespace

SanitizeResult sanitize_query(std::string_view raw, const SchemaDocument* schema) {
    const std::string body = unfence(raw);
    auto selects = select_positions(body);
    if (selects.empty()) return {std::nullopt, "no SELECT query found in model output"};
    std::string last_error;
    for (auto p : selects) {
        auto end = query_end(body, p);
        if (end == std::string::npos) {
            last_error = "unbalanced braces after SELECT";
            continue;
        }
        auto start = prologue_start(body, p);
        std::string candidate = inject_prefixes(text::trim(body.substr(start, end - start)), schema);
        try {
            sparql::parse_query(candidate);
            return {candidate, ""};
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    return {std::nullopt, last_error};
}

std::vector<Violation> validate_schema_compliance(std::string_view query, const SchemaDocument& schema) {
    auto usage = sparql::collect_iri_usage(sparql::parse_query(query));
    std::vector<Violation> out;
    auto check = [&](const std::vector<std::string>& iris, const char* role) {
        for (const auto& iri : iris) {
            if (is_standard_vocabulary(iri) || schema.has_term(iri)) continue;
            Violation v{iri, role};
            if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
        }
    };
    check(usage.predicates, "predicate");
    check(usage.classes, "class");
    return out;
}

}  // namespace kgqa::chain
