#include "kgqa/sparql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "kgqa/core/error.hpp"
#include "kgqa/sparql/lexer.hpp"

namespace kgqa::sparql {

namespace {

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

const std::set<std::string>& builtin_names() {
    static const std::set<std::string> names = {
        "STR", "LANG", "LANGMATCHES", "DATATYPE", "BOUND", "IRI", "URI", "BNODE", "RAND", "ABS", "CEIL",
        "FLOOR", "ROUND", "CONCAT", "STRLEN", "UCASE", "LCASE", "ENCODE_FOR_URI", "CONTAINS", "STRSTARTS",
        "STRENDS", "STRBEFORE", "STRAFTER", "YEAR", "MONTH", "DAY", "HOURS", "MINUTES", "SECONDS",
        "TIMEZONE", "TZ", "NOW", "UUID", "STRUUID", "MD5", "SHA1", "SHA256", "SHA384", "SHA512", "COALESCE",
        "IF", "STRLANG", "STRDT", "SAMETERM", "ISIRI", "ISURI", "ISBLANK", "ISLITERAL", "ISNUMERIC", "REGEX",
        "SUBSTR", "REPLACE"};
    return names;
}

const std::set<std::string>& aggregate_names() {
    static const std::set<std::string> names = {"COUNT", "SUM", "MIN", "MAX", "AVG", "SAMPLE", "GROUP_CONCAT"};
    return names;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    Query parse() {
        Query q;
        prologue(q);
        if (!is_word("SELECT")) {
            if (is_word("ASK") || is_word("CONSTRUCT") || is_word("DESCRIBE"))
                fail("only SELECT queries are supported");
            if (is_word("INSERT") || is_word("DELETE") || is_word("LOAD") || is_word("CLEAR") ||
                is_word("DROP") || is_word("CREATE"))
                fail("SPARQL update is not supported");
            fail("expected SELECT");
        }
        select_query(q);
        if (is_word("VALUES")) {
            advance();
            q.trailing_values = values_block();
        }
        if (cur().kind != Tok::End) fail("unexpected trailing token '" + cur().text + "'");
        return q;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& look(std::size_t k = 1) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    void advance() {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string near = cur().kind == Tok::End ? "end of input" : "'" + cur().text + "'";
        throw Error(ErrorCode::Parse, "sparql: line " + std::to_string(cur().line) + ": " + msg + " near " + near);
    }

    bool is_word(std::string_view w) const {
        return cur().kind == Tok::Word && upper(cur().text) == w;
    }
    bool is_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }
    bool accept_word(std::string_view w) {
        if (!is_word(w)) return false;
        advance();
        return true;
    }
    bool accept_punct(std::string_view p) {
        if (!is_punct(p)) return false;
        advance();
        return true;
    }
    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
    }
    void expect_word(std::string_view w) {
        if (!accept_word(w)) fail("expected " + std::string(w));
    }

    std::string resolve_pname(const std::string& pname) {
        auto colon = pname.find(':');
        auto prefix = pname.substr(0, colon);
        auto it = prefixes_.find(prefix);
        if (it == prefixes_.end()) fail("undeclared prefix '" + prefix + ":'");
        return it->second + pname.substr(colon + 1);
    }

    std::string resolve_iri(const std::string& iri) {
        if (!base_.empty() && iri.find(':') == std::string::npos) {
            if (!iri.empty() && iri[0] == '#') return base_ + iri;
            return base_.substr(0, base_.rfind('/') + 1) + iri;
        }
        return iri;
    }

    std::string iri() {
        if (cur().kind == Tok::Iri) {
            auto v = resolve_iri(cur().text);
            advance();
            return v;
        }
        if (cur().kind == Tok::PName) {
            auto v = resolve_pname(cur().text);
            advance();
            return v;
        }
        fail("expected IRI");
    }

    void prologue(Query& q) {
        for (;;) {
            if (accept_word("PREFIX")) {
                if (cur().kind != Tok::PName || cur().text.back() != ':')
                    fail("expected prefix label");
                std::string label = cur().text.substr(0, cur().text.size() - 1);
                advance();
                if (cur().kind != Tok::Iri) fail("expected namespace IRI");
                std::string ns = resolve_iri(cur().text);
                advance();
                prefixes_[label] = ns;
                q.prefixes.emplace_back(label, ns);
            } else if (accept_word("BASE")) {
                if (cur().kind != Tok::Iri) fail("expected base IRI");
                base_ = cur().text;
                advance();
            } else {
                return;
            }
        }
    }

    void select_query(Query& q) {
        expect_word("SELECT");
        if (accept_word("DISTINCT")) q.distinct = true;
        else if (accept_word("REDUCED")) q.reduced = true;

        if (accept_punct("*")) {
            q.select_all = true;
        } else {
            for (;;) {
                if (cur().kind == Tok::Var) {
                    q.projections.push_back({cur().text, std::nullopt});
                    advance();
                } else if (is_punct("(")) {
                    advance();
                    Expr e = expression();
                    expect_word("AS");
                    if (cur().kind != Tok::Var) fail("expected variable after AS");
                    q.projections.push_back({cur().text, std::move(e)});
                    advance();
                    expect_punct(")");
                } else {
                    break;
                }
            }
            if (q.projections.empty()) fail("empty projection");
        }
        while (accept_word("FROM")) {
            accept_word("NAMED");
            iri();
        }
        accept_word("WHERE");
        q.where = group_graph_pattern();
        solution_modifiers(q);
    }

    void solution_modifiers(Query& q) {
        if (is_word("GROUP")) {
            advance();
            expect_word("BY");
            bool any = false;
            for (;;) {
                if (cur().kind == Tok::Var) {
                    Expr e;
                    e.kind = Expr::Kind::Variable;
                    e.var = cur().text;
                    advance();
                    q.group_by.push_back({std::move(e), std::nullopt});
                } else if (is_punct("(")) {
                    advance();
                    Expr e = expression();
                    std::optional<std::string> alias;
                    if (accept_word("AS")) {
                        if (cur().kind != Tok::Var) fail("expected variable after AS");
                        alias = cur().text;
                        advance();
                    }
                    expect_punct(")");
                    q.group_by.push_back({std::move(e), alias});
                } else if (starts_call()) {
                    q.group_by.push_back({primary(), std::nullopt});
                } else {
                    break;
                }
                any = true;
            }
            if (!any) fail("empty GROUP BY");
        }
        if (accept_word("HAVING")) {
            do {
                q.having.push_back(constraint());
            } while (is_punct("(") || starts_call());
        }
        if (is_word("ORDER")) {
            advance();
            expect_word("BY");
            bool any = false;
            for (;;) {
                if (is_word("ASC") || is_word("DESC")) {
                    bool desc = is_word("DESC");
                    advance();
                    expect_punct("(");
                    Expr e = expression();
                    expect_punct(")");
                    q.order_by.push_back({std::move(e), desc});
                } else if (cur().kind == Tok::Var) {
                    Expr e;
                    e.kind = Expr::Kind::Variable;
                    e.var = cur().text;
                    advance();
                    q.order_by.push_back({std::move(e), false});
                } else if (is_punct("(") || starts_call()) {
                    q.order_by.push_back({constraint(), false});
                } else {
                    break;
                }
                any = true;
            }
            if (!any) fail("empty ORDER BY");
        }
        for (int i = 0; i < 2; ++i) {
            if (accept_word("LIMIT")) {
                if (cur().kind != Tok::Integer) fail("expected integer after LIMIT");
                q.limit = std::stoll(cur().text);
                advance();
            } else if (accept_word("OFFSET")) {
                if (cur().kind != Tok::Integer) fail("expected integer after OFFSET");
                q.offset = std::stoll(cur().text);
                advance();
            }
        }
    }

    bool starts_call() const {
        if (cur().kind == Tok::Word) {
            auto u = upper(cur().text);
            return (builtin_names().count(u) || aggregate_names().count(u) || u == "EXISTS" || u == "NOT") &&
                   (look().kind == Tok::Punct && look().text == "(" || u == "EXISTS" || u == "NOT");
        }
        if (cur().kind == Tok::Iri || cur().kind == Tok::PName)
            return look().kind == Tok::Punct && look().text == "(";
        return false;
    }

    GroupPattern group_graph_pattern() {
        expect_punct("{");
        GroupPattern g;
        if (is_word("SELECT")) {
            auto sub = std::make_shared<Query>();
            select_query(*sub);
            if (is_word("VALUES")) {
                advance();
                sub->trailing_values = values_block();
            }
            g.elements.push_back({SubSelect{std::move(sub)}});
            expect_punct("}");
            return g;
        }
        for (;;) {
            if (accept_punct("}")) return g;
            if (cur().kind == Tok::End) fail("unterminated group pattern");
            if (accept_punct(".")) continue;
            if (is_punct("{")) {
                GroupPattern first = group_graph_pattern();
                if (is_word("UNION")) {
                    UnionPattern u;
                    u.branches.push_back(std::move(first));
                    while (accept_word("UNION")) u.branches.push_back(group_graph_pattern());
                    g.elements.push_back({std::move(u)});
                } else {
                    g.elements.push_back({std::move(first)});
                }
                continue;
            }
            if (accept_word("OPTIONAL")) {
                g.elements.push_back({OptionalPattern{group_graph_pattern()}});
                continue;
            }
            if (accept_word("MINUS")) {
                g.elements.push_back({MinusPattern{group_graph_pattern()}});
                continue;
            }
            if (accept_word("FILTER")) {
                g.elements.push_back({Filter{constraint()}});
                continue;
            }
            if (accept_word("BIND")) {
                expect_punct("(");
                Expr e = expression();
                expect_word("AS");
                if (cur().kind != Tok::Var) fail("expected variable after AS");
                std::string v = cur().text;
                advance();
                expect_punct(")");
                g.elements.push_back({Bind{std::move(e), std::move(v)}});
                continue;
            }
            if (accept_word("VALUES")) {
                g.elements.push_back({values_block()});
                continue;
            }
            if (accept_word("SERVICE")) {
                ServicePattern s;
                s.silent = accept_word("SILENT");
                s.endpoint = iri();
                s.group = group_graph_pattern();
                g.elements.push_back({std::move(s)});
                continue;
            }
            if (is_word("GRAPH")) fail("GRAPH patterns are not supported");
            triples_same_subject(g);
            if (!is_punct("}") && !accept_punct(".")) {
                if (!(is_punct("{") || is_word("OPTIONAL") || is_word("FILTER") || is_word("MINUS") ||
                      is_word("BIND") || is_word("VALUES") || is_word("SERVICE")))
                    fail("expected '.' or '}'");
            }
        }
    }

    Values values_block() {
        Values v;
        bool single = false;
        if (cur().kind == Tok::Var) {
            v.vars.push_back(cur().text);
            advance();
            single = true;
        } else {
            expect_punct("(");
            while (cur().kind == Tok::Var) {
                v.vars.push_back(cur().text);
                advance();
            }
            expect_punct(")");
        }
        expect_punct("{");
        while (!accept_punct("}")) {
            std::vector<std::optional<rdf::Term>> row;
            if (single) {
                row.push_back(data_value());
            } else {
                expect_punct("(");
                while (!accept_punct(")")) row.push_back(data_value());
                if (row.size() != v.vars.size()) fail("VALUES row arity mismatch");
            }
            v.rows.push_back(std::move(row));
        }
        return v;
    }

    std::optional<rdf::Term> data_value() {
        if (accept_word("UNDEF")) return std::nullopt;
        if (cur().kind == Tok::Iri || cur().kind == Tok::PName) return rdf::Term::iri(iri());
        if (cur().kind == Tok::End) fail("unterminated VALUES");
        return literal_term();
    }

    Node fresh_blank() { return rdf::Term::blank("_q" + std::to_string(++anon_)); }

    Node var_or_term() {
        switch (cur().kind) {
            case Tok::Var: {
                Var v{cur().text};
                advance();
                return v;
            }
            case Tok::Iri:
            case Tok::PName: return rdf::Term::iri(iri());
            case Tok::Blank: {
                // Blank nodes in patterns behave as non-projectable variables.
                Var v{"_b_" + cur().text};
                advance();
                return v;
            }
            default: return literal_term();
        }
    }

    rdf::Term literal_term() {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::String: {
                std::string value = t.text;
                advance();
                if (cur().kind == Tok::LangTag) {
                    std::string lang = cur().text;
                    advance();
                    return rdf::Term::literal(value, {}, lang);
                }
                if (accept_punct("^^")) return rdf::Term::literal(value, iri());
                return rdf::Term::literal(value);
            }
            case Tok::Integer: {
                auto v = t.text;
                advance();
                return rdf::Term::literal(v, std::string(rdf::vocab::xsd_integer));
            }
            case Tok::Decimal: {
                auto v = t.text;
                advance();
                return rdf::Term::literal(v, std::string(rdf::vocab::xsd_decimal));
            }
            case Tok::Double: {
                auto v = t.text;
                advance();
                return rdf::Term::literal(v, std::string(rdf::vocab::xsd_double));
            }
            case Tok::Word: {
                auto u = t.text;
                if (u == "true" || u == "false") {
                    advance();
                    return rdf::Term::literal(u, std::string(rdf::vocab::xsd_boolean));
                }
                break;
            }
            case Tok::Punct:
                if ((t.text == "-" || t.text == "+") &&
                    (look().kind == Tok::Integer || look().kind == Tok::Decimal || look().kind == Tok::Double)) {
                    std::string sign = t.text == "-" ? "-" : "";
                    advance();
                    auto lit = literal_term();
                    lit.value = sign + lit.value;
                    return lit;
                }
                break;
            default: break;
        }
        fail("expected RDF term");
    }

    // Subject or object that may be a blank-node property list / collection.
    Node graph_node(GroupPattern& g) {
        if (is_punct("[")) {
            advance();
            Node node = Var{"_anon" + std::to_string(++anon_)};
            if (!accept_punct("]")) {
                property_list(g, node);
                expect_punct("]");
            }
            return node;
        }
        if (is_punct("(")) {
            advance();
            std::vector<Node> items;
            while (!accept_punct(")")) {
                if (cur().kind == Tok::End) fail("unterminated collection");
                items.push_back(graph_node(g));
            }
            rdf::Term nil = rdf::Term::iri(std::string(rdf::vocab::rdf) + "nil");
            if (items.empty()) return nil;
            Node head = Var{"_anon" + std::to_string(++anon_)};
            Node node = head;
            for (std::size_t i = 0; i < items.size(); ++i) {
                Path first{Path::Kind::Link, std::string(rdf::vocab::rdf) + "first", {}};
                Path rest{Path::Kind::Link, std::string(rdf::vocab::rdf) + "rest", {}};
                g.elements.push_back({TriplePattern{node, first, items[i]}});
                Node next = i + 1 < items.size() ? Node{Var{"_anon" + std::to_string(++anon_)}} : Node{nil};
                g.elements.push_back({TriplePattern{node, rest, next}});
                node = next;
            }
            return head;
        }
        return var_or_term();
    }

    void triples_same_subject(GroupPattern& g) {
        bool bracketed = is_punct("[") || is_punct("(");
        Node subject = graph_node(g);
        if (bracketed && (is_punct(".") || is_punct("}"))) return;
        property_list(g, subject);
    }

    void property_list(GroupPattern& g, const Node& subject) {
        for (;;) {
            std::variant<Var, Path> pred;
            if (cur().kind == Tok::Var) {
                pred = Var{cur().text};
                advance();
            } else {
                pred = path();
            }
            for (;;) {
                Node obj = graph_node(g);
                g.elements.push_back({TriplePattern{subject, pred, obj}});
                if (!accept_punct(",")) break;
            }
            if (!is_punct(";")) return;
            while (accept_punct(";")) {
            }
            if (is_punct(".") || is_punct("]") || is_punct("}") || cur().kind == Tok::End) return;
        }
    }

    Path path() { return path_alternative(); }

    Path path_alternative() {
        Path first = path_sequence();
        if (!is_punct("|")) return first;
        Path alt{Path::Kind::Alternative, {}, {std::move(first)}};
        while (accept_punct("|")) alt.parts.push_back(path_sequence());
        return alt;
    }

    Path path_sequence() {
        Path first = path_elt_or_inverse();
        if (!is_punct("/")) return first;
        Path seq{Path::Kind::Sequence, {}, {std::move(first)}};
        while (accept_punct("/")) seq.parts.push_back(path_elt_or_inverse());
        return seq;
    }

    Path path_elt_or_inverse() {
        if (accept_punct("^")) return Path{Path::Kind::Inverse, {}, {path_elt()}};
        return path_elt();
    }

    Path path_elt() {
        Path p = path_primary();
        if (is_punct("*")) {
            advance();
            return Path{Path::Kind::ZeroOrMore, {}, {std::move(p)}};
        }
        if (is_punct("+")) {
            advance();
            return Path{Path::Kind::OneOrMore, {}, {std::move(p)}};
        }
        if (is_punct("?")) {
            advance();
            return Path{Path::Kind::ZeroOrOne, {}, {std::move(p)}};
        }
        return p;
    }

    Path path_one_in_set() {
        if (accept_punct("^")) {
            if (is_word("a")) {
                advance();
                return Path{Path::Kind::Inverse, {}, {Path{Path::Kind::Link, std::string(rdf::vocab::rdf_type), {}}}};
            }
            return Path{Path::Kind::Inverse, {}, {Path{Path::Kind::Link, iri(), {}}}};
        }
        if (cur().kind == Tok::Word && cur().text == "a") {
            advance();
            return Path{Path::Kind::Link, std::string(rdf::vocab::rdf_type), {}};
        }
        return Path{Path::Kind::Link, iri(), {}};
    }

    Path path_primary() {
        if (cur().kind == Tok::Word && cur().text == "a") {
            advance();
            return Path{Path::Kind::Link, std::string(rdf::vocab::rdf_type), {}};
        }
        if (accept_punct("!")) {
            Path neg{Path::Kind::Negated, {}, {}};
            if (accept_punct("(")) {
                if (!is_punct(")")) {
                    neg.parts.push_back(path_one_in_set());
                    while (accept_punct("|")) neg.parts.push_back(path_one_in_set());
                }
                expect_punct(")");
            } else {
                neg.parts.push_back(path_one_in_set());
            }
            return neg;
        }
        if (accept_punct("(")) {
            Path p = path();
            expect_punct(")");
            return p;
        }
        if (cur().kind == Tok::Iri || cur().kind == Tok::PName) return Path{Path::Kind::Link, iri(), {}};
        fail("expected predicate");
    }

    // --- expressions -------------------------------------------------------

    Expr constraint() {
        if (accept_punct("(")) {
            Expr e = expression();
            expect_punct(")");
            return e;
        }
        if (starts_call()) return primary();
        fail("expected constraint");
    }

    static Expr binary(std::string op, Expr l, Expr r) {
        Expr e;
        e.kind = Expr::Kind::Binary;
        e.op = std::move(op);
        e.args.push_back(std::move(l));
        e.args.push_back(std::move(r));
        return e;
    }

    Expr expression() { return or_expr(); }

    Expr or_expr() {
        Expr l = and_expr();
        while (accept_punct("||")) l = binary("||", std::move(l), and_expr());
        return l;
    }

    Expr and_expr() {
        Expr l = relational();
        while (accept_punct("&&")) l = binary("&&", std::move(l), relational());
        return l;
    }

    Expr relational() {
        Expr l = additive();
        static constexpr std::string_view ops[] = {"=", "!=", "<", ">", "<=", ">="};
        for (auto op : ops) {
            if (is_punct(op)) {
                advance();
                return binary(std::string(op), std::move(l), additive());
            }
        }
        bool negated = false;
        if (is_word("NOT") && look().kind == Tok::Word && upper(look().text) == "IN") {
            advance();
            negated = true;
        }
        if (accept_word("IN")) {
            Expr e;
            e.kind = negated ? Expr::Kind::NotIn : Expr::Kind::In;
            e.args.push_back(std::move(l));
            expect_punct("(");
            if (!is_punct(")")) {
                e.args.push_back(expression());
                while (accept_punct(",")) e.args.push_back(expression());
            }
            expect_punct(")");
            return e;
        }
        return l;
    }

    Expr additive() {
        Expr l = multiplicative();
        for (;;) {
            if (is_punct("+") || is_punct("-")) {
                std::string op = cur().text;
                advance();
                l = binary(op, std::move(l), multiplicative());
            } else {
                return l;
            }
        }
    }

    Expr multiplicative() {
        Expr l = unary();
        while (is_punct("*") || is_punct("/")) {
            std::string op = cur().text;
            advance();
            l = binary(op, std::move(l), unary());
        }
        return l;
    }

    Expr unary() {
        if (is_punct("!") || is_punct("-") || is_punct("+")) {
            std::string op = cur().text;
            advance();
            Expr e;
            e.kind = Expr::Kind::Unary;
            e.op = op;
            e.args.push_back(primary());
            return e;
        }
        return primary();
    }

    Expr primary() {
        const Token& t = cur();
        if (t.kind == Tok::Punct && t.text == "(") {
            advance();
            Expr e = expression();
            expect_punct(")");
            return e;
        }
        if (t.kind == Tok::Var) {
            Expr e;
            e.kind = Expr::Kind::Variable;
            e.var = t.text;
            advance();
            return e;
        }
        if (t.kind == Tok::Iri || t.kind == Tok::PName) {
            std::string name = iri();
            if (is_punct("(")) {
                Expr e;
                e.kind = Expr::Kind::Call;
                e.op = name;
                e.args = arg_list();
                return e;
            }
            Expr e;
            e.kind = Expr::Kind::Constant;
            e.value = rdf::Term::iri(name);
            return e;
        }
        if (t.kind == Tok::Word) {
            auto u = upper(t.text);
            if (u == "NOT" && look().kind == Tok::Word && upper(look().text) == "EXISTS") {
                advance();
                advance();
                Expr e;
                e.kind = Expr::Kind::NotExists;
                e.pattern = std::make_shared<GroupPattern>(group_graph_pattern());
                return e;
            }
            if (u == "EXISTS") {
                advance();
                Expr e;
                e.kind = Expr::Kind::Exists;
                e.pattern = std::make_shared<GroupPattern>(group_graph_pattern());
                return e;
            }
            if (aggregate_names().count(u)) return aggregate(u);
            if (builtin_names().count(u)) {
                advance();
                Expr e;
                e.kind = Expr::Kind::Call;
                e.op = u;
                if (u == "NOW" || u == "RAND" || u == "UUID" || u == "STRUUID") {
                    expect_punct("(");
                    expect_punct(")");
                    return e;
                }
                if (u == "BNODE" && is_punct("(") && look().kind == Tok::Punct && look().text == ")") {
                    advance();
                    advance();
                    return e;
                }
                e.args = arg_list();
                return e;
            }
        }
        Expr e;
        e.kind = Expr::Kind::Constant;
        e.value = literal_term();
        return e;
    }

    std::vector<Expr> arg_list() {
        std::vector<Expr> args;
        expect_punct("(");
        if (accept_punct(")")) return args;
        accept_word("DISTINCT");
        args.push_back(expression());
        while (accept_punct(",")) args.push_back(expression());
        expect_punct(")");
        return args;
    }

    Expr aggregate(const std::string& name) {
        advance();
        Expr e;
        e.kind = Expr::Kind::Aggregate;
        e.op = name;
        expect_punct("(");
        if (accept_word("DISTINCT")) e.distinct = true;
        if (name == "COUNT" && accept_punct("*")) {
            e.star = true;
        } else {
            e.args.push_back(expression());
        }
        if (name == "GROUP_CONCAT" && accept_punct(";")) {
            expect_word("SEPARATOR");
            expect_punct("=");
            if (cur().kind != Tok::String) fail("expected separator string");
            e.separator = cur().text;
            advance();
        }
        expect_punct(")");
        return e;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::map<std::string, std::string> prefixes_;
    std::string base_;
    int anon_ = 0;
};

void collect_path(const Path& p, std::vector<std::string>& out) {
    if (p.kind == Path::Kind::Link) {
        out.push_back(p.iri);
        return;
    }
    for (const auto& part : p.parts) collect_path(part, out);
}

void collect_group(const GroupPattern& g, IriUsage& usage);

void collect_expr(const Expr& e, IriUsage& usage) {
    if (e.pattern) collect_group(*e.pattern, usage);
    for (const auto& a : e.args) collect_expr(a, usage);
}

void collect_group(const GroupPattern& g, IriUsage& usage) {
    for (const auto& el : g.elements) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, TriplePattern>) {
                    if (auto* path = std::get_if<Path>(&v.predicate)) {
                        collect_path(*path, usage.predicates);
                        if (path->kind == Path::Kind::Link && path->iri == rdf::vocab::rdf_type) {
                            if (auto* term = std::get_if<rdf::Term>(&v.object); term && term->is_iri())
                                usage.classes.push_back(term->value);
                        }
                    }
                } else if constexpr (std::is_same_v<T, Filter>) {
                    collect_expr(v.expr, usage);
                } else if constexpr (std::is_same_v<T, OptionalPattern> || std::is_same_v<T, MinusPattern>) {
                    collect_group(v.group, usage);
                } else if constexpr (std::is_same_v<T, UnionPattern>) {
                    for (const auto& b : v.branches) collect_group(b, usage);
                } else if constexpr (std::is_same_v<T, GroupPattern>) {
                    collect_group(v, usage);
                } else if constexpr (std::is_same_v<T, SubSelect>) {
                    collect_group(v.query->where, usage);
                } else if constexpr (std::is_same_v<T, ServicePattern>) {
                    collect_group(v.group, usage);
                }
            },
            el.value);
    }
}

void unique_append(std::vector<std::string>& out, const std::string& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

void pattern_vars(const GroupPattern& g, std::vector<std::string>& out);

void node_var(const Node& n, std::vector<std::string>& out) {
    if (auto* v = std::get_if<Var>(&n); v && v->name.rfind("_", 0) != 0) unique_append(out, v->name);
}

void pattern_vars(const GroupPattern& g, std::vector<std::string>& out) {
    for (const auto& el : g.elements) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, TriplePattern>) {
                    node_var(v.subject, out);
                    if (auto* pv = std::get_if<Var>(&v.predicate)) node_var(*pv, out);
                    node_var(v.object, out);
                } else if constexpr (std::is_same_v<T, OptionalPattern>) {
                    pattern_vars(v.group, out);
                } else if constexpr (std::is_same_v<T, UnionPattern>) {
                    for (const auto& b : v.branches) pattern_vars(b, out);
                } else if constexpr (std::is_same_v<T, GroupPattern>) {
                    pattern_vars(v, out);
                } else if constexpr (std::is_same_v<T, Bind>) {
                    unique_append(out, v.var);
                } else if constexpr (std::is_same_v<T, Values>) {
                    for (const auto& name : v.vars) unique_append(out, name);
                } else if constexpr (std::is_same_v<T, SubSelect>) {
                    for (const auto& name : v.query->result_variables()) unique_append(out, name);
                } else if constexpr (std::is_same_v<T, ServicePattern>) {
                    pattern_vars(v.group, out);
                }
            },
            el.value);
    }
}

}  // namespace

std::vector<std::string> Query::result_variables() const {
    if (!select_all) {
        std::vector<std::string> out;
        for (const auto& p : projections) out.push_back(p.var);
        return out;
    }
    return pattern_variables(where);
}

std::vector<std::string> pattern_variables(const GroupPattern& group) {
    std::vector<std::string> out;
    pattern_vars(group, out);
    return out;
}

IriUsage collect_iri_usage(const Query& query) {
    IriUsage usage;
    collect_group(query.where, usage);
    IriUsage unique;
    for (const auto& p : usage.predicates) unique_append(unique.predicates, p);
    for (const auto& c : usage.classes) unique_append(unique.classes, c);
    return unique;
}

bool has_aggregate(const Expr& e) {
    if (e.kind == Expr::Kind::Aggregate) return true;
    for (const auto& a : e.args) {
        if (has_aggregate(a)) return true;
    }
    return false;
}

Query parse_query(std::string_view text) {
    return Parser(text).parse();
}

PrefixScan scan_prefixes(std::string_view text) {
    PrefixScan scan;
    auto toks = tokenize(text);
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind == Tok::Word && upper(t.text) == "PREFIX" && i + 2 < toks.size() &&
            toks[i + 1].kind == Tok::PName && toks[i + 2].kind == Tok::Iri) {
            const auto& label = toks[i + 1].text;
            scan.declared[label.substr(0, label.size() - 1)] = toks[i + 2].text;
            i += 2;
            continue;
        }
        if (t.kind == Tok::PName) {
            auto prefix = t.text.substr(0, t.text.find(':'));
            if (std::find(scan.used.begin(), scan.used.end(), prefix) == scan.used.end())
                scan.used.push_back(prefix);
        }
    }
    return scan;
}

}  // namespace kgqa::sparql
