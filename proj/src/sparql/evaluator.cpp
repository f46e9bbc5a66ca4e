#include "kgqa/sparql/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <regex>
#include <set>
#include <unordered_set>

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::sparql {

namespace {

using rdf::Term;
using Solution = std::map<std::string, Term>;
using Solutions = std::vector<Solution>;
namespace vocab = rdf::vocab;

struct EvalError {};

bool compatible(const Solution& a, const Solution& b) {
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        if (it != b.end() && it->second != v) return false;
    }
    return true;
}

Solution merge(const Solution& a, const Solution& b) {
    Solution out = a;
    for (const auto& [k, v] : b) out.emplace(k, v);
    return out;
}

Term bool_term(bool v) {
    return Term::literal(v ? "true" : "false", std::string(vocab::xsd_boolean));
}

bool is_string_like(const Term& t) {
    return t.is_literal() && (t.datatype == vocab::xsd_string || t.datatype == vocab::rdf_lang_string);
}

bool ebv(const Term& t) {
    if (!t.is_literal()) throw EvalError{};
    if (t.datatype == vocab::xsd_boolean) return t.value == "true" || t.value == "1";
    if (rdf::is_numeric_datatype(t.datatype)) {
        auto n = t.as_number();
        if (!n) return false;
        return *n != 0 && !std::isnan(*n);
    }
    if (is_string_like(t)) return !t.value.empty();
    throw EvalError{};
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

Term numeric_term(double v, std::string_view dt) {
    if (dt == vocab::xsd_integer) return Term::integer(static_cast<long long>(v));
    if (dt == vocab::xsd_decimal) return Term::decimal(v);
    return Term::literal(format_double(v), std::string(vocab::xsd_double));
}

std::string_view promote(const Term& a, const Term& b) {
    auto rank = [](const std::string& dt) {
        if (dt == vocab::xsd_double || dt == std::string(vocab::xsd) + "float") return 3;
        if (dt == vocab::xsd_decimal) return 2;
        return 1;
    };
    int r = std::max(rank(a.datatype), rank(b.datatype));
    return r == 3 ? vocab::xsd_double : r == 2 ? vocab::xsd_decimal : vocab::xsd_integer;
}

class Evaluator {
public:
    explicit Evaluator(const rdf::Graph& g) : g_(g) {}

    ResultSet run(const Query& q) {
        Solutions sols = eval_group(q.where, Solutions{Solution{}});
        if (q.trailing_values) sols = join(sols, values_solutions(*q.trailing_values));
        return finish(q, std::move(sols));
    }

private:
    // --- solution modifiers ------------------------------------------------

    struct Row {
        Solution bindings;          // projected + grouped bindings
        const Solutions* group = nullptr;
    };

    ResultSet finish(const Query& q, Solutions sols) {
        bool grouped = !q.group_by.empty();
        for (const auto& p : q.projections) grouped |= p.expr && has_aggregate(*p.expr);
        for (const auto& h : q.having) grouped |= has_aggregate(h);
        for (const auto& o : q.order_by) grouped |= has_aggregate(o.expr);

        std::vector<Solutions> groups;
        std::vector<Row> rows;
        if (grouped) {
            std::map<std::vector<Binding>, std::size_t, KeyLess> index;
            std::vector<Solution> reps;
            for (auto& s : sols) {
                std::vector<Binding> key;
                Solution rep;
                for (const auto& gc : q.group_by) {
                    Binding b = try_eval(gc.expr, s, nullptr);
                    key.push_back(b);
                    if (b) {
                        if (gc.alias) rep[*gc.alias] = *b;
                        else if (gc.expr.kind == Expr::Kind::Variable) rep[gc.expr.var] = *b;
                    }
                }
                auto [it, inserted] = index.emplace(key, groups.size());
                if (inserted) {
                    groups.emplace_back();
                    reps.push_back(rep);
                }
                groups[it->second].push_back(s);
            }
            if (groups.empty() && q.group_by.empty()) {
                groups.emplace_back();
                reps.emplace_back();
            }
            for (std::size_t i = 0; i < groups.size(); ++i) rows.push_back({reps[i], &groups[i]});
            std::vector<Row> kept;
            for (auto& r : rows) {
                bool ok = true;
                for (const auto& h : q.having) {
                    auto v = try_eval(h, r.bindings, r.group);
                    try {
                        ok = ok && v && ebv(*v);
                    } catch (const EvalError&) {
                        ok = false;
                    }
                }
                if (ok) kept.push_back(std::move(r));
            }
            rows = std::move(kept);
        } else {
            for (auto& s : sols) rows.push_back({std::move(s), nullptr});
        }

        // Projection expressions extend the row so ORDER BY may reference aliases.
        for (auto& r : rows) {
            for (const auto& p : q.projections) {
                if (!p.expr) continue;
                auto v = try_eval(*p.expr, r.bindings, r.group);
                if (v) r.bindings[p.var] = *v;
            }
        }

        if (!q.order_by.empty()) {
            std::vector<std::pair<std::vector<Binding>, std::size_t>> keyed;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                std::vector<Binding> key;
                for (const auto& o : q.order_by) key.push_back(try_eval(o.expr, rows[i].bindings, rows[i].group));
                keyed.emplace_back(std::move(key), i);
            }
            std::stable_sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
                for (std::size_t k = 0; k < q.order_by.size(); ++k) {
                    int c = compare_terms(a.first[k], b.first[k]);
                    if (c != 0) return q.order_by[k].descending ? c > 0 : c < 0;
                }
                return false;
            });
            std::vector<Row> sorted;
            for (auto& [key, idx] : keyed) sorted.push_back(std::move(rows[idx]));
            rows = std::move(sorted);
        }

        ResultSet rs;
        rs.variables = q.select_all ? pattern_variables(q.where) : q.result_variables();
        std::set<std::vector<Binding>, KeyLess> seen;
        for (const auto& r : rows) {
            std::vector<Binding> out;
            for (const auto& v : rs.variables) {
                auto it = r.bindings.find(v);
                out.push_back(it == r.bindings.end() ? Binding{} : Binding{it->second});
            }
            if (q.distinct || q.reduced) {
                if (!seen.insert(out).second) continue;
            }
            rs.rows.push_back(std::move(out));
        }
        std::size_t offset = q.offset ? static_cast<std::size_t>(std::max<long long>(0, *q.offset)) : 0;
        if (offset > 0) {
            if (offset >= rs.rows.size()) rs.rows.clear();
            else rs.rows.erase(rs.rows.begin(), rs.rows.begin() + static_cast<long>(offset));
        }
        if (q.limit && rs.rows.size() > static_cast<std::size_t>(std::max<long long>(0, *q.limit)))
            rs.rows.resize(static_cast<std::size_t>(std::max<long long>(0, *q.limit)));
        return rs;
    }

    struct KeyLess {
        bool operator()(const std::vector<Binding>& a, const std::vector<Binding>& b) const {
            return a < b;
        }
    };

    // --- graph patterns ----------------------------------------------------

    Solutions eval_group(const GroupPattern& g, Solutions input) {
        std::vector<const Expr*> filters;
        std::size_t i = 0;
        Solutions cur = std::move(input);
        while (i < g.elements.size()) {
            const auto& el = g.elements[i].value;
            if (std::holds_alternative<TriplePattern>(el)) {
                std::vector<const TriplePattern*> bgp;
                while (i < g.elements.size() && std::holds_alternative<TriplePattern>(g.elements[i].value)) {
                    bgp.push_back(&std::get<TriplePattern>(g.elements[i].value));
                    ++i;
                }
                Solutions next;
                for (const auto& s : cur) eval_bgp(bgp, s, next);
                cur = std::move(next);
                continue;
            }
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, Filter>) {
                        filters.push_back(&v.expr);
                    } else if constexpr (std::is_same_v<T, OptionalPattern>) {
                        Solutions next;
                        for (const auto& s : cur) {
                            auto ext = eval_group(v.group, Solutions{s});
                            if (ext.empty()) next.push_back(s);
                            else next.insert(next.end(), ext.begin(), ext.end());
                        }
                        cur = std::move(next);
                    } else if constexpr (std::is_same_v<T, UnionPattern>) {
                        Solutions next;
                        for (const auto& s : cur) {
                            for (const auto& b : v.branches) {
                                auto ext = eval_group(b, Solutions{s});
                                next.insert(next.end(), ext.begin(), ext.end());
                            }
                        }
                        cur = std::move(next);
                    } else if constexpr (std::is_same_v<T, GroupPattern>) {
                        Solutions next;
                        for (const auto& s : cur) {
                            auto ext = eval_group(v, Solutions{s});
                            next.insert(next.end(), ext.begin(), ext.end());
                        }
                        cur = std::move(next);
                    } else if constexpr (std::is_same_v<T, MinusPattern>) {
                        auto rhs = eval_group(v.group, Solutions{Solution{}});
                        Solutions next;
                        for (const auto& s : cur) {
                            bool remove = false;
                            for (const auto& r : rhs) {
                                bool shares = false;
                                for (const auto& [k, val] : r) shares |= s.count(k) > 0;
                                if (shares && compatible(s, r)) {
                                    remove = true;
                                    break;
                                }
                            }
                            if (!remove) next.push_back(s);
                        }
                        cur = std::move(next);
                    } else if constexpr (std::is_same_v<T, Bind>) {
                        for (auto& s : cur) {
                            if (s.count(v.var)) throw Error(ErrorCode::Parse, "BIND to already-bound ?" + v.var);
                            if (auto val = try_eval(v.expr, s, nullptr)) s[v.var] = *val;
                        }
                    } else if constexpr (std::is_same_v<T, Values>) {
                        cur = join(cur, values_solutions(v));
                    } else if constexpr (std::is_same_v<T, SubSelect>) {
                        auto rs = Evaluator(g_).run(*v.query);
                        Solutions sub;
                        for (const auto& row : rs.rows) {
                            Solution s;
                            for (std::size_t k = 0; k < rs.variables.size(); ++k) {
                                if (row[k]) s[rs.variables[k]] = *row[k];
                            }
                            sub.push_back(std::move(s));
                        }
                        cur = join(cur, sub);
                    } else if constexpr (std::is_same_v<T, ServicePattern>) {
                        throw Error(ErrorCode::InvalidInput, "federated SERVICE queries are not supported");
                    }
                },
                el);
            ++i;
        }
        if (filters.empty()) return cur;
        Solutions out;
        for (auto& s : cur) {
            bool keep = true;
            for (const auto* f : filters) {
                auto v = try_eval(*f, s, nullptr);
                try {
                    keep = keep && v && ebv(*v);
                } catch (const EvalError&) {
                    keep = false;
                }
                if (!keep) break;
            }
            if (keep) out.push_back(std::move(s));
        }
        return out;
    }

    Solutions values_solutions(const Values& v) {
        Solutions out;
        for (const auto& row : v.rows) {
            Solution s;
            for (std::size_t i = 0; i < v.vars.size(); ++i) {
                if (row[i]) s[v.vars[i]] = *row[i];
            }
            out.push_back(std::move(s));
        }
        return out;
    }

    static Solutions join(const Solutions& a, const Solutions& b) {
        Solutions out;
        for (const auto& x : a) {
            for (const auto& y : b) {
                if (compatible(x, y)) out.push_back(merge(x, y));
            }
        }
        return out;
    }

    static std::optional<Term> resolve(const Node& n, const Solution& s) {
        if (auto* v = std::get_if<Var>(&n)) {
            auto it = s.find(v->name);
            if (it == s.end()) return std::nullopt;
            return it->second;
        }
        return std::get<Term>(n);
    }

    int bound_count(const TriplePattern& tp, const Solution& s) const {
        int c = 0;
        if (resolve(tp.subject, s)) c += 2;
        if (resolve(tp.object, s)) c += 2;
        if (std::holds_alternative<Path>(tp.predicate)) c += 1;
        else if (s.count(std::get<Var>(tp.predicate).name)) c += 1;
        return c;
    }

    void eval_bgp(std::vector<const TriplePattern*> remaining, const Solution& s, Solutions& out) {
        if (remaining.empty()) {
            out.push_back(s);
            return;
        }
        // Most-bound pattern first; ties keep textual order.
        std::size_t best = 0;
        int best_score = -1;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            int sc = bound_count(*remaining[i], s);
            if (sc > best_score) {
                best_score = sc;
                best = i;
            }
        }
        const TriplePattern& tp = *remaining[best];
        remaining.erase(remaining.begin() + static_cast<long>(best));
        for (auto& ext : match_pattern(tp, s)) eval_bgp(remaining, ext, out);
    }

    static bool bind_node(const Node& n, const Term& value, Solution& s) {
        if (auto* v = std::get_if<Var>(&n)) {
            auto it = s.find(v->name);
            if (it != s.end()) return it->second == value;
            s[v->name] = value;
            return true;
        }
        return std::get<Term>(n) == value;
    }

    Solutions match_pattern(const TriplePattern& tp, const Solution& s) {
        Solutions out;
        auto subj = resolve(tp.subject, s);
        auto obj = resolve(tp.object, s);
        if (auto* pv = std::get_if<Var>(&tp.predicate)) {
            std::optional<Term> pred;
            if (auto it = s.find(pv->name); it != s.end()) pred = it->second;
            std::optional<rdf::TermId> sid, pid, oid;
            if (subj && !(sid = g_.find(*subj))) return out;
            if (pred && !(pid = g_.find(*pred))) return out;
            if (obj && !(oid = g_.find(*obj))) return out;
            g_.match(sid, pid, oid, [&](const rdf::IdTriple& t) {
                Solution ext = s;
                if (!bind_node(tp.subject, g_.term(t.s), ext)) return;
                if (!bind_node(Node{*pv}, g_.term(t.p), ext)) return;
                if (!bind_node(tp.object, g_.term(t.o), ext)) return;
                out.push_back(std::move(ext));
            });
            return out;
        }
        const Path& path = std::get<Path>(tp.predicate);
        for (const auto& [a, b] : eval_path(path, subj, obj)) {
            Solution ext = s;
            if (!bind_node(tp.subject, a, ext)) continue;
            if (!bind_node(tp.object, b, ext)) continue;
            out.push_back(std::move(ext));
        }
        return out;
    }

    // --- property paths ----------------------------------------------------

    std::vector<std::pair<Term, Term>> eval_path(const Path& p, const std::optional<Term>& start,
                                                 const std::optional<Term>& end) {
        std::vector<std::pair<Term, Term>> out;
        if (start) {
            for (auto& n : forward(p, *start)) {
                if (!end || n == *end) out.emplace_back(*start, std::move(n));
            }
            return out;
        }
        if (end) {
            for (auto& n : backward(p, *end)) out.emplace_back(std::move(n), *end);
            return out;
        }
        if (p.kind == Path::Kind::Link) {
            auto pid = g_.find(Term::iri(p.iri));
            if (!pid) return out;
            g_.match(std::nullopt, pid, std::nullopt,
                     [&](const rdf::IdTriple& t) { out.emplace_back(g_.term(t.s), g_.term(t.o)); });
            return out;
        }
        std::set<rdf::TermId> nodes;
        for (const auto& t : g_.triples()) {
            nodes.insert(t.s);
            nodes.insert(t.o);
        }
        for (auto id : nodes) {
            const Term& n = g_.term(id);
            for (auto& m : forward(p, n)) out.emplace_back(n, std::move(m));
        }
        return out;
    }

    std::vector<Term> step_link(const std::string& iri, const Term& node, bool reverse) {
        std::vector<Term> out;
        auto pid = g_.find(Term::iri(iri));
        auto nid = g_.find(node);
        if (!pid || !nid) return out;
        if (reverse) {
            g_.match(std::nullopt, pid, nid, [&](const rdf::IdTriple& t) { out.push_back(g_.term(t.s)); });
        } else {
            g_.match(nid, pid, std::nullopt, [&](const rdf::IdTriple& t) { out.push_back(g_.term(t.o)); });
        }
        return out;
    }

    std::vector<Term> closure(const Path& inner, const Term& node, bool include_self, bool reverse) {
        std::vector<Term> out;
        std::set<Term> seen;
        std::deque<Term> queue;
        if (include_self) {
            seen.insert(node);
            out.push_back(node);
        }
        queue.push_back(node);
        while (!queue.empty()) {
            Term n = queue.front();
            queue.pop_front();
            for (auto& m : reverse ? backward(inner, n) : forward(inner, n)) {
                if (seen.insert(m).second) {
                    out.push_back(m);
                    queue.push_back(m);
                }
            }
        }
        return out;
    }

    std::vector<Term> negated(const Path& p, const Term& node, bool reverse) {
        std::set<std::string> fwd, inv;
        for (const auto& item : p.parts) {
            if (item.kind == Path::Kind::Inverse) inv.insert(item.parts[0].iri);
            else fwd.insert(item.iri);
        }
        std::vector<Term> out;
        auto nid = g_.find(node);
        if (!nid) return out;
        bool want_fwd = !fwd.empty() || inv.empty();
        // Forward members walk subject->object; inverse members object->subject.
        if (want_fwd) {
            auto s = reverse ? std::nullopt : std::optional<rdf::TermId>(nid);
            auto o = reverse ? std::optional<rdf::TermId>(nid) : std::nullopt;
            g_.match(s, std::nullopt, o, [&](const rdf::IdTriple& t) {
                if (fwd.count(g_.term(t.p).value)) return;
                out.push_back(g_.term(reverse ? t.s : t.o));
            });
        }
        if (!inv.empty()) {
            auto s = reverse ? std::optional<rdf::TermId>(nid) : std::nullopt;
            auto o = reverse ? std::nullopt : std::optional<rdf::TermId>(nid);
            g_.match(s, std::nullopt, o, [&](const rdf::IdTriple& t) {
                if (inv.count(g_.term(t.p).value)) return;
                out.push_back(g_.term(reverse ? t.o : t.s));
            });
        }
        return out;
    }

    std::vector<Term> forward(const Path& p, const Term& node) { return walk(p, node, false); }
    std::vector<Term> backward(const Path& p, const Term& node) { return walk(p, node, true); }

    std::vector<Term> walk(const Path& p, const Term& node, bool reverse) {
        switch (p.kind) {
            case Path::Kind::Link: return step_link(p.iri, node, reverse);
            case Path::Kind::Inverse: return walk(p.parts[0], node, !reverse);
            case Path::Kind::Sequence: {
                std::vector<Term> frontier{node};
                auto apply = [&](const Path& part) {
                    std::vector<Term> next;
                    for (const auto& n : frontier) {
                        auto r = walk(part, n, reverse);
                        next.insert(next.end(), r.begin(), r.end());
                    }
                    frontier = std::move(next);
                };
                if (reverse) {
                    for (auto it = p.parts.rbegin(); it != p.parts.rend(); ++it) apply(*it);
                } else {
                    for (const auto& part : p.parts) apply(part);
                }
                return frontier;
            }
            case Path::Kind::Alternative: {
                std::vector<Term> out;
                for (const auto& part : p.parts) {
                    auto r = walk(part, node, reverse);
                    out.insert(out.end(), r.begin(), r.end());
                }
                return out;
            }
            case Path::Kind::ZeroOrMore: return closure(p.parts[0], node, true, reverse);
            case Path::Kind::OneOrMore: return closure(p.parts[0], node, false, reverse);
            case Path::Kind::ZeroOrOne: {
                std::vector<Term> out{node};
                for (auto& m : walk(p.parts[0], node, reverse)) {
                    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(std::move(m));
                }
                return out;
            }
            case Path::Kind::Negated: return negated(p, node, reverse);
        }
        return {};
    }

    // --- expressions -------------------------------------------------------

    std::optional<Term> try_eval(const Expr& e, const Solution& s, const Solutions* group) {
        try {
            return eval(e, s, group);
        } catch (const EvalError&) {
            return std::nullopt;
        }
    }

    Term eval(const Expr& e, const Solution& s, const Solutions* group) {
        switch (e.kind) {
            case Expr::Kind::Variable: {
                auto it = s.find(e.var);
                if (it == s.end()) throw EvalError{};
                return it->second;
            }
            case Expr::Kind::Constant: return e.value;
            case Expr::Kind::Unary: return eval_unary(e, s, group);
            case Expr::Kind::Binary: return eval_binary(e, s, group);
            case Expr::Kind::Call: return eval_call(e, s, group);
            case Expr::Kind::Aggregate: return eval_aggregate(e, group);
            case Expr::Kind::Exists:
            case Expr::Kind::NotExists: {
                bool found = !eval_group(*e.pattern, Solutions{s}).empty();
                return bool_term(e.kind == Expr::Kind::Exists ? found : !found);
            }
            case Expr::Kind::In:
            case Expr::Kind::NotIn: {
                Term lhs = eval(e.args[0], s, group);
                bool found = false;
                for (std::size_t i = 1; i < e.args.size() && !found; ++i) {
                    auto rhs = try_eval(e.args[i], s, group);
                    if (rhs && equal_terms(lhs, *rhs)) found = true;
                }
                return bool_term(e.kind == Expr::Kind::In ? found : !found);
            }
        }
        throw EvalError{};
    }

    Term eval_unary(const Expr& e, const Solution& s, const Solutions* group) {
        Term v = eval(e.args[0], s, group);
        if (e.op == "!") return bool_term(!ebv(v));
        auto n = v.is_numeric() ? v.as_number() : std::nullopt;
        if (!n) throw EvalError{};
        if (e.op == "-") return numeric_term(-*n, v.datatype == vocab::xsd_integer ? vocab::xsd_integer
                                                                                    : std::string_view(v.datatype));
        return v;
    }

    static bool equal_terms(const Term& a, const Term& b) {
        if (a.is_numeric() && b.is_numeric()) return *a.as_number() == *b.as_number();
        return a == b;
    }

    Term eval_binary(const Expr& e, const Solution& s, const Solutions* group) {
        const auto& op = e.op;
        if (op == "||") {
            auto l = try_eval(e.args[0], s, group);
            std::optional<bool> lb;
            try {
                if (l) lb = ebv(*l);
            } catch (const EvalError&) {
            }
            if (lb && *lb) return bool_term(true);
            auto r = try_eval(e.args[1], s, group);
            std::optional<bool> rb;
            try {
                if (r) rb = ebv(*r);
            } catch (const EvalError&) {
            }
            if (rb && *rb) return bool_term(true);
            if (lb && rb) return bool_term(false);
            throw EvalError{};
        }
        if (op == "&&") {
            auto l = try_eval(e.args[0], s, group);
            std::optional<bool> lb;
            try {
                if (l) lb = ebv(*l);
            } catch (const EvalError&) {
            }
            if (lb && !*lb) return bool_term(false);
            auto r = try_eval(e.args[1], s, group);
            std::optional<bool> rb;
            try {
                if (r) rb = ebv(*r);
            } catch (const EvalError&) {
            }
            if (rb && !*rb) return bool_term(false);
            if (lb && rb) return bool_term(true);
            throw EvalError{};
        }
        Term l = eval(e.args[0], s, group);
        Term r = eval(e.args[1], s, group);
        if (op == "+" || op == "-" || op == "*" || op == "/") {
            if (!l.is_numeric() || !r.is_numeric()) throw EvalError{};
            double a = *l.as_number(), b = *r.as_number();
            auto dt = promote(l, r);
            if (op == "+") return numeric_term(a + b, dt);
            if (op == "-") return numeric_term(a - b, dt);
            if (op == "*") return numeric_term(a * b, dt);
            if (b == 0 && dt != vocab::xsd_double) throw EvalError{};
            return numeric_term(a / b, dt == vocab::xsd_integer ? vocab::xsd_decimal : dt);
        }
        if (op == "=" || op == "!=") {
            bool eq;
            if (l.is_numeric() && r.is_numeric()) {
                eq = *l.as_number() == *r.as_number();
            } else if (l.is_literal() && r.is_literal() && l.datatype != r.datatype &&
                       !(is_string_like(l) && is_string_like(r))) {
                if (l.value == r.value && l.datatype == r.datatype) eq = true;
                else throw EvalError{};
            } else {
                eq = l == r;
            }
            return bool_term(op == "=" ? eq : !eq);
        }
        int c;
        if (l.is_numeric() && r.is_numeric()) {
            double a = *l.as_number(), b = *r.as_number();
            c = a < b ? -1 : a > b ? 1 : 0;
        } else if (is_string_like(l) && is_string_like(r)) {
            c = l.value.compare(r.value);
        } else if (l.is_literal() && r.is_literal() && l.datatype == r.datatype) {
            c = l.value.compare(r.value);
        } else {
            throw EvalError{};
        }
        if (op == "<") return bool_term(c < 0);
        if (op == ">") return bool_term(c > 0);
        if (op == "<=") return bool_term(c <= 0);
        if (op == ">=") return bool_term(c >= 0);
        throw EvalError{};
    }

    static const Term& string_arg(const Term& t) {
        if (!t.is_literal()) throw EvalError{};
        return t;
    }

    Term eval_call(const Expr& e, const Solution& s, const Solutions* group) {
        const auto& f = e.op;
        auto arg = [&](std::size_t i) -> Term {
            if (i >= e.args.size()) throw EvalError{};
            return eval(e.args[i], s, group);
        };
        if (f == "BOUND") {
            if (e.args.empty() || e.args[0].kind != Expr::Kind::Variable) throw EvalError{};
            return bool_term(s.count(e.args[0].var) > 0);
        }
        if (f == "IF") return ebv(arg(0)) ? arg(1) : arg(2);
        if (f == "COALESCE") {
            for (const auto& a : e.args) {
                if (auto v = try_eval(a, s, group)) return *v;
            }
            throw EvalError{};
        }
        if (f == "STR") {
            Term v = arg(0);
            if (v.is_blank()) throw EvalError{};
            return Term::literal(v.value);
        }
        if (f == "LANG") return Term::literal(string_arg(arg(0)).lang);
        if (f == "DATATYPE") {
            Term v = arg(0);
            if (!v.is_literal()) throw EvalError{};
            return Term::iri(v.datatype);
        }
        if (f == "IRI" || f == "URI") return Term::iri(arg(0).value);
        if (f == "ISIRI" || f == "ISURI") return bool_term(arg(0).is_iri());
        if (f == "ISBLANK") return bool_term(arg(0).is_blank());
        if (f == "ISLITERAL") return bool_term(arg(0).is_literal());
        if (f == "ISNUMERIC") return bool_term(arg(0).is_numeric());
        if (f == "SAMETERM") return bool_term(arg(0) == arg(1));
        if (f == "STRLEN") return Term::integer(static_cast<long long>(utf8_length(string_arg(arg(0)).value)));
        if (f == "UCASE" || f == "LCASE") {
            Term v = string_arg(arg(0));
            std::string out = v.value;
            for (char& c : out) {
                c = static_cast<char>(f == "UCASE" ? std::toupper(static_cast<unsigned char>(c))
                                                   : std::tolower(static_cast<unsigned char>(c)));
            }
            return Term::literal(out, v.lang.empty() ? v.datatype : std::string(), v.lang);
        }
        if (f == "CONTAINS") return bool_term(string_arg(arg(0)).value.find(string_arg(arg(1)).value) != std::string::npos);
        if (f == "STRSTARTS") return bool_term(string_arg(arg(0)).value.rfind(string_arg(arg(1)).value, 0) == 0);
        if (f == "STRENDS") {
            const auto a = string_arg(arg(0)).value, b = string_arg(arg(1)).value;
            return bool_term(a.size() >= b.size() && a.compare(a.size() - b.size(), b.size(), b) == 0);
        }
        if (f == "STRBEFORE" || f == "STRAFTER") {
            const auto a = string_arg(arg(0)).value, b = string_arg(arg(1)).value;
            auto pos = a.find(b);
            if (pos == std::string::npos) return Term::literal("");
            return Term::literal(f == "STRBEFORE" ? a.substr(0, pos) : a.substr(pos + b.size()));
        }
        if (f == "CONCAT") {
            std::string out;
            for (std::size_t i = 0; i < e.args.size(); ++i) out += string_arg(arg(i)).value;
            return Term::literal(out);
        }
        if (f == "SUBSTR") {
            const auto str = string_arg(arg(0)).value;
            auto start_n = arg(1).as_number();
            if (!start_n) throw EvalError{};
            long long start = static_cast<long long>(std::llround(*start_n)) - 1;
            long long len = static_cast<long long>(str.size());
            if (e.args.size() > 2) {
                auto l = arg(2).as_number();
                if (!l) throw EvalError{};
                len = static_cast<long long>(std::llround(*l));
            }
            long long b = std::max<long long>(0, start);
            long long end = std::min<long long>(static_cast<long long>(str.size()), start + len);
            if (end <= b) return Term::literal("");
            return Term::literal(str.substr(static_cast<std::size_t>(b), static_cast<std::size_t>(end - b)));
        }
        if (f == "REGEX" || f == "REPLACE") {
            const auto str = string_arg(arg(0)).value;
            const auto pattern = string_arg(arg(1)).value;
            std::string flags;
            std::size_t flag_idx = f == "REGEX" ? 2 : 3;
            if (e.args.size() > flag_idx) flags = string_arg(arg(flag_idx)).value;
            auto opts = std::regex::ECMAScript;
            if (flags.find('i') != std::string::npos) opts |= std::regex::icase;
            try {
                std::regex re(pattern, opts);
                if (f == "REGEX") return bool_term(std::regex_search(str, re));
                auto repl = string_arg(arg(2)).value;
                return Term::literal(std::regex_replace(str, re, repl));
            } catch (const std::regex_error&) {
                throw EvalError{};
            }
        }
        if (f == "LANGMATCHES") {
            auto tag = text::lower(string_arg(arg(0)).value);
            auto range = text::lower(string_arg(arg(1)).value);
            if (range == "*") return bool_term(!tag.empty());
            return bool_term(tag == range || tag.rfind(range + "-", 0) == 0);
        }
        if (f == "ENCODE_FOR_URI") return Term::literal(text::percent_encode(string_arg(arg(0)).value));
        if (f == "ABS" || f == "CEIL" || f == "FLOOR" || f == "ROUND") {
            Term v = arg(0);
            if (!v.is_numeric()) throw EvalError{};
            double n = *v.as_number();
            double r = f == "ABS" ? std::fabs(n) : f == "CEIL" ? std::ceil(n) : f == "FLOOR" ? std::floor(n)
                                                                                             : std::floor(n + 0.5);
            return numeric_term(r, v.datatype == vocab::xsd_integer ? vocab::xsd_integer
                                                                    : std::string_view(v.datatype));
        }
        if (f == "STRDT") return Term::literal(string_arg(arg(0)).value, arg(1).value);
        if (f == "STRLANG") return Term::literal(string_arg(arg(0)).value, {}, string_arg(arg(1)).value);
        // XSD constructor casts.
        if (f.rfind(vocab::xsd, 0) == 0) {
            Term v = arg(0);
            auto local = f.substr(vocab::xsd.size());
            if (local == "string") return Term::literal(v.value);
            if (local == "integer" || local == "int" || local == "long") {
                auto n = v.as_number();
                if (!n) throw EvalError{};
                return Term::integer(static_cast<long long>(*n));
            }
            if (local == "decimal" || local == "double" || local == "float") {
                auto n = v.as_number();
                if (!n) throw EvalError{};
                return numeric_term(*n, local == "decimal" ? vocab::xsd_decimal : vocab::xsd_double);
            }
            if (local == "boolean") return bool_term(ebv(v));
        }
        throw EvalError{};
    }

    static std::size_t utf8_length(const std::string& s) {
        std::size_t n = 0;
        for (unsigned char c : s) n += (c & 0xC0) != 0x80;
        return n;
    }

    Term eval_aggregate(const Expr& e, const Solutions* group) {
        if (!group) throw EvalError{};
        std::vector<Term> values;
        if (e.star) {
            if (!e.distinct) return Term::integer(static_cast<long long>(group->size()));
            std::set<Solution> uniq(group->begin(), group->end());
            return Term::integer(static_cast<long long>(uniq.size()));
        }
        for (const auto& s : *group) {
            if (auto v = try_eval(e.args[0], s, nullptr)) values.push_back(*v);
        }
        if (e.distinct) {
            std::vector<Term> uniq;
            std::set<Term> seen;
            for (auto& v : values) {
                if (seen.insert(v).second) uniq.push_back(v);
            }
            values = std::move(uniq);
        }
        if (e.op == "COUNT") return Term::integer(static_cast<long long>(values.size()));
        if (e.op == "SAMPLE") {
            if (values.empty()) throw EvalError{};
            return values.front();
        }
        if (e.op == "GROUP_CONCAT") {
            std::string out;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i) out += e.separator;
                out += values[i].value;
            }
            return Term::literal(out);
        }
        if (e.op == "MIN" || e.op == "MAX") {
            if (values.empty()) throw EvalError{};
            Term best = values.front();
            for (const auto& v : values) {
                int c = compare_terms(v, best);
                if ((e.op == "MIN" && c < 0) || (e.op == "MAX" && c > 0)) best = v;
            }
            return best;
        }
        if (e.op == "SUM" || e.op == "AVG") {
            if (values.empty()) return e.op == "SUM" ? Term::integer(0) : Term::integer(0);
            double sum = 0;
            std::string_view dt = vocab::xsd_integer;
            for (const auto& v : values) {
                if (!v.is_numeric()) throw EvalError{};
                sum += *v.as_number();
                dt = promote(Term::literal("0", std::string(dt)), v);
            }
            if (e.op == "SUM") return numeric_term(sum, dt);
            return numeric_term(sum / static_cast<double>(values.size()),
                                dt == vocab::xsd_integer ? vocab::xsd_decimal : dt);
        }
        throw EvalError{};
    }

    const rdf::Graph& g_;
};

}  // namespace

int compare_terms(const Binding& a, const Binding& b) {
    auto rank = [](const Binding& t) {
        if (!t) return 0;
        switch (t->kind) {
            case rdf::TermKind::Blank: return 1;
            case rdf::TermKind::Iri: return 2;
            case rdf::TermKind::Literal: return 3;
        }
        return 0;
    };
    int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    if (!a) return 0;
    if (a->is_numeric() && b->is_numeric()) {
        double x = *a->as_number(), y = *b->as_number();
        return x < y ? -1 : x > y ? 1 : 0;
    }
    int c = a->value.compare(b->value);
    if (c != 0) return c < 0 ? -1 : 1;
    c = a->datatype.compare(b->datatype);
    if (c != 0) return c < 0 ? -1 : 1;
    c = a->lang.compare(b->lang);
    return c < 0 ? -1 : c > 0 ? 1 : 0;
}

ResultSet evaluate(const Query& query, const rdf::Graph& graph) {
    return Evaluator(graph).run(query);
}

}  // namespace kgqa::sparql
