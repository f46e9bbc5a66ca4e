#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kgqa/rdf/term.hpp"

namespace kgqa::sparql {

struct Var {
    std::string name;
    bool operator==(const Var&) const = default;
};

/// Subject/object position: a variable or a concrete term.
using Node = std::variant<Var, rdf::Term>;

struct Path {
    enum class Kind { Link, Inverse, Sequence, Alternative, ZeroOrMore, OneOrMore, ZeroOrOne, Negated };
    Kind kind = Kind::Link;
    std::string iri;           // Link
    std::vector<Path> parts;   // everything else; Negated holds Link/Inverse(Link) items
};

struct TriplePattern {
    Node subject;
    std::variant<Var, Path> predicate;
    Node object;
};

struct Query;
struct GroupPattern;

struct Expr {
    enum class Kind { Variable, Constant, Unary, Binary, Call, Aggregate, Exists, NotExists, In, NotIn };
    Kind kind = Kind::Constant;
    std::string op;                  // operator / function / aggregate name (upper-cased for built-ins)
    std::string var;                 // Variable
    rdf::Term value;                 // Constant
    std::vector<Expr> args;
    bool distinct = false;           // Aggregate
    bool star = false;               // COUNT(*)
    std::string separator = " ";     // GROUP_CONCAT
    std::shared_ptr<GroupPattern> pattern;  // EXISTS / NOT EXISTS
};

struct Bind {
    Expr expr;
    std::string var;
};

struct Values {
    std::vector<std::string> vars;
    std::vector<std::vector<std::optional<rdf::Term>>> rows;
};

struct Element;

struct GroupPattern {
    std::vector<Element> elements;
};

struct OptionalPattern {
    GroupPattern group;
};
struct UnionPattern {
    std::vector<GroupPattern> branches;
};
struct MinusPattern {
    GroupPattern group;
};
struct Filter {
    Expr expr;
};
struct ServicePattern {
    std::string endpoint;
    bool silent = false;
    GroupPattern group;
};
struct SubSelect {
    std::shared_ptr<Query> query;
};

struct Element {
    std::variant<TriplePattern, Filter, OptionalPattern, UnionPattern, MinusPattern, Bind, Values, SubSelect,
                 GroupPattern, ServicePattern>
        value;
};

struct Projection {
    std::string var;
    std::optional<Expr> expr;
};

struct OrderCondition {
    Expr expr;
    bool descending = false;
};

struct GroupCondition {
    Expr expr;
    std::optional<std::string> alias;
};

struct Query {
    std::vector<std::pair<std::string, std::string>> prefixes;
    bool distinct = false;
    bool reduced = false;
    bool select_all = false;
    std::vector<Projection> projections;
    GroupPattern where;
    std::vector<GroupCondition> group_by;
    std::vector<Expr> having;
    std::vector<OrderCondition> order_by;
    std::optional<long long> limit;
    std::optional<long long> offset;
    std::optional<Values> trailing_values;

    /// Names of the result columns, in projection order. For SELECT * this is
    /// the in-scope variables in first-appearance order.
    std::vector<std::string> result_variables() const;
};

/// IRIs the query uses as predicates (including inside property paths) and
/// as classes (objects of rdf:type), collected for schema checks.
struct IriUsage {
    std::vector<std::string> predicates;
    std::vector<std::string> classes;
};

IriUsage collect_iri_usage(const Query& query);

/// Variables bound anywhere in the pattern, in first-appearance order.
std::vector<std::string> pattern_variables(const GroupPattern& group);

bool has_aggregate(const Expr& e);

}  // namespace kgqa::sparql
