#pragma once

// Hand-built evaluation records and turn traces shared by the eval unit
// tests and the acceptance binary.

#include <string>
#include <vector>

#include "kgqa/agents/types.hpp"
#include "kgqa/eval/harness.hpp"

namespace kgqa::testing {

/// 50 records: low 20 (one excluded, 17 of the other 19 correct), medium 18
/// (15 correct), high 12 (9 correct). 41 correct among 49 included.
/// The excluded record is id "7"; it is marked correct so that counting it
/// would change the result.
inline std::vector<eval::EvalRecord> stratified_records() {
    std::vector<eval::EvalRecord> out;
    auto add = [&](eval::Complexity c, int n, int correct) {
        for (int i = 0; i < n; ++i) {
            eval::EvalRecord r;
            r.question_id = std::to_string(out.size() + 1);
            r.configuration = "full";
            r.complexity = c;
            r.latency_seconds = 2.0;
            r.usage = {1000, 200, 0.01};
            r.generated_query = "SELECT * WHERE { ?s ?p ?o }";
            r.verdict = i < correct ? eval::Verdict::Correct : eval::Verdict::Incorrect;
            r.error_type = i < correct ? eval::ErrorType::None : eval::ErrorType::T2;
            out.push_back(r);
        }
    };
    add(eval::Complexity::Low, 20, 18);  // ids 1..20; id 7 is correct and excluded
    add(eval::Complexity::Medium, 18, 15);
    add(eval::Complexity::High, 12, 9);
    return out;
}

inline std::vector<eval::Exclusion> stratified_exclusions() { return {{"7", "reference query under review"}}; }

namespace detail {
inline agents::TraceEvent ev(const std::string& agent, const std::string& kind, nlohmann::json payload,
                             const std::string& tool = "") {
    agents::TraceEvent e;
    e.agent = agent;
    e.kind = kind;
    e.tool = tool;
    e.payload = std::move(payload);
    return e;
}
}  // namespace detail

/// Validator rejects an in-scope question.
inline std::vector<agents::TraceEvent> trace_t1() {
    using namespace agents;
    return {detail::ev(kEntry, "agent_started", nlohmann::json::object()),
            detail::ev(kValidator, "verdict", {{"verdict", "Invalid"}, {"plants", nlohmann::json::array()},
                                               {"mentions", nlohmann::json::array()}})};
}

/// Entities resolved with matching kinds, but the query is wrong.
inline std::vector<agents::TraceEvent> trace_t2() {
    using namespace agents;
    return {detail::ev(kValidator, "verdict", {{"verdict", "Valid"}, {"plants", nlohmann::json::array()},
                                               {"mentions", {{{"text", "Melochia"}, {"kind", "taxon"}}}}}),
            detail::ev(kKg, "agent_started", nlohmann::json::object()),
            detail::ev(kKg, "tool_called", {{"tool", "taxon_resolver"}, {"mention_kind", "taxon"}}, "taxon_resolver"),
            detail::ev(kSparqlRunner, "query_generated", {{"query", "SELECT ..."}}, "sparql_chain")};
}

/// A mention was identified but the KG agent never ran.
inline std::vector<agents::TraceEvent> trace_t3() {
    using namespace agents;
    return {detail::ev(kValidator, "verdict", {{"verdict", "Valid"}, {"plants", nlohmann::json::array()},
                                               {"mentions", nlohmann::json::array()}}),
            detail::ev(kSupervisor, "routing_decision",
                       {{"route", "ToSparqlRunner"}, {"mentions", {{{"text", "aspidosperma"}, {"kind", "chemical_class"}}}}}),
            detail::ev(kSparqlRunner, "query_generated", {{"query", "SELECT ..."}}, "sparql_chain")};
}

/// The taxon resolver was run on a target mention.
inline std::vector<agents::TraceEvent> trace_t4() {
    using namespace agents;
    return {detail::ev(kValidator, "verdict", {{"verdict", "Valid"}, {"plants", nlohmann::json::array()},
                                               {"mentions", {{{"text", "Leishmania donovani"}, {"kind", "target"}}}}}),
            detail::ev(kKg, "agent_started", nlohmann::json::object()),
            detail::ev(kKg, "tool_called", {{"tool", "taxon_resolver"}, {"mention_kind", "target"}}, "taxon_resolver")};
}

}  // namespace kgqa::testing
