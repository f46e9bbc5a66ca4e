#include "kgqa/eval/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <fmt/format.h>

#include "kgqa/agents/protocol.hpp"
#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"
#include "kgqa/sparql/parser.hpp"

namespace kgqa::eval {

std::string to_string(Complexity c) {
    switch (c) {
        case Complexity::Low: return "low";
        case Complexity::Medium: return "medium";
        case Complexity::High: return "high";
    }
    return "low";
}

std::optional<Complexity> parse_complexity(std::string_view s) {
    auto v = text::lower(text::trim(s));
    if (v == "low") return Complexity::Low;
    if (v == "medium") return Complexity::Medium;
    if (v == "high") return Complexity::High;
    return std::nullopt;
}

std::vector<EvalQuestion> load_dataset(const std::filesystem::path& csv_path) {
    const auto table = csv::read_file(csv_path);
    auto need = [&](const char* name) {
        auto idx = table.column_index(name);
        if (!idx) throw Error(ErrorCode::InvalidInput, csv_path.string() + ": missing column '" + name + "'");
        return *idx;
    };
    if (table.header.empty()) throw Error(ErrorCode::InvalidInput, csv_path.string() + ": no rows");
    const auto qi = need("question"), ri = need("reference_query"), ci = need("complexity");
    const auto id_col = table.column_index("id");
    if (table.rows.empty()) throw Error(ErrorCode::InvalidInput, csv_path.string() + ": no rows");
    std::vector<EvalQuestion> out;
    std::set<std::string> ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = csv_path.string() + " row " + std::to_string(r + 1);
        auto cell = [&](std::size_t i) { return i < row.size() ? row[i] : std::string(); };
        EvalQuestion q;
        q.id = id_col ? text::trim(cell(*id_col)) : std::to_string(r + 1);
        if (q.id.empty()) q.id = std::to_string(r + 1);
        if (!ids.insert(q.id).second) throw Error(ErrorCode::InvalidInput, where + ": duplicate id '" + q.id + "'");
        q.question = text::trim(cell(qi));
        q.reference_query = cell(ri);
        if (q.question.empty()) throw Error(ErrorCode::InvalidInput, where + ": empty question");
        auto c = parse_complexity(cell(ci));
        if (!c) throw Error(ErrorCode::InvalidInput, where + ": complexity must be low, medium or high, got '" + cell(ci) + "'");
        q.complexity = *c;
        try {
            sparql::parse_query(q.reference_query);
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidInput, where + ": reference query does not parse: " + e.what());
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Correct: return "correct";
        case Verdict::Incorrect: return "incorrect";
        case Verdict::NotGenerated: return "not_generated";
    }
    return "incorrect";
}

Verdict parse_verdict(const std::string& s) {
    if (s == "correct") return Verdict::Correct;
    if (s == "incorrect") return Verdict::Incorrect;
    if (s == "not_generated") return Verdict::NotGenerated;
    throw Error(ErrorCode::Parse, "unknown verdict '" + s + "'");
}

std::string to_string(ErrorType e) {
    switch (e) {
        case ErrorType::None: return "none";
        case ErrorType::T1: return "T1";
        case ErrorType::T2: return "T2";
        case ErrorType::T3: return "T3";
        case ErrorType::T4: return "T4";
    }
    return "none";
}

ErrorType parse_error_type(const std::string& s) {
    if (s == "none") return ErrorType::None;
    if (s == "T1") return ErrorType::T1;
    if (s == "T2") return ErrorType::T2;
    if (s == "T3") return ErrorType::T3;
    if (s == "T4") return ErrorType::T4;
    throw Error(ErrorCode::Parse, "unknown error type '" + s + "'");
}

namespace {

std::string cell_key(const sparql::Binding& b) {
    if (!b) return "U";
    const auto& t = *b;
    if (t.is_literal()) {
        if (auto n = t.as_number()) return fmt::format("N{:.12g}", *n);
        return "L" + t.value + "^^" + t.datatype + "@" + text::lower(t.lang);
    }
    return (t.is_iri() ? "I" : "B") + t.value;
}

std::multiset<std::vector<std::string>> row_keys(const sparql::ResultSet& rs, const std::vector<std::size_t>& order) {
    std::multiset<std::vector<std::string>> out;
    for (const auto& row : rs.rows) {
        std::vector<std::string> k;
        for (auto i : order) k.push_back(i < row.size() ? cell_key(row[i]) : "U");
        out.insert(std::move(k));
    }
    return out;
}

}  // namespace

bool result_sets_equal(const sparql::ResultSet& a, const sparql::ResultSet& b) {
    if (a.variables.size() != b.variables.size() || a.size() != b.size()) return false;
    const auto n = a.variables.size();
    std::vector<std::size_t> a_order(n), b_order(n);
    for (std::size_t i = 0; i < n; ++i) a_order[i] = b_order[i] = i;
    std::set<std::string> an(a.variables.begin(), a.variables.end()), bn(b.variables.begin(), b.variables.end());
    if (n > 1 && an == bn && an.size() == n) {
        for (std::size_t i = 0; i < n; ++i) {
            b_order[i] = std::find(b.variables.begin(), b.variables.end(), a.variables[i]) - b.variables.begin();
        }
    }
    return row_keys(a, a_order) == row_keys(b, b_order);
}

JudgeResult judge_answer(const std::string& question, const std::string& reference_query,
                         const std::optional<std::string>& generated_query, sparql::Endpoint& endpoint,
                         const JudgeOptions& options) {
    sparql::parse_query(reference_query);
    JudgeResult out;
    if (!generated_query || text::trim(*generated_query).empty()) {
        out.verdict = Verdict::NotGenerated;
        out.method = "none";
        out.rationale = "no query was generated";
        return out;
    }
    std::string comparison;
    bool executed = false;
    try {
        auto ref = endpoint.select(reference_query);
        auto gen = endpoint.select(*generated_query);
        executed = true;
        if (result_sets_equal(ref, gen)) {
            out.verdict = Verdict::Correct;
            out.method = "result_set";
            out.rationale = fmt::format("result sets are equal ({} rows)", ref.size());
            return out;
        }
        comparison = fmt::format("result sets differ: reference has {} rows over {} columns, generated has {} rows over {} columns",
                                 ref.size(), ref.variables.size(), gen.size(), gen.variables.size());
    } catch (const Error& e) {
        comparison = std::string("execution failed: ") + e.what();
    }
    if (!options.complete || !options.prompts) {
        out.verdict = Verdict::Incorrect;
        out.method = "result_set";
        out.rationale = comparison;
        out.manual_review = !executed;
        return out;
    }
    auto prompt = options.prompts->render("judge", {{"question", question},
                                                    {"reference_query", reference_query},
                                                    {"generated_query", *generated_query},
                                                    {"comparison", comparison}});
    auto res = options.complete(llm::ChatRequest{options.model, {{"user", prompt}}, 0.0, "judge"});
    out.method = "llm_judge";
    out.manual_review = true;
    auto j = agents::extract_json_object(res.text);
    auto v = j ? text::lower(j->value("verdict", "")) : std::string();
    out.verdict = v == "correct" ? Verdict::Correct : Verdict::Incorrect;
    out.rationale = comparison + "; judge: " + (j ? j->value("rationale", std::string()) : text::trim(res.text));
    return out;
}

ErrorType classify_error(const std::vector<agents::TraceEvent>& trace, Verdict verdict) {
    if (verdict == Verdict::Correct) return ErrorType::None;
    bool rejected = false, kg_ran = false, mismatch = false, mentioned = false;
    for (const auto& e : trace) {
        if (e.agent == agents::kValidator && e.kind == "verdict") {
            if (e.payload.value("verdict", "") == "Invalid") rejected = true;
            if (!e.payload.value("plants", nlohmann::json::array()).empty()) mentioned = true;
            if (!e.payload.value("mentions", nlohmann::json::array()).empty()) mentioned = true;
        }
        if (e.agent == agents::kSupervisor && e.kind == "routing_decision" &&
            !e.payload.value("mentions", nlohmann::json::array()).empty()) {
            mentioned = true;
        }
        if (e.agent == agents::kKg && e.kind == "agent_started") kg_ran = true;
        if (e.agent == agents::kKg && e.kind == "tool_called") {
            auto tool_kind = agents::resolver_tool_kind(e.payload.value("tool", e.tool));
            auto mention_kind = e.payload.value("mention_kind", "");
            if (!tool_kind.empty() && !mention_kind.empty() && tool_kind != mention_kind) mismatch = true;
        }
    }
    if (rejected) return ErrorType::T1;
    if (mentioned && !kg_ran) return ErrorType::T3;
    if (mismatch) return ErrorType::T4;
    if (verdict == Verdict::NotGenerated) return ErrorType::T3;
    return ErrorType::T2;
}

nlohmann::json to_json(const EvalRecord& r) {
    nlohmann::json j{{"question_id", r.question_id},
                     {"configuration", r.configuration},
                     {"complexity", to_string(r.complexity)},
                     {"generated_query", r.generated_query ? nlohmann::json(*r.generated_query) : nlohmann::json()},
                     {"verdict", to_string(r.verdict)},
                     {"error_type", to_string(r.error_type)},
                     {"latency_seconds", r.latency_seconds},
                     {"usage", llm::to_json(r.usage)},
                     {"rationale", r.rationale},
                     {"manual_review", r.manual_review}};
    return j;
}

EvalRecord record_from_json(const nlohmann::json& j) {
    EvalRecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.configuration = j.value("configuration", "");
    auto c = parse_complexity(j.value("complexity", "low"));
    if (!c) throw Error(ErrorCode::Parse, "bad complexity in record " + r.question_id);
    r.complexity = *c;
    if (j.contains("generated_query") && j["generated_query"].is_string()) r.generated_query = j["generated_query"];
    r.verdict = parse_verdict(j.at("verdict").get<std::string>());
    r.error_type = parse_error_type(j.value("error_type", "none"));
    r.latency_seconds = j.value("latency_seconds", 0.0);
    if (j.contains("usage")) r.usage = llm::usage_from_json(j["usage"]);
    r.rationale = j.value("rationale", "");
    r.manual_review = j.value("manual_review", false);
    return r;
}

namespace {

void finalize(StratumStats& s) {
    const auto included = s.total - s.excluded;
    s.accuracy = included ? 100.0 * static_cast<double>(s.correct) / static_cast<double>(included) : 0.0;
    s.accuracy_all = s.total ? 100.0 * static_cast<double>(s.correct) / static_cast<double>(s.total) : 0.0;
}

nlohmann::json stats_json(const StratumStats& s) {
    return {{"total", s.total}, {"excluded", s.excluded}, {"correct", s.correct},
            {"accuracy", s.accuracy}, {"accuracy_all", s.accuracy_all}};
}

StratumStats stats_from_json(const nlohmann::json& j) {
    StratumStats s;
    s.total = j.at("total");
    s.excluded = j.at("excluded");
    s.correct = j.at("correct");
    s.accuracy = j.at("accuracy");
    s.accuracy_all = j.at("accuracy_all");
    return s;
}

}  // namespace

EvalReport aggregate_metrics(const std::vector<EvalRecord>& records, const std::vector<Exclusion>& exclusions) {
    if (records.empty()) throw Error(ErrorCode::InvalidInput, "no evaluation records to aggregate");
    EvalReport rep;
    rep.configuration = records.front().configuration;
    std::map<std::string, std::string> excluded;
    for (const auto& e : exclusions) excluded.emplace(e.question_id, e.reason);
    for (auto c : {Complexity::Low, Complexity::Medium, Complexity::High}) rep.strata[to_string(c)] = {};
    for (auto t : {"T1", "T2", "T3", "T4"}) rep.error_counts[t] = 0;

    std::size_t included = 0;
    double latency = 0, tokens = 0, cost = 0;
    for (const auto& r : records) {
        auto& s = rep.strata[to_string(r.complexity)];
        ++s.total;
        ++rep.overall.total;
        auto it = excluded.find(r.question_id);
        if (it != excluded.end()) {
            ++s.excluded;
            ++rep.overall.excluded;
            rep.excluded.push_back({r.question_id, it->second});
            continue;
        }
        ++included;
        if (r.verdict == Verdict::Correct) {
            ++s.correct;
            ++rep.overall.correct;
        } else if (r.error_type != ErrorType::None) {
            ++rep.error_counts[to_string(r.error_type)];
        }
        latency += r.latency_seconds;
        tokens += static_cast<double>(r.usage.total());
        cost += r.usage.estimated_cost;
    }
    for (auto& [k, s] : rep.strata) finalize(s);
    finalize(rep.overall);
    if (included) {
        rep.mean_latency_seconds = latency / static_cast<double>(included);
        rep.mean_tokens = tokens / static_cast<double>(included);
        rep.mean_cost = cost / static_cast<double>(included);
    }
    return rep;
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json strata = nlohmann::json::object();
    for (const auto& [k, s] : r.strata) strata[k] = stats_json(s);
    auto excluded = nlohmann::json::array();
    for (const auto& e : r.excluded) excluded.push_back({{"question_id", e.question_id}, {"reason", e.reason}});
    return {{"configuration", r.configuration},
            {"strata", strata},
            {"overall", stats_json(r.overall)},
            {"mean_latency_seconds", r.mean_latency_seconds},
            {"mean_tokens", r.mean_tokens},
            {"mean_cost", r.mean_cost},
            {"error_counts", r.error_counts},
            {"excluded", excluded}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.configuration = j.value("configuration", "");
    for (const auto& [k, s] : j.at("strata").items()) r.strata[k] = stats_from_json(s);
    r.overall = stats_from_json(j.at("overall"));
    r.mean_latency_seconds = j.value("mean_latency_seconds", 0.0);
    r.mean_tokens = j.value("mean_tokens", 0.0);
    r.mean_cost = j.value("mean_cost", 0.0);
    r.error_counts = j.value("error_counts", std::map<std::string, std::size_t>{});
    for (const auto& e : j.value("excluded", nlohmann::json::array())) {
        r.excluded.push_back({e.at("question_id"), e.value("reason", "")});
    }
    return r;
}

std::string format_report(const EvalReport& r) {
    std::string out = fmt::format("configuration: {}\n", r.configuration);
    out += fmt::format("{:<10}{:>7}{:>10}{:>9}{:>11}{:>15}\n", "stratum", "total", "excluded", "correct",
                       "accuracy", "with excluded");
    auto line = [&](const std::string& name, const StratumStats& s) {
        out += fmt::format("{:<10}{:>7}{:>10}{:>9}{:>10.2f}%{:>14.2f}%\n", name, s.total, s.excluded, s.correct,
                           s.accuracy, s.accuracy_all);
    };
    for (auto k : {"low", "medium", "high"}) {
        if (r.strata.count(k)) line(k, r.strata.at(k));
    }
    line("overall", r.overall);
    out += fmt::format("mean latency {:.2f} s, mean tokens {:.0f}, mean cost ${:.4f}\n", r.mean_latency_seconds,
                       r.mean_tokens, r.mean_cost);
    out += "errors:";
    for (const auto& [k, v] : r.error_counts) out += fmt::format(" {}={}", k, v);
    out += "\n";
    for (const auto& e : r.excluded) out += fmt::format("excluded {}: {}\n", e.question_id, e.reason);
    return out;
}

}  // namespace kgqa::eval
