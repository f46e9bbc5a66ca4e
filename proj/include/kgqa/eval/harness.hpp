#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/agents/types.hpp"
#include "kgqa/chain/prompts.hpp"
#include "kgqa/llm/chat.hpp"
#include "kgqa/sparql/endpoint.hpp"
#include "kgqa/sparql/results.hpp"

namespace kgqa::eval {

enum class Complexity { Low, Medium, High };
std::string to_string(Complexity c);
std::optional<Complexity> parse_complexity(std::string_view s);

struct EvalQuestion {
    std::string id;
    std::string question;
    std::string reference_query;
    Complexity complexity = Complexity::Low;
};

/// CSV with question, reference_query and complexity columns (an `id`
/// column is optional; otherwise ids are 1-based row numbers). Every
/// reference query must parse. Errors name the data row.
std::vector<EvalQuestion> load_dataset(const std::filesystem::path& csv_path);

enum class Verdict { Correct, Incorrect, NotGenerated };
std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

enum class ErrorType { None, T1, T2, T3, T4 };
std::string to_string(ErrorType e);
ErrorType parse_error_type(const std::string& s);

/// Multiset equality of solution rows. Single-column results compare values
/// only; otherwise columns align by name when both sides use the same names
/// and by position when they do not. Numeric literals compare by value.
bool result_sets_equal(const sparql::ResultSet& a, const sparql::ResultSet& b);

struct JudgeResult {
    Verdict verdict = Verdict::Incorrect;
    std::string rationale;
    std::string method;  // result_set | llm_judge | none
    bool manual_review = false;
};

using CompleteFn = std::function<llm::ChatResponse(const llm::ChatRequest&)>;

/// Optional second stage. Without a completion function, differing or
/// unexecutable results are judged incorrect.
struct JudgeOptions {
    CompleteFn complete;
    const chain::PromptLibrary* prompts = nullptr;  // needs a "judge" template
    std::string model;
};

JudgeResult judge_answer(const std::string& question, const std::string& reference_query,
                         const std::optional<std::string>& generated_query, sparql::Endpoint& endpoint,
                         const JudgeOptions& options = {});

/// Failure type from a turn trace. T1: the validator rejected the question.
/// T3: an entity mention was identified but the KG agent never ran. T4: a
/// resolver ran on a mention of a different kind. Otherwise T2. A missing
/// query with no rejection counts as T3. Correct verdicts give None.
ErrorType classify_error(const std::vector<agents::TraceEvent>& trace, Verdict verdict);

struct EvalRecord {
    std::string question_id;
    std::string configuration;
    Complexity complexity = Complexity::Low;
    std::optional<std::string> generated_query;
    Verdict verdict = Verdict::NotGenerated;
    ErrorType error_type = ErrorType::None;
    double latency_seconds = 0.0;
    llm::TokenUsage usage;
    std::string rationale;
    bool manual_review = false;
};

nlohmann::json to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);

struct Exclusion {
    std::string question_id;
    std::string reason;
    bool operator==(const Exclusion&) const = default;
};

struct StratumStats {
    std::size_t total = 0;
    std::size_t excluded = 0;
    std::size_t correct = 0;          // among included records
    double accuracy = 0.0;            // percent, correct / (total - excluded)
    double accuracy_all = 0.0;        // percent, correct / total (exclusions counted as not correct)
    bool operator==(const StratumStats&) const = default;
};

struct EvalReport {
    std::string configuration;
    std::map<std::string, StratumStats> strata;  // low, medium, high
    StratumStats overall;
    double mean_latency_seconds = 0.0;
    double mean_tokens = 0.0;
    double mean_cost = 0.0;
    std::map<std::string, std::size_t> error_counts;  // T1..T4 among included records
    std::vector<Exclusion> excluded;
    bool operator==(const EvalReport&) const = default;
};

/// Pure function of its inputs. Exclusions that name no record are ignored.
/// Throws Error(InvalidInput) for an empty record list.
EvalReport aggregate_metrics(const std::vector<EvalRecord>& records, const std::vector<Exclusion>& exclusions = {});

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

/// Human-readable table of the report.
std::string format_report(const EvalReport& r);

}  // namespace kgqa::eval
