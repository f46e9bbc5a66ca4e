#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/chain/prompts.hpp"
#include "kgqa/chain/sanitize.hpp"
#include "kgqa/chain/schema.hpp"
#include "kgqa/chain/store.hpp"
#include "kgqa/llm/chat.hpp"
#include "kgqa/resolvers/entity.hpp"
#include "kgqa/sparql/endpoint.hpp"

namespace kgqa::chain {

enum class AttemptStatus { OkRows, OkEmpty, SyntaxError, EndpointError };
std::string to_string(AttemptStatus s);

struct SparqlAttempt {
    int attempt_index = 1;
    std::string raw_llm_output;
    std::string sanitized_query;  // empty on syntax_error
    AttemptStatus status = AttemptStatus::SyntaxError;
    std::size_t row_count = 0;
    std::optional<std::filesystem::path> spill_path;  // set iff row_count > 0
    llm::TokenUsage usage;
    std::string error;
    std::vector<Violation> violations;
    sparql::ResultSet results;
};

nlohmann::json to_json(const SparqlAttempt& a);

struct ExecutionResult {
    AttemptStatus status = AttemptStatus::OkEmpty;
    sparql::ResultSet results;
    std::optional<std::filesystem::path> spill_path;
    std::string error;
};

/// Runs the query and writes rows (header = projected variables) to
/// `spill_path` when there are any. Endpoint failures become EndpointError.
ExecutionResult execute_query(const std::string& query, sparql::Endpoint& endpoint,
                              const std::filesystem::path& spill_path);

enum class Diagnosis { Resolved, DataAbsent, ConstructionError };
std::string to_string(Diagnosis d);

/// Compares the first (empty) attempt with its refinement. Rows in attempt
/// two mean the first query was mis-constructed; an empty second result
/// means the data is likely absent; a second attempt that failed to parse
/// or execute leaves a construction error. Throws Error(Precondition) if
/// attempt one had rows.
Diagnosis diagnose_empty(const SparqlAttempt& first, const SparqlAttempt& second);

inline constexpr const char* kDataAbsentMessage =
    "The requested data does not appear to exist in the knowledge graph: a refined query also returned no "
    "results. Errors in the query formulation may still persist.";

/// Schema terms whose local name shares a case-folded token with the text.
std::vector<std::string> related_schema_nodes(const std::string& text, const SchemaDocument& schema);

using CompleteFn = std::function<llm::ChatResponse(const llm::ChatRequest&)>;
using EventFn = std::function<void(const std::string& kind, const nlohmann::json& payload)>;

struct ChainConfig {
    std::string model;
    const PromptLibrary* prompts = nullptr;
    const SchemaDocument* schema = nullptr;
    std::shared_ptr<sparql::Endpoint> endpoint;
    const RefinementStore* store = nullptr;
    std::filesystem::path spill_path;
    CompleteFn complete;
    EventFn on_event;  // optional
};

struct ChainOutcome {
    std::vector<SparqlAttempt> attempts;
    std::optional<Diagnosis> diagnosis;

    const SparqlAttempt& last() const { return attempts.back(); }
};

/// Generation, sanitization, compliance check, execution and the single
/// refinement pass for one question. One instance per turn.
class SparqlChain {
public:
    explicit SparqlChain(ChainConfig config);

    std::string build_generation_prompt(const std::string& question,
                                        const std::vector<resolvers::ResolvedEntity>& entities) const;
    std::string build_refinement_prompt(const std::string& question, const SparqlAttempt& failed,
                                        const std::optional<Exemplar>& exemplar) const;

    /// Attempt 1: one completion, then sanitize, check and execute.
    SparqlAttempt generate(const std::string& question, const std::vector<resolvers::ResolvedEntity>& entities);
    /// Attempt 2. Allowed once, and only after an empty or unparseable attempt.
    SparqlAttempt refine(const std::string& question, const SparqlAttempt& failed);

    ChainOutcome run(const std::string& question, const std::vector<resolvers::ResolvedEntity>& entities);

    int generation_completions() const { return completions_; }

private:
    SparqlAttempt finish_attempt(int index, const llm::ChatResponse& response);
    void emit(const std::string& kind, const nlohmann::json& payload) const;

    ChainConfig cfg_;
    int completions_ = 0;
    bool refined_ = false;
};

/// Renders resolved entities for prompts; empty input gives an empty string.
std::string format_entity_block(const std::vector<resolvers::ResolvedEntity>& entities);

}  // namespace kgqa::chain
