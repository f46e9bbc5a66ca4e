#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "kgqa/agents/protocol.hpp"
#include "kgqa/agents/types.hpp"
#include "kgqa/chain/prompts.hpp"
#include "kgqa/chain/schema.hpp"
#include "kgqa/chain/store.hpp"
#include "kgqa/llm/chat.hpp"
#include "kgqa/resolvers/local.hpp"
#include "kgqa/resolvers/remote.hpp"
#include "kgqa/sparql/endpoint.hpp"

namespace kgqa::agents {

/// Shared, read-only resources the agents' tools run against. Null members
/// make the corresponding tool fail with a Config error when called.
struct Toolbox {
    const resolvers::PlantDb* plants = nullptr;
    const resolvers::ChemicalIndex* chemicals = nullptr;
    std::shared_ptr<resolvers::SmilesResolver> smiles;
    std::shared_ptr<resolvers::TargetResolver> targets;
    std::shared_ptr<resolvers::TaxonResolver> taxa;
    std::shared_ptr<sparql::Endpoint> kg;
    std::shared_ptr<sparql::Endpoint> wikidata;
    const chain::SchemaDocument* schema = nullptr;
    const chain::RefinementStore* store = nullptr;
};

inline constexpr int kDefaultStepCap = 12;

struct RuntimeConfig {
    GraphTopology topology;
    const chain::PromptLibrary* prompts = nullptr;
    Toolbox tools;
    std::filesystem::path artifact_root;
    int step_cap = kDefaultStepCap;
    std::function<std::int64_t()> clock;  // milliseconds; defaults to the steady clock
    llm::TokenCounter counter = llm::estimate_tokens;
};

using CompleteFn = std::function<llm::ChatResponse(const llm::ChatRequest&)>;
using EventSink = std::function<void(const TraceEvent&)>;

/// Executes turns over the agent graph. Stateless apart from configuration;
/// all per-session data lives in SessionState, so one Runtime serves every
/// session (callers serialize turns within a session).
class Runtime {
public:
    Runtime(RuntimeConfig config, CompleteFn complete);

    /// Runs one user turn to completion and returns the final message, which
    /// is also appended to the history. Never throws for agent or tool
    /// failures; those become an error message.
    AgentMessage run_turn(SessionState& state, const std::string& question, const EventSink& sink = {}) const;

    /// Analyzes a file already stored in the session directory and records it.
    UploadedFile register_upload(SessionState& state, const std::string& artifact, const EventSink& sink = {}) const;

    std::filesystem::path session_dir(const std::string& session_id) const;
    const RuntimeConfig& config() const { return cfg_; }

private:
    RuntimeConfig cfg_;
    CompleteFn complete_;
};

/// Text of the line that tells the user where the full output lives.
std::string spill_pointer(const std::string& artifact);

}  // namespace kgqa::agents
