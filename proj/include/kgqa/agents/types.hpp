#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgqa/interp/files.hpp"
#include "kgqa/llm/chat.hpp"
#include "kgqa/resolvers/entity.hpp"

namespace kgqa::agents {

inline constexpr const char* kEntry = "entry";
inline constexpr const char* kValidator = "validator";
inline constexpr const char* kSupervisor = "supervisor";
inline constexpr const char* kKg = "kg";
inline constexpr const char* kSparqlRunner = "sparql_runner";
inline constexpr const char* kInterpreter = "interpreter";
inline constexpr const char* kTerminal = "terminal";

/// Tools the runtime can execute on an agent's behalf.
const std::set<std::string>& registered_tools();

/// Entity kind a resolver tool handles ("taxon", "chemical_class", "target",
/// "smiles"); empty for tools that are not resolvers.
std::string resolver_tool_kind(const std::string& tool);

/// One agent: model, prompt template and tools.
struct AgentNode {
    std::string id;
    std::string model_ref;
    std::string prompt_ref;
    std::vector<std::string> tool_refs;
};

struct GraphTopology {
    std::vector<AgentNode> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::string entry_id = kEntry;
    std::string terminal = kTerminal;

    bool has_edge(const std::string& from, const std::string& to) const;
    const AgentNode& node(const std::string& id) const;
    /// Throws Error(Config) if ids repeat, one of the six agents is missing,
    /// a tool is unregistered, or a node is unreachable from the entry.
    void validate() const;
};

GraphTopology default_topology(const std::string& model_ref);

enum class MessageKind {
    UserQuestion,
    Classification,
    ValidationVerdict,
    RoutingDirective,
    ResolvedEntities,
    QueryResultRef,
    Interpretation,
    FinalAnswer,
    Error,
};
std::string to_string(MessageKind k);
MessageKind parse_message_kind(const std::string& s);

struct AgentMessage {
    std::string sender;  // agent id or "user"
    MessageKind kind = MessageKind::UserQuestion;
    nlohmann::json body = nlohmann::json::object();
    std::vector<std::string> attachments;  // artifact names inside the session directory
    int turn = 0;

    std::string text() const { return body.value("text", ""); }
};

nlohmann::json to_json(const AgentMessage& m);
AgentMessage message_from_json(const nlohmann::json& j);

struct TraceEvent {
    std::int64_t seq = 0;
    int turn = 0;
    std::string agent;
    std::string tool;
    std::string kind;  // agent_started, llm_call, tool_called, routing, query_generated, rows_spilled, answer, ...
    std::int64_t started_ms = 0;
    std::int64_t ended_ms = 0;
    std::optional<llm::TokenUsage> usage;
    nlohmann::json payload = nlohmann::json::object();
};

nlohmann::json to_json(const TraceEvent& e);
TraceEvent event_from_json(const nlohmann::json& j);

/// The most recent query outcome, kept for follow-up questions.
struct StoredResult {
    int turn = 0;
    std::string question;
    std::string query;
    std::string status;
    std::size_t row_count = 0;
    std::string spill_artifact;  // empty when there were no rows
    std::string interpretation;
    std::vector<resolvers::ResolvedEntity> entities;
};

nlohmann::json to_json(const StoredResult& r);
StoredResult stored_result_from_json(const nlohmann::json& j);

struct UploadedFile {
    std::string artifact;  // name inside the session directory
    interp::FileSummary summary;
};

struct SessionState {
    std::string session_id;
    int turns = 0;
    std::vector<AgentMessage> history;
    std::map<std::string, UploadedFile> uploaded_files;
    std::vector<TraceEvent> trace;
    llm::UsageLedger ledger;
    std::optional<StoredResult> last_result;

    SessionState() = default;
    SessionState(const SessionState&) = delete;
    SessionState& operator=(const SessionState&) = delete;
};

nlohmann::json to_json(const SessionState& s);
void load_session(const nlohmann::json& j, SessionState& out);

/// Trace as JSON lines, one event per line.
std::string trace_jsonl(const std::vector<TraceEvent>& trace);

}  // namespace kgqa::agents
