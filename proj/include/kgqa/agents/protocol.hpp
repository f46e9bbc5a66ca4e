#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace kgqa::agents {

/// First balanced JSON object in `text` (code fences and prose around it
/// are ignored). None if no object parses.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

enum class Classification { NewKnowledge, HelpMeUnderstand };
std::string to_string(Classification c);

/// {"classification": "NewKnowledge" | "HelpMeUnderstand"}
std::optional<Classification> parse_classification(std::string_view llm_output);

/// Entity mention kinds agents may tag.
const std::set<std::string>& mention_kinds();

struct Mention {
    std::string text;
    std::string kind;  // taxon | chemical_class | target | smiles
    bool operator==(const Mention&) const = default;
    std::string key() const;
};

struct ValidatorVerdict {
    bool valid = false;
    std::string feedback;
    std::vector<std::string> plants;
    std::vector<Mention> mentions;  // entities the question names, kinds as for the supervisor
};

/// {"verdict": "Valid" | "Invalid", "feedback": "...", "plants": [...], "mentions": [{"text", "kind"}]}
std::optional<ValidatorVerdict> parse_verdict(std::string_view llm_output);

struct SupervisorDecision {
    std::vector<Mention> mentions;
    bool interpret = false;
    bool rerun = false;
    std::string answer;
    std::vector<Mention> dropped;  // unknown kinds
};

/// {"mentions": [{"text", "kind"}], "interpret": bool, "rerun": bool, "answer": "..."}
std::optional<SupervisorDecision> parse_supervisor(std::string_view llm_output);

struct KgCall {
    std::string tool;
    std::string input;
    std::string mention;
};

/// {"calls": [{"tool", "input", "mention"}]}
std::optional<std::vector<KgCall>> parse_kg_calls(std::string_view llm_output);

struct RunnerPlan {
    std::string question;
    std::string wikidata_taxon;  // empty unless a Wikidata comparison is needed
};

/// {"question": "...", "wikidata_taxon": "Q..." | null}
std::optional<RunnerPlan> parse_runner_plan(std::string_view llm_output);

enum class Route { ToKG, ToSparqlRunner, ToInterpreter, Finish };
std::string to_string(Route r);

/// Facts the router needs beyond the supervisor's decision.
struct RouteFacts {
    bool help_me_understand = false;
    std::set<std::string> attempted;  // Mention::key() of mentions already sent to the KG agent
    bool has_result = false;          // a query result is available to this turn
    bool result_has_rows = false;
    bool interpreted = false;         // interpreter already ran this turn
};

struct Directive {
    Route route = Route::Finish;
    std::vector<Mention> mentions;  // ToKG only
};

/// Deterministic routing: unresolved mentions go to the KG agent first
/// (never on follow-up turns), then the query runner until a result exists
/// (or again on explicit rerun), then the interpreter when asked and there
/// are rows, else finish.
Directive route(const SupervisorDecision& decision, const RouteFacts& facts);

}  // namespace kgqa::agents
