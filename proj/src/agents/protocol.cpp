#include "kgqa/agents/protocol.hpp"

#include "kgqa/core/text.hpp"

namespace kgqa::agents {

std::optional<nlohmann::json> extract_json_object(std::string_view text) {
    for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}' && --depth == 0) {
                try {
                    auto j = nlohmann::json::parse(text.substr(start, i - start + 1));
                    if (j.is_object()) return j;
                } catch (const nlohmann::json::exception&) {
                }
                break;
            }
        }
    }
    return std::nullopt;
}

std::string to_string(Classification c) {
    return c == Classification::HelpMeUnderstand ? "HelpMeUnderstand" : "NewKnowledge";
}

std::optional<Classification> parse_classification(std::string_view llm_output) {
    auto j = extract_json_object(llm_output);
    if (!j || !j->contains("classification") || !(*j)["classification"].is_string()) return std::nullopt;
    auto v = text::lower((*j)["classification"].get<std::string>());
    if (v == "newknowledge" || v == "new_knowledge") return Classification::NewKnowledge;
    if (v == "helpmeunderstand" || v == "help_me_understand") return Classification::HelpMeUnderstand;
    return std::nullopt;
}

namespace {
std::string str_field(const nlohmann::json& j, const char* key) {
    return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : std::string();
}
bool bool_field(const nlohmann::json& j, const char* key) {
    return j.contains(key) && j[key].is_boolean() && j[key].get<bool>();
}
}  // namespace

std::optional<ValidatorVerdict> parse_verdict(std::string_view llm_output) {
    auto j = extract_json_object(llm_output);
    if (!j) return std::nullopt;
    auto v = text::lower(str_field(*j, "verdict"));
    if (v != "valid" && v != "invalid") return std::nullopt;
    ValidatorVerdict out;
    out.valid = v == "valid";
    out.feedback = str_field(*j, "feedback");
    if (j->contains("plants") && (*j)["plants"].is_array()) {
        for (const auto& p : (*j)["plants"]) {
            if (p.is_string() && !text::trim(p.get<std::string>()).empty()) out.plants.push_back(p.get<std::string>());
        }
    }
    if (j->contains("mentions") && (*j)["mentions"].is_array()) {
        for (const auto& m : (*j)["mentions"]) {
            if (!m.is_object()) continue;
            Mention mention{text::trim(str_field(m, "text")), str_field(m, "kind")};
            if (!mention.text.empty() && mention_kinds().count(mention.kind)) out.mentions.push_back(mention);
        }
    }
    return out;
}

const std::set<std::string>& mention_kinds() {
    static const std::set<std::string> k{"taxon", "chemical_class", "target", "smiles"};
    return k;
}

std::string Mention::key() const { return kind + "|" + text::lower(text::trim(text)); }

std::optional<SupervisorDecision> parse_supervisor(std::string_view llm_output) {
    auto j = extract_json_object(llm_output);
    if (!j) return std::nullopt;
    SupervisorDecision d;
    if (j->contains("mentions") && (*j)["mentions"].is_array()) {
        for (const auto& m : (*j)["mentions"]) {
            if (!m.is_object()) continue;
            Mention mention{text::trim(str_field(m, "text")), str_field(m, "kind")};
            if (mention.text.empty()) continue;
            if (mention_kinds().count(mention.kind)) d.mentions.push_back(mention);
            else d.dropped.push_back(mention);
        }
    }
    d.interpret = bool_field(*j, "interpret");
    d.rerun = bool_field(*j, "rerun");
    d.answer = str_field(*j, "answer");
    return d;
}

std::optional<std::vector<KgCall>> parse_kg_calls(std::string_view llm_output) {
    auto j = extract_json_object(llm_output);
    if (!j || !j->contains("calls") || !(*j)["calls"].is_array()) return std::nullopt;
    std::vector<KgCall> out;
    for (const auto& c : (*j)["calls"]) {
        if (!c.is_object()) continue;
        out.push_back({str_field(c, "tool"), str_field(c, "input"), str_field(c, "mention")});
    }
    return out;
}

std::optional<RunnerPlan> parse_runner_plan(std::string_view llm_output) {
    auto j = extract_json_object(llm_output);
    if (!j) return std::nullopt;
    RunnerPlan p{str_field(*j, "question"), str_field(*j, "wikidata_taxon")};
    if (text::trim(p.question).empty()) return std::nullopt;
    return p;
}

std::string to_string(Route r) {
    switch (r) {
        case Route::ToKG: return "ToKG";
        case Route::ToSparqlRunner: return "ToSparqlRunner";
        case Route::ToInterpreter: return "ToInterpreter";
        case Route::Finish: return "Finish";
    }
    return "Finish";
}

Directive route(const SupervisorDecision& decision, const RouteFacts& facts) {
    if (!facts.help_me_understand) {
        std::vector<Mention> pending;
        for (const auto& m : decision.mentions) {
            if (!facts.attempted.count(m.key())) pending.push_back(m);
        }
        if (!pending.empty()) return {Route::ToKG, pending};
    }
    if (decision.rerun || !facts.has_result) return {Route::ToSparqlRunner, {}};
    if (decision.interpret && facts.result_has_rows && !facts.interpreted) return {Route::ToInterpreter, {}};
    return {Route::Finish, {}};
}

}  // namespace kgqa::agents
