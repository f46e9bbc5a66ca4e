#include "kgqa/chain/chain.hpp"

#include <set>

#include <spdlog/spdlog.h>

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"

namespace kgqa::chain {

std::string to_string(AttemptStatus s) {
    switch (s) {
        case AttemptStatus::OkRows: return "ok_rows";
        case AttemptStatus::OkEmpty: return "ok_empty";
        case AttemptStatus::SyntaxError: return "syntax_error";
        case AttemptStatus::EndpointError: return "endpoint_error";
    }
    return "?";
}

std::string to_string(Diagnosis d) {
    switch (d) {
        case Diagnosis::Resolved: return "resolved";
        case Diagnosis::DataAbsent: return "data_absent";
        case Diagnosis::ConstructionError: return "construction_error";
    }
    return "?";
}

nlohmann::json to_json(const SparqlAttempt& a) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : a.violations) v.push_back({{"iri", x.iri}, {"role", x.role}});
    nlohmann::json j{{"attempt_index", a.attempt_index},
                     {"raw_llm_output", a.raw_llm_output},
                     {"sanitized_query", a.sanitized_query},
                     {"status", to_string(a.status)},
                     {"row_count", a.row_count},
                     {"usage", llm::to_json(a.usage)},
                     {"violations", v}};
    if (a.spill_path) j["spill_path"] = a.spill_path->string();
    if (!a.error.empty()) j["error"] = a.error;
    return j;
}

ExecutionResult execute_query(const std::string& query, sparql::Endpoint& endpoint,
                              const std::filesystem::path& spill_path) {
    ExecutionResult out;
    try {
        out.results = endpoint.select(query);
    } catch (const Error& e) {
        out.status = AttemptStatus::EndpointError;
        out.error = e.what();
        return out;
    }
    if (out.results.empty()) {
        out.status = AttemptStatus::OkEmpty;
        return out;
    }
    out.status = AttemptStatus::OkRows;
    csv::write_file(spill_path, sparql::to_csv_table(out.results));
    out.spill_path = spill_path;
    return out;
}

Diagnosis diagnose_empty(const SparqlAttempt& first, const SparqlAttempt& second) {
    if (first.row_count > 0) throw Error(ErrorCode::Precondition, "diagnose_empty: first attempt returned rows");
    if (second.row_count > 0) return Diagnosis::Resolved;
    if (second.status == AttemptStatus::OkEmpty) return Diagnosis::DataAbsent;
    return Diagnosis::ConstructionError;
}

namespace {
const std::set<std::string>& stop_tokens() {
    static const std::set<std::string> s{"has",  "is",   "of",   "the",    "a",     "an",    "in",    "with",
                                         "to",   "for",  "and",  "by",     "from",  "on",    "at",    "as",
                                         "or",   "all",  "are",  "what",   "which", "how",   "many",  "that",
                                         "this", "select", "where", "filter", "count", "distinct", "prefix",
                                         "http", "https", "www", "org",  "com", "kg"};
    return s;
}

// Plural "s" is dropped so "features" meets LCMSFeature.
std::set<std::string> fold_tokens(std::vector<std::string> tokens) {
    std::set<std::string> out;
    for (auto& t : tokens) {
        if (t.size() < 3 || stop_tokens().count(t)) continue;
        if (t.size() > 3 && t.back() == 's') t.pop_back();
        out.insert(t);
    }
    return out;
}
}  // namespace

std::vector<std::string> related_schema_nodes(const std::string& text, const SchemaDocument& schema) {
    const auto wanted = fold_tokens(text::word_tokens(text));
    std::vector<std::string> out;
    auto consider = [&](const std::string& iri) {
        for (const auto& t : fold_tokens(text::identifier_tokens(local_name(iri)))) {
            if (wanted.count(t)) {
                out.push_back(iri);
                return;
            }
        }
    };
    for (const auto& c : schema.classes) consider(c);
    for (const auto& p : schema.properties) consider(p.iri);
    return out;
}

std::string format_entity_block(const std::vector<resolvers::ResolvedEntity>& entities) {
    if (entities.empty()) return "";
    std::string out = "Resolved entities (use these identifiers verbatim):\n";
    for (const auto& e : entities) {
        std::string id = e.kind == resolvers::EntityKind::Structure ? "\"" + e.identifier + "\""
                                                                    : "<" + e.identifier + ">";
        out += "- " + e.surface + " (" + resolvers::to_string(e.kind) + "): " + id + "\n";
    }
    return out;
}

SparqlChain::SparqlChain(ChainConfig config) : cfg_(std::move(config)) {
    if (!cfg_.prompts || !cfg_.schema || !cfg_.endpoint || !cfg_.complete) {
        throw Error(ErrorCode::Config, "sparql chain needs prompts, schema, endpoint and an LLM");
    }
}

void SparqlChain::emit(const std::string& kind, const nlohmann::json& payload) const {
    if (cfg_.on_event) cfg_.on_event(kind, payload);
}

std::string SparqlChain::build_generation_prompt(const std::string& question,
                                                 const std::vector<resolvers::ResolvedEntity>& entities) const {
    return cfg_.prompts->render("sparql_generate", {{"schema", cfg_.schema->turtle_text},
                                                    {"question", question},
                                                    {"entity_block", format_entity_block(entities)}});
}

std::string SparqlChain::build_refinement_prompt(const std::string& question, const SparqlAttempt& failed,
                                                 const std::optional<Exemplar>& exemplar) const {
    std::string failed_query = failed.sanitized_query.empty() ? failed.raw_llm_output : failed.sanitized_query;
    std::string related;
    for (const auto& iri : related_schema_nodes(question + "\n" + failed_query, *cfg_.schema)) {
        related += "- " + cfg_.schema->compact_iri(iri) + "\n";
    }
    if (related.empty()) related = "(none found)\n";
    std::string outcome = failed.status == AttemptStatus::OkEmpty ? "it executed but returned no rows"
                                                                  : "it could not be parsed: " + failed.error;
    std::string example = exemplar ? "Question: " + exemplar->question + "\nQuery:\n" + exemplar->query + "\n"
                                   : "(no similar example available)\n";
    return cfg_.prompts->render("sparql_refine", {{"question", question},
                                                  {"failed_query", failed_query},
                                                  {"failure", outcome},
                                                  {"related_nodes", related},
                                                  {"inventory", cfg_.schema->compact_inventory()},
                                                  {"example", example}});
}

SparqlAttempt SparqlChain::finish_attempt(int index, const llm::ChatResponse& response) {
    SparqlAttempt a;
    a.attempt_index = index;
    a.raw_llm_output = response.text;
    a.usage = response.usage;
    auto sanitized = sanitize_query(response.text, cfg_.schema);
    if (!sanitized.ok()) {
        a.status = AttemptStatus::SyntaxError;
        a.error = sanitized.error;
        emit("query_generated", {{"attempt", index}, {"status", to_string(a.status)}, {"error", a.error}});
        return a;
    }
    a.sanitized_query = *sanitized.query;
    a.violations = validate_schema_compliance(a.sanitized_query, *cfg_.schema);
    nlohmann::json viol = nlohmann::json::array();
    for (const auto& v : a.violations) {
        spdlog::warn("query uses {} {} not declared in the schema", v.role, v.iri);
        viol.push_back({{"iri", v.iri}, {"role", v.role}});
    }
    emit("query_generated", {{"attempt", index}, {"query", a.sanitized_query}, {"violations", viol}});

    auto exec = execute_query(a.sanitized_query, *cfg_.endpoint, cfg_.spill_path);
    a.status = exec.status;
    a.error = exec.error;
    a.row_count = exec.results.size();
    a.spill_path = exec.spill_path;
    a.results = std::move(exec.results);
    nlohmann::json payload{{"attempt", index}, {"status", to_string(a.status)}, {"row_count", a.row_count}};
    if (a.spill_path) payload["spill_path"] = a.spill_path->filename().string();
    if (!a.error.empty()) payload["error"] = a.error;
    emit("rows_spilled", payload);
    return a;
}

SparqlAttempt SparqlChain::generate(const std::string& question,
                                    const std::vector<resolvers::ResolvedEntity>& entities) {
    llm::ChatRequest req{cfg_.model, {{"user", build_generation_prompt(question, entities)}}, 0.0, "sparql_generate"};
    auto response = cfg_.complete(req);
    ++completions_;
    return finish_attempt(1, response);
}

SparqlAttempt SparqlChain::refine(const std::string& question, const SparqlAttempt& failed) {
    if (refined_) throw Error(ErrorCode::Precondition, "query refinement is performed only once per turn");
    if (failed.status != AttemptStatus::OkEmpty && failed.status != AttemptStatus::SyntaxError) {
        throw Error(ErrorCode::Precondition, "refinement needs an empty or unparseable first attempt, got " +
                                                 to_string(failed.status));
    }
    refined_ = true;
    std::optional<Exemplar> exemplar;
    if (cfg_.store && !cfg_.store->empty()) {
        exemplar = cfg_.store->retrieve(question);
    } else {
        spdlog::warn("refinement store is empty; refining without an example");
        emit("warning", {{"message", "refinement store empty; refining without an example"}});
    }
    llm::ChatRequest req{cfg_.model, {{"user", build_refinement_prompt(question, failed, exemplar)}}, 0.0,
                         "sparql_refine"};
    auto response = cfg_.complete(req);
    ++completions_;
    return finish_attempt(2, response);
}

ChainOutcome SparqlChain::run(const std::string& question, const std::vector<resolvers::ResolvedEntity>& entities) {
    ChainOutcome out;
    out.attempts.push_back(generate(question, entities));
    const auto& first = out.attempts.front();
    if (first.status == AttemptStatus::OkEmpty || first.status == AttemptStatus::SyntaxError) {
        out.attempts.push_back(refine(question, first));
        out.diagnosis = diagnose_empty(out.attempts[0], out.attempts[1]);
    }
    return out;
}

}  // namespace kgqa::chain
