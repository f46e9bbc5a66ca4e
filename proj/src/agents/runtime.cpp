#include "kgqa/agents/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <optional>

#include <spdlog/spdlog.h>

#include "kgqa/chain/chain.hpp"
#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"
#include "kgqa/interp/files.hpp"
#include "kgqa/interp/interpret.hpp"
#include "kgqa/wikidata/bridge.hpp"

namespace fs = std::filesystem;

namespace kgqa::agents {

std::string spill_pointer(const std::string& artifact) {
    return "The result is too large to show here; retrieve the complete output from the generated CSV file " +
           artifact + ".";
}

namespace {

std::int64_t steady_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

// Raised inside a turn when the routing step budget is spent.
struct StepCapReached {};

nlohmann::json entities_json(const std::vector<resolvers::ResolvedEntity>& entities) {
    auto arr = nlohmann::json::array();
    for (const auto& e : entities) arr.push_back(resolvers::to_json(e));
    return arr;
}

class Turn {
public:
    Turn(const RuntimeConfig& cfg, const CompleteFn& complete, SessionState& st, const EventSink& sink,
         const fs::path& dir)
        : cfg_(cfg), complete_(complete), st_(st), sink_(sink), dir_(dir) {
        if (!st_.trace.empty()) last_ms_ = st_.trace.back().ended_ms;
    }

    AgentMessage run(const std::string& question) {
        turn_ = ++st_.turns;
        question_ = question;
        add_message("user", MessageKind::UserQuestion, {{"text", question}});
        current_ = kEntry;
        started(kEntry);
        if (text::trim(question).empty()) {
            return finish_error("Please enter a question.", ErrorCode::InvalidInput, false);
        }
        try {
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec) throw Error(ErrorCode::Storage, "cannot create session directory: " + ec.message());
            return drive();
        } catch (const StepCapReached&) {
            return finish_cap();
        } catch (const Error& e) {
            return finish_error(std::string(to_string(e.code())) + ": " + e.what(), e.code(), e.retriable());
        } catch (const std::exception& e) {
            return finish_error(std::string("internal error: ") + e.what(), ErrorCode::Internal, false);
        }
    }

private:
    // ---- plumbing ----

    std::int64_t now() {
        auto t = cfg_.clock ? cfg_.clock() : steady_ms();
        last_ms_ = std::max(last_ms_, t);
        return last_ms_;
    }

    void emit(const std::string& agent, const std::string& tool, const std::string& kind, nlohmann::json payload,
              std::optional<llm::TokenUsage> usage = std::nullopt, std::optional<std::int64_t> started = {}) {
        TraceEvent e;
        e.seq = st_.trace.empty() ? 1 : st_.trace.back().seq + 1;
        e.turn = turn_;
        e.agent = agent;
        e.tool = tool;
        e.kind = kind;
        e.ended_ms = now();
        e.started_ms = started ? std::min(*started, e.ended_ms) : e.ended_ms;
        e.usage = usage;
        e.payload = std::move(payload);
        st_.trace.push_back(e);
        if (sink_) sink_(e);
    }

    void started(const std::string& agent) { emit(agent, "", "agent_started", nlohmann::json::object()); }

    void warn(const std::string& agent, const std::string& message) {
        spdlog::warn("{}: {}", agent, message);
        emit(agent, "", "warning", {{"message", message}});
    }

    AgentMessage& add_message(const std::string& sender, MessageKind kind, nlohmann::json body,
                              std::vector<std::string> attachments = {}) {
        AgentMessage m;
        m.sender = sender;
        m.kind = kind;
        m.body = std::move(body);
        m.attachments = std::move(attachments);
        m.turn = turn_;
        st_.history.push_back(std::move(m));
        return st_.history.back();
    }

    llm::ChatResponse call(const std::string& agent, const llm::ChatRequest& req) {
        auto t0 = now();
        auto res = complete_(req);
        st_.ledger.record(res.usage);
        emit(agent, "", "llm_call", {{"purpose", req.purpose}, {"model", req.model}}, res.usage, t0);
        return res;
    }

    std::string ask(const std::string& agent, const std::map<std::string, std::string>& vars) {
        const auto& node = cfg_.topology.node(agent);
        llm::ChatRequest req{node.model_ref, {{"user", cfg_.prompts->render(node.prompt_ref, vars)}}, 0.0, agent};
        return call(agent, req).text;
    }

    void move(const std::string& to) {
        if (to != kTerminal && steps_ >= cfg_.step_cap) throw StepCapReached{};
        if (!cfg_.topology.has_edge(current_, to)) {
            throw Error(ErrorCode::Internal, "no edge " + current_ + " -> " + to);
        }
        ++steps_;
        emit(current_, "", "routing", {{"from", current_}, {"to", to}, {"step", steps_}});
        current_ = to;
        if (to != kTerminal) started(to);
    }

    fs::path artifact(const std::string& suffix) const { return dir_ / (std::to_string(turn_) + "-" + suffix); }

    // ---- turn driver ----

    AgentMessage drive() {
        auto cls = classify();
        if (cls == Classification::NewKnowledge) {
            move(kValidator);
            if (auto rejection = validate()) return *rejection;
        }
        move(kSupervisor);
        for (;;) {
            auto raw = ask(kSupervisor, {{"question", question_}, {"context", supervisor_context()}});
            auto decision = parse_supervisor(raw);
            if (!decision) {
                emit(kSupervisor, "", "unroutable", {{"reason", "malformed supervisor output"}});
                answer_lead_ =
                    "Sorry, I could not decide how to proceed with this question. Please try rephrasing it.";
                move(kTerminal);
                return finish();
            }
            for (const auto& d : decision->dropped) {
                warn(kSupervisor, "dropped mention '" + d.text + "' with unknown kind '" + d.kind + "'");
            }
            RouteFacts facts;
            facts.help_me_understand = help_;
            facts.attempted = attempted_;
            const auto* res = active_result();
            facts.has_result = res != nullptr;
            facts.result_has_rows = res && res->row_count > 0;
            facts.interpreted = interpreted_;
            auto directive = route(*decision, facts);
            auto mentions = nlohmann::json::array();
            for (const auto& m : directive.mentions) mentions.push_back({{"text", m.text}, {"kind", m.kind}});
            emit(kSupervisor, "", "routing_decision", {{"route", to_string(directive.route)}, {"mentions", mentions}});
            add_message(kSupervisor, MessageKind::RoutingDirective,
                        {{"route", to_string(directive.route)}, {"mentions", mentions}});
            switch (directive.route) {
                case Route::ToKG:
                    move(kKg);
                    run_kg(directive.mentions);
                    break;
                case Route::ToSparqlRunner:
                    move(kSparqlRunner);
                    run_sparql();
                    break;
                case Route::ToInterpreter:
                    move(kInterpreter);
                    run_interpreter();
                    break;
                case Route::Finish:
                    answer_lead_ = text::trim(decision->answer);
                    move(kTerminal);
                    return finish();
            }
            move(kSupervisor);
        }
    }

    Classification classify() {
        std::string history;
        for (const auto& m : st_.history) {
            if (m.kind == MessageKind::UserQuestion && m.turn != turn_) history += "User: " + m.text() + "\n";
            if (m.kind == MessageKind::FinalAnswer && m.turn != turn_) history += "Assistant: " + m.text() + "\n";
        }
        std::string files;
        for (const auto& [name, f] : st_.uploaded_files) {
            files += name + " (" + interp::to_string(f.summary.kind) + ")\n";
        }
        auto raw = ask(kEntry, {{"question", question_},
                                {"history", history.empty() ? "(none)" : history},
                                {"files", files.empty() ? "(none)" : files}});
        auto cls = parse_classification(raw);
        if (!cls) {
            warn(kEntry, "unrecognized classification; treating the question as new");
            cls = Classification::NewKnowledge;
        }
        if (*cls == Classification::HelpMeUnderstand && !st_.last_result) {
            warn(kEntry, "follow-up without a previous result; treating the question as new");
            cls = Classification::NewKnowledge;
        }
        help_ = *cls == Classification::HelpMeUnderstand;
        nlohmann::json body{{"classification", to_string(*cls)}};
        if (help_) body["prior_result"] = to_json(*st_.last_result);
        add_message(kEntry, MessageKind::Classification, body);
        return *cls;
    }

    std::optional<AgentMessage> validate() {
        std::string inventory = cfg_.tools.schema ? cfg_.tools.schema->compact_inventory() : std::string();
        if (inventory.empty()) throw Error(ErrorCode::Config, "the validator needs a non-empty schema");
        auto raw = ask(kValidator, {{"question", question_}, {"inventory", inventory}});
        auto verdict = parse_verdict(raw);
        if (!verdict) throw Error(ErrorCode::Upstream, "validator returned no verdict", true);
        for (const auto& plant : verdict->plants) {
            plants_.push_back(plant);
            if (!cfg_.tools.plants) throw Error(ErrorCode::Config, "plant database not configured");
            auto presence = resolvers::check_plant(plant, *cfg_.tools.plants);
            bool present = presence == resolvers::PlantPresence::Present;
            emit(kValidator, "plant_db_checker", "tool_called",
                 {{"tool", "plant_db_checker"}, {"input", plant}, {"outcome", present ? "present" : "absent"}});
            if (!present && verdict->valid) {
                verdict->valid = false;
                verdict->feedback = "The plant '" + plant + "' is not present in the knowledge graph.";
            }
        }
        nlohmann::json body{{"verdict", verdict->valid ? "Valid" : "Invalid"}, {"feedback", verdict->feedback}};
        body["plants"] = plants_;
        auto mentions = nlohmann::json::array();
        for (const auto& m : verdict->mentions) mentions.push_back({{"text", m.text}, {"kind", m.kind}});
        body["mentions"] = mentions;
        add_message(kValidator, MessageKind::ValidationVerdict, body);
        emit(kValidator, "", "verdict", body);
        if (verdict->valid) return std::nullopt;
        move(kTerminal);
        std::string text = "This question cannot be answered from the knowledge graph.";
        if (!verdict->feedback.empty()) text += " " + verdict->feedback;
        return final_message(text, {{"verdict", "Invalid"}}, {});
    }

    std::string supervisor_context() const {
        std::string c = "Conversation type: " +
                        to_string(help_ ? Classification::HelpMeUnderstand : Classification::NewKnowledge) + "\n";
        if (!plants_.empty()) {
            c += "Plants checked by the validator:";
            for (const auto& p : plants_) c += " " + p + ";";
            c += "\n";
        }
        auto block = chain::format_entity_block(entities_);
        c += "Resolved entities: " + (block.empty() ? std::string("none") : "\n" + block) + "\n";
        if (!attempted_.empty()) {
            c += "Mentions already sent to the KG agent:";
            for (const auto& a : attempted_) c += " " + a + ";";
            c += "\n";
        }
        if (outcome_) {
            const auto& last = outcome_->last();
            c += "Query result this turn: status " + chain::to_string(last.status) + ", " +
                 std::to_string(last.row_count) + " rows\n";
        } else {
            c += "Query result this turn: none\n";
        }
        if (help_ && st_.last_result) {
            const auto& r = *st_.last_result;
            c += "Previous question: " + r.question + "\nPrevious result: " + std::to_string(r.row_count) +
                 " rows" + (r.spill_artifact.empty() ? std::string() : " in " + r.spill_artifact) + "\n";
            if (!r.interpretation.empty()) c += "Previous interpretation: " + r.interpretation + "\n";
        }
        c += std::string("Interpretation this turn: ") + (interpreted_ ? "done" : "not done") + "\n";
        if (!st_.uploaded_files.empty()) {
            c += "Uploaded files:";
            for (const auto& [name, f] : st_.uploaded_files) c += " " + name + ";";
            c += "\n";
        }
        return c;
    }

    // The result the interpreter and router look at: this turn's, else (on
    // follow-ups) the stored one.
    const StoredResult* active_result() const {
        if (outcome_) return &*st_.last_result;
        if (help_ && st_.last_result) return &*st_.last_result;
        return nullptr;
    }

    // ---- KG agent ----

    void run_kg(const std::vector<Mention>& mentions) {
        auto mj = nlohmann::json::array();
        for (const auto& m : mentions) mj.push_back({{"text", m.text}, {"kind", m.kind}});
        std::string tools;
        for (const auto& t : cfg_.topology.node(kKg).tool_refs) tools += t + "\n";
        auto raw = ask(kKg, {{"question", question_}, {"mentions", mj.dump()}, {"tools", tools}});
        for (const auto& m : mentions) attempted_.insert(m.key());
        auto calls = parse_kg_calls(raw);
        if (!calls) {
            notes_.push_back("The entity resolution step returned no usable tool calls.");
            emit(kKg, "", "tool_error", {{"error", "malformed tool calls"}});
            return;
        }
        std::vector<resolvers::ResolvedEntity> found;
        for (const auto& c : *calls) {
            std::string kind;
            for (const auto& m : mentions) {
                if (text::lower(text::trim(m.text)) == text::lower(text::trim(c.mention.empty() ? c.input : c.mention))) {
                    kind = m.kind;
                }
            }
            nlohmann::json payload{{"tool", c.tool}, {"input", c.input}, {"mention", c.mention}, {"mention_kind", kind}};
            auto t0 = now();
            try {
                auto res = resolve(c);
                if (res.entity) {
                    payload["outcome"] = "resolved";
                    payload["identifier"] = res.entity->identifier;
                    found.push_back(*res.entity);
                    if (found.back().surface.empty()) found.back().surface = c.input;
                } else {
                    payload["outcome"] = "no_match";
                    payload["detail"] = res.detail;
                    notes_.push_back("No match for '" + c.input + "': " + res.detail);
                }
            } catch (const Error& e) {
                payload["outcome"] = "error";
                payload["error"] = e.what();
                notes_.push_back("Resolving '" + c.input + "' with " + c.tool + " failed: " + e.what());
            }
            emit(kKg, c.tool, "tool_called", payload, std::nullopt, t0);
        }
        for (auto& e : found) {
            bool dup = std::any_of(entities_.begin(), entities_.end(), [&](const auto& x) {
                return x.identifier == e.identifier && x.kind == e.kind;
            });
            if (!dup) entities_.push_back(e);
        }
        add_message(kKg, MessageKind::ResolvedEntities, {{"entities", entities_json(found)}});
    }

    resolvers::Resolution resolve(const KgCall& c) const {
        const auto& allowed = cfg_.topology.node(kKg).tool_refs;
        if (std::find(allowed.begin(), allowed.end(), c.tool) == allowed.end()) {
            throw Error(ErrorCode::InvalidInput, "tool '" + c.tool + "' is not available to the KG agent");
        }
        const auto& t = cfg_.tools;
        auto need = [&](bool ok) {
            if (!ok) throw Error(ErrorCode::Config, "tool '" + c.tool + "' is not configured");
        };
        if (c.tool == "taxon_resolver") {
            need(t.taxa != nullptr);
            return t.taxa->resolve(c.input);
        }
        if (c.tool == "chemical_resolver") {
            need(t.chemicals != nullptr);
            return resolvers::resolve_chemical_class(c.input, *t.chemicals);
        }
        if (c.tool == "target_resolver") {
            need(t.targets != nullptr);
            return t.targets->resolve(c.input);
        }
        need(t.smiles != nullptr);
        resolvers::Resolution r;
        r.entity = t.smiles->resolve(c.input);
        return r;
    }

    // ---- SPARQL runner ----

    void run_sparql() {
        auto raw = ask(kSparqlRunner, {{"question", question_}, {"entities", chain::format_entity_block(entities_)}});
        auto plan = parse_runner_plan(raw);
        if (!plan) {
            warn(kSparqlRunner, "malformed runner plan; using the user's question");
            plan = RunnerPlan{question_, ""};
        }
        if (!chain_) {
            if (!cfg_.tools.kg || !cfg_.tools.schema) throw Error(ErrorCode::Config, "knowledge graph not configured");
            chain::ChainConfig cc;
            cc.model = cfg_.topology.node(kSparqlRunner).model_ref;
            cc.prompts = cfg_.prompts;
            cc.schema = cfg_.tools.schema;
            cc.endpoint = cfg_.tools.kg;
            cc.store = cfg_.tools.store;
            cc.spill_path = artifact("results.csv");
            cc.complete = [this](const llm::ChatRequest& r) { return call(kSparqlRunner, r); };
            cc.on_event = [this](const std::string& kind, const nlohmann::json& p) {
                emit(kSparqlRunner, "sparql_chain", kind, p);
            };
            chain_.emplace(std::move(cc));
        }
        std::error_code ec;
        fs::remove(artifact("results.csv"), ec);
        chain::ChainOutcome out;
        out.attempts.push_back(chain_->generate(plan->question, entities_));
        const auto first = out.attempts.front().status;
        if (!refined_ && (first == chain::AttemptStatus::OkEmpty || first == chain::AttemptStatus::SyntaxError)) {
            refined_ = true;
            out.attempts.push_back(chain_->refine(plan->question, out.attempts.front()));
            out.diagnosis = chain::diagnose_empty(out.attempts[0], out.attempts[1]);
            emit(kSparqlRunner, "sparql_chain", "diagnosis", {{"diagnosis", chain::to_string(*out.diagnosis)}});
        }
        const auto& last = out.last();
        StoredResult stored;
        stored.turn = turn_;
        stored.question = question_;
        stored.query = last.sanitized_query;
        stored.status = chain::to_string(last.status);
        stored.row_count = last.row_count;
        if (last.spill_path) stored.spill_artifact = last.spill_path->filename().string();
        stored.entities = entities_;
        st_.last_result = stored;
        outcome_ = std::move(out);

        std::vector<std::string> attachments;
        if (!stored.spill_artifact.empty()) attachments.push_back(stored.spill_artifact);
        if (!plan->wikidata_taxon.empty()) compare_with_wikidata(plan->wikidata_taxon, attachments);
        add_message(kSparqlRunner, MessageKind::QueryResultRef,
                    {{"query", stored.query}, {"status", stored.status}, {"row_count", stored.row_count}}, attachments);
    }

    void compare_with_wikidata(const std::string& taxon, std::vector<std::string>& attachments) {
        wikidata_artifact_.clear();
        merged_artifact_.clear();
        auto t0 = now();
        try {
            if (!cfg_.tools.wikidata) throw Error(ErrorCode::Config, "Wikidata endpoint not configured");
            auto list = wikidata::genus_compounds(taxon, *cfg_.tools.wikidata, artifact("wikidata.csv"));
            emit(kSparqlRunner, "wikidata_structure_search", "tool_called",
                 {{"tool", "wikidata_structure_search"}, {"input", taxon}, {"outcome", list ? "ok" : "none"},
                  {"count", list ? list->ids.size() : 0}},
                 std::nullopt, t0);
            if (!list) {
                notes_.push_back("Wikidata lists no compounds for the genus of " + taxon + ".");
                return;
            }
            wikidata_artifact_ = list->spill_path.filename().string();
            attachments.push_back(wikidata_artifact_);
            if (st_.last_result && !st_.last_result->spill_artifact.empty()) {
                auto merged = wikidata::merge_outputs(dir_ / st_.last_result->spill_artifact, list->spill_path,
                                                      artifact("merged.csv"));
                merged_artifact_ = merged.filename().string();
                attachments.push_back(merged_artifact_);
                emit(kSparqlRunner, "output_merger", "tool_called",
                     {{"tool", "output_merger"}, {"outcome", "ok"}, {"artifact", merged_artifact_}});
            }
        } catch (const Error& e) {
            emit(kSparqlRunner, "wikidata_structure_search", "tool_called",
                 {{"tool", "wikidata_structure_search"}, {"input", taxon}, {"outcome", "error"}, {"error", e.what()}},
                 std::nullopt, t0);
            notes_.push_back(std::string("The Wikidata comparison failed: ") + e.what());
        }
    }

    // ---- interpreter ----

    void run_interpreter() {
        interpreted_ = true;
        const auto* res = active_result();
        if (!res || res->spill_artifact.empty()) {
            notes_.push_back("There are no results to interpret.");
            return;
        }
        const auto spill = dir_ / res->spill_artifact;
        const auto& model = cfg_.topology.node(kInterpreter).model_ref;
        auto t0 = now();
        auto summary = interp::summarize_results(
            spill, question_, res->query, *cfg_.prompts, model,
            [this](const llm::ChatRequest& r) { return call(kInterpreter, r); }, cfg_.counter);
        emit(kInterpreter, "interpreter", "tool_called",
             {{"tool", "interpreter"}, {"outcome", "ok"}, {"rows_inlined", summary.rows_inlined}}, std::nullopt, t0);
        interpretation_ = summary.text;
        st_.last_result->interpretation = summary.text;

        std::vector<std::string> attachments;
        if (interp::wants_chart(question_)) {
            try {
                auto spec = interp::make_chart_spec(spill, question_, artifact("chart.json"));
                chart_artifact_ = artifact("chart.json").filename().string();
                attachments.push_back(chart_artifact_);
                emit(kInterpreter, "interpreter", "chart_written",
                     {{"artifact", chart_artifact_}, {"chart_type", interp::to_string(spec.chart_type)}});
            } catch (const Error& e) {
                notes_.push_back(std::string("No chart was produced: ") + e.what());
            }
        }
        if (text::contains_ci(question_, "spectrum") || text::contains_ci(question_, "spectra")) {
            std::string input = spill.string();
            auto pos = question_.find("mzspec:");
            if (pos != std::string::npos) {
                auto end = question_.find_first_of(" \t\n\"'", pos);
                input = question_.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
            }
            try {
                spectrum_link_ = interp::spectrum_url(input);
                emit(kInterpreter, "spectrum_plotter", "tool_called",
                     {{"tool", "spectrum_plotter"}, {"outcome", "ok"}, {"url", spectrum_link_}});
            } catch (const Error& e) {
                emit(kInterpreter, "spectrum_plotter", "tool_called",
                     {{"tool", "spectrum_plotter"}, {"outcome", "error"}, {"error", e.what()}});
                notes_.push_back(std::string("No spectrum link was produced: ") + e.what());
            }
        }
        add_message(kInterpreter, MessageKind::Interpretation, {{"text", interpretation_}}, attachments);
    }

    // ---- final answer ----

    std::string result_lines() const {
        const auto& last = outcome_->last();
        switch (last.status) {
            case chain::AttemptStatus::OkRows: {
                const auto& rs = last.results;
                if (rs.size() == 1 && rs.variables.size() == 1) {
                    const auto& cell = rs.rows.front().front();
                    return "Result: " + rs.variables.front() + " = " + (cell ? cell->value : std::string());
                }
                const auto artifact_name = last.spill_path->filename().string();
                const auto rows_text = text::read_file(*last.spill_path);
                if (llm::within_result_budget(last.sanitized_query, question_, rows_text, cfg_.counter)) {
                    return "Result (" + std::to_string(rs.size()) + " rows, also saved as " + artifact_name +
                           "):\n" + rows_text;
                }
                return "The query returned " + std::to_string(rs.size()) + " rows. " + spill_pointer(artifact_name);
            }
            case chain::AttemptStatus::OkEmpty:
                if (outcome_->diagnosis == chain::Diagnosis::DataAbsent) return chain::kDataAbsentMessage;
                return "The query returned no results.";
            case chain::AttemptStatus::SyntaxError:
                return "A valid SPARQL query could not be produced: " + last.error;
            case chain::AttemptStatus::EndpointError:
                return "The knowledge graph endpoint reported an error: " + last.error;
        }
        return {};
    }

    AgentMessage finish() {
        std::vector<std::string> parts;
        std::vector<std::string> attachments;
        if (!answer_lead_.empty()) parts.push_back(answer_lead_);
        if (!entities_.empty()) {
            std::string s = "Resolved entities:";
            for (const auto& e : entities_) {
                s += "\n- " + e.surface + " (" + resolvers::to_string(e.kind) + "): " + e.identifier;
            }
            parts.push_back(s);
        }
        if (outcome_) {
            parts.push_back(result_lines());
            if (!st_.last_result->spill_artifact.empty()) attachments.push_back(st_.last_result->spill_artifact);
        }
        for (const auto& n : notes_) parts.push_back(n);
        if (!interpretation_.empty()) parts.push_back(interpretation_);
        if (!chart_artifact_.empty()) {
            parts.push_back("Chart specification: " + chart_artifact_);
            attachments.push_back(chart_artifact_);
        }
        if (!spectrum_link_.empty()) parts.push_back("Spectrum viewer: " + spectrum_link_);
        if (!wikidata_artifact_.empty()) {
            parts.push_back("Wikidata compounds for the genus: " + wikidata_artifact_);
            attachments.push_back(wikidata_artifact_);
        }
        if (!merged_artifact_.empty()) {
            parts.push_back("Compounds shared with Wikidata: " + merged_artifact_);
            attachments.push_back(merged_artifact_);
        }
        nlohmann::json extra = nlohmann::json::object();
        if (outcome_ && !outcome_->last().sanitized_query.empty()) {
            const auto& q = outcome_->last().sanitized_query;
            parts.push_back("Here is the generated SPARQL query used:\n```sparql\n" + q + "\n```");
            extra["query"] = q;
        }
        if (parts.empty()) parts.push_back("I have no further information for this question.");
        std::string text;
        for (const auto& p : parts) text += (text.empty() ? "" : "\n\n") + p;
        return final_message(text, extra, attachments);
    }

    AgentMessage finish_cap() {
        emit(current_, "", "step_cap", {{"steps", steps_}, {"cap", cfg_.step_cap}});
        current_ = kTerminal;
        return final_message("Stopped after " + std::to_string(steps_) +
                                 " routing steps without reaching an answer. Please rephrase or narrow the question.",
                             {{"diagnostic", "step_cap"}}, {});
    }

    AgentMessage finish_error(const std::string& message, ErrorCode code, bool retriable) {
        spdlog::error("turn {} of session {}: {}", turn_, st_.session_id, message);
        nlohmann::json body{{"text", message}, {"code", std::string(to_string(code))}, {"retriable", retriable}};
        emit(current_, "", "error", body);
        auto& m = add_message(kTerminal, MessageKind::Error, body);
        AgentMessage copy = m;
        close(copy);
        return copy;
    }

    AgentMessage final_message(const std::string& text, nlohmann::json extra, std::vector<std::string> attachments) {
        nlohmann::json body = std::move(extra);
        body["text"] = text;
        auto& m = add_message(kTerminal, MessageKind::FinalAnswer, body, std::move(attachments));
        AgentMessage copy = m;
        close(copy);
        return copy;
    }

    void close(const AgentMessage& m) {
        auto totals = st_.ledger.totals();
        emit(kTerminal, "", "ledger",
             {{"calls", st_.ledger.calls()},
              {"prompt_tokens", totals.prompt_tokens},
              {"completion_tokens", totals.completion_tokens},
              {"estimated_cost", totals.estimated_cost}});
        emit(kTerminal, "", "answer", to_json(m));
    }

    const RuntimeConfig& cfg_;
    const CompleteFn& complete_;
    SessionState& st_;
    const EventSink& sink_;
    fs::path dir_;

    int turn_ = 0;
    std::string question_;
    std::string current_;
    int steps_ = 0;
    std::int64_t last_ms_ = 0;
    bool help_ = false;
    std::vector<std::string> plants_;
    std::vector<resolvers::ResolvedEntity> entities_;
    std::set<std::string> attempted_;
    std::vector<std::string> notes_;
    std::optional<chain::SparqlChain> chain_;
    bool refined_ = false;
    std::optional<chain::ChainOutcome> outcome_;
    bool interpreted_ = false;
    std::string interpretation_;
    std::string chart_artifact_;
    std::string spectrum_link_;
    std::string wikidata_artifact_;
    std::string merged_artifact_;
    std::string answer_lead_;
};

}  // namespace

Runtime::Runtime(RuntimeConfig config, CompleteFn complete) : cfg_(std::move(config)), complete_(std::move(complete)) {
    cfg_.topology.validate();
    if (!cfg_.prompts) throw Error(ErrorCode::Config, "runtime needs a prompt library");
    for (const auto& n : cfg_.topology.nodes) {
        if (!cfg_.prompts->has(n.prompt_ref)) {
            throw Error(ErrorCode::Config, "missing prompt template '" + n.prompt_ref + "'");
        }
    }
    for (auto ref : {"sparql_generate", "sparql_refine"}) {
        if (!cfg_.prompts->has(ref)) throw Error(ErrorCode::Config, std::string("missing prompt template '") + ref + "'");
    }
    if (!complete_) throw Error(ErrorCode::Config, "runtime needs a completion function");
}

fs::path Runtime::session_dir(const std::string& session_id) const { return cfg_.artifact_root / session_id; }

AgentMessage Runtime::run_turn(SessionState& state, const std::string& question, const EventSink& sink) const {
    Turn turn(cfg_, complete_, state, sink, session_dir(state.session_id));
    return turn.run(question);
}

UploadedFile Runtime::register_upload(SessionState& state, const std::string& artifact, const EventSink& sink) const {
    const auto dir = session_dir(state.session_id);
    auto path = interp::confine(dir, dir / artifact);
    UploadedFile f{artifact, interp::analyze_file(path, dir)};
    f.summary.path = artifact;
    state.uploaded_files[artifact] = f;
    TraceEvent e;
    e.seq = state.trace.empty() ? 1 : state.trace.back().seq + 1;
    e.turn = state.turns;
    e.agent = kEntry;
    e.tool = "file_analyzer";
    e.kind = "tool_called";
    auto t = cfg_.clock ? cfg_.clock() : steady_ms();
    if (!state.trace.empty()) t = std::max(t, state.trace.back().ended_ms);
    e.started_ms = e.ended_ms = t;
    e.payload = {{"tool", "file_analyzer"}, {"artifact", artifact}, {"summary", interp::to_json(f.summary)}};
    state.trace.push_back(e);
    if (sink) sink(e);
    return f;
}

}  // namespace kgqa::agents
