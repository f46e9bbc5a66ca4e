#include "kgqa/agents/types.hpp"

#include <algorithm>
#include <deque>

#include "kgqa/core/error.hpp"

namespace kgqa::agents {

const std::set<std::string>& registered_tools() {
    static const std::set<std::string> tools{"file_analyzer",   "plant_db_checker", "chemical_resolver",
                                             "smiles_resolver", "target_resolver",  "taxon_resolver",
                                             "sparql_chain",    "wikidata_structure_search",
                                             "output_merger",   "interpreter",      "spectrum_plotter"};
    return tools;
}

std::string resolver_tool_kind(const std::string& tool) {
    if (tool == "taxon_resolver") return "taxon";
    if (tool == "chemical_resolver") return "chemical_class";
    if (tool == "target_resolver") return "target";
    if (tool == "smiles_resolver") return "smiles";
    return "";
}

bool GraphTopology::has_edge(const std::string& from, const std::string& to) const {
    return std::find(edges.begin(), edges.end(), std::make_pair(from, to)) != edges.end();
}

const AgentNode& GraphTopology::node(const std::string& id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return n;
    }
    throw Error(ErrorCode::Internal, "unknown agent '" + id + "'");
}

void GraphTopology::validate() const {
    std::set<std::string> ids;
    for (const auto& n : nodes) {
        if (!ids.insert(n.id).second) throw Error(ErrorCode::Config, "duplicate agent id '" + n.id + "'");
        for (const auto& t : n.tool_refs) {
            if (!registered_tools().count(t)) {
                throw Error(ErrorCode::Config, "agent '" + n.id + "' references unknown tool '" + t + "'");
            }
        }
    }
    for (auto id : {kEntry, kValidator, kSupervisor, kKg, kSparqlRunner, kInterpreter}) {
        if (!ids.count(id)) throw Error(ErrorCode::Config, std::string("topology lacks agent '") + id + "'");
    }
    if (entry_id != kEntry) throw Error(ErrorCode::Config, "topology entry must be 'entry'");
    std::set<std::string> seen{entry_id};
    std::deque<std::string> queue{entry_id};
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (const auto& [a, b] : edges) {
            if (a == cur && seen.insert(b).second) queue.push_back(b);
        }
    }
    for (const auto& id : ids) {
        if (!seen.count(id)) throw Error(ErrorCode::Config, "agent '" + id + "' is unreachable from entry");
    }
}

GraphTopology default_topology(const std::string& model_ref) {
    GraphTopology g;
    g.nodes = {
        {kEntry, model_ref, "entry", {"file_analyzer"}},
        {kValidator, model_ref, "validator", {"plant_db_checker"}},
        {kSupervisor, model_ref, "supervisor", {}},
        {kKg, model_ref, "kg", {"chemical_resolver", "smiles_resolver", "target_resolver", "taxon_resolver"}},
        {kSparqlRunner, model_ref, "sparql_runner", {"sparql_chain", "wikidata_structure_search", "output_merger"}},
        {kInterpreter, model_ref, "interpreter", {"interpreter", "spectrum_plotter"}},
    };
    g.edges = {
        {kEntry, kValidator},          {kEntry, kSupervisor},      {kValidator, kSupervisor},
        {kValidator, kTerminal},       {kSupervisor, kKg},         {kKg, kSupervisor},
        {kSupervisor, kSparqlRunner},  {kSparqlRunner, kSupervisor}, {kSupervisor, kInterpreter},
        {kInterpreter, kSupervisor},   {kSupervisor, kTerminal},
    };
    return g;
}

namespace {
const std::vector<std::pair<MessageKind, const char*>>& kind_names() {
    static const std::vector<std::pair<MessageKind, const char*>> v{
        {MessageKind::UserQuestion, "user_question"},
        {MessageKind::Classification, "classification"},
        {MessageKind::ValidationVerdict, "validation_verdict"},
        {MessageKind::RoutingDirective, "routing_directive"},
        {MessageKind::ResolvedEntities, "resolved_entities"},
        {MessageKind::QueryResultRef, "query_result_ref"},
        {MessageKind::Interpretation, "interpretation"},
        {MessageKind::FinalAnswer, "final_answer"},
        {MessageKind::Error, "error"},
    };
    return v;
}
}  // namespace

std::string to_string(MessageKind k) {
    for (const auto& [kind, name] : kind_names()) {
        if (kind == k) return name;
    }
    return "error";
}

MessageKind parse_message_kind(const std::string& s) {
    for (const auto& [kind, name] : kind_names()) {
        if (s == name) return kind;
    }
    throw Error(ErrorCode::Parse, "unknown message kind '" + s + "'");
}

nlohmann::json to_json(const AgentMessage& m) {
    return {{"sender", m.sender},
            {"kind", to_string(m.kind)},
            {"body", m.body},
            {"attachments", m.attachments},
            {"turn", m.turn}};
}

AgentMessage message_from_json(const nlohmann::json& j) {
    AgentMessage m;
    m.sender = j.at("sender").get<std::string>();
    m.kind = parse_message_kind(j.at("kind").get<std::string>());
    m.body = j.value("body", nlohmann::json::object());
    m.attachments = j.value("attachments", std::vector<std::string>{});
    m.turn = j.value("turn", 0);
    return m;
}

nlohmann::json to_json(const TraceEvent& e) {
    nlohmann::json j{{"seq", e.seq},
                     {"turn", e.turn},
                     {"agent", e.agent},
                     {"tool", e.tool},
                     {"kind", e.kind},
                     {"started_ms", e.started_ms},
                     {"ended_ms", e.ended_ms},
                     {"payload", e.payload}};
    if (e.usage) j["usage"] = llm::to_json(*e.usage);
    return j;
}

TraceEvent event_from_json(const nlohmann::json& j) {
    TraceEvent e;
    e.seq = j.at("seq").get<std::int64_t>();
    e.turn = j.value("turn", 0);
    e.agent = j.value("agent", "");
    e.tool = j.value("tool", "");
    e.kind = j.at("kind").get<std::string>();
    e.started_ms = j.value("started_ms", std::int64_t{0});
    e.ended_ms = j.value("ended_ms", std::int64_t{0});
    if (j.contains("usage")) e.usage = llm::usage_from_json(j["usage"]);
    e.payload = j.value("payload", nlohmann::json::object());
    return e;
}

nlohmann::json to_json(const StoredResult& r) {
    nlohmann::json ents = nlohmann::json::array();
    for (const auto& e : r.entities) ents.push_back(resolvers::to_json(e));
    return {{"turn", r.turn},
            {"question", r.question},
            {"query", r.query},
            {"status", r.status},
            {"row_count", r.row_count},
            {"spill_artifact", r.spill_artifact},
            {"interpretation", r.interpretation},
            {"entities", ents}};
}

StoredResult stored_result_from_json(const nlohmann::json& j) {
    StoredResult r;
    r.turn = j.value("turn", 0);
    r.question = j.value("question", "");
    r.query = j.value("query", "");
    r.status = j.value("status", "");
    r.row_count = j.value("row_count", std::size_t{0});
    r.spill_artifact = j.value("spill_artifact", "");
    r.interpretation = j.value("interpretation", "");
    for (const auto& e : j.value("entities", nlohmann::json::array())) r.entities.push_back(resolvers::entity_from_json(e));
    return r;
}

nlohmann::json to_json(const SessionState& s) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& m : s.history) history.push_back(to_json(m));
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& e : s.trace) trace.push_back(to_json(e));
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, f] : s.uploaded_files) {
        files[name] = {{"artifact", f.artifact}, {"summary", interp::to_json(f.summary)}};
    }
    nlohmann::json j{{"session_id", s.session_id},
                     {"turns", s.turns},
                     {"history", history},
                     {"uploaded_files", files},
                     {"trace", trace},
                     {"ledger", {{"totals", llm::to_json(s.ledger.totals())}, {"calls", s.ledger.calls()}}}};
    if (s.last_result) j["last_result"] = to_json(*s.last_result);
    return j;
}

void load_session(const nlohmann::json& j, SessionState& out) {
    out.session_id = j.at("session_id").get<std::string>();
    out.turns = j.value("turns", 0);
    out.history.clear();
    for (const auto& m : j.value("history", nlohmann::json::array())) out.history.push_back(message_from_json(m));
    out.trace.clear();
    for (const auto& e : j.value("trace", nlohmann::json::array())) out.trace.push_back(event_from_json(e));
    out.uploaded_files.clear();
    for (const auto& [name, f] : j.value("uploaded_files", nlohmann::json::object()).items()) {
        out.uploaded_files[name] = {f.at("artifact").get<std::string>(), interp::summary_from_json(f.at("summary"))};
    }
    if (j.contains("ledger")) {
        out.ledger.restore(llm::usage_from_json(j["ledger"].at("totals")), j["ledger"].value("calls", std::int64_t{0}));
    }
    if (j.contains("last_result")) out.last_result = stored_result_from_json(j["last_result"]);
}

std::string trace_jsonl(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const auto& e : trace) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

}  // namespace kgqa::agents
