#include <doctest.h>

#include "kgqa/agents/protocol.hpp"
#include "kgqa/agents/types.hpp"
#include "kgqa/core/error.hpp"

using namespace kgqa;
using namespace kgqa::agents;

TEST_SUITE("agents") {

TEST_CASE("json objects are pulled out of chatty output") {
    auto j = extract_json_object("Sure! ```json\n{\"a\": \"}\", \"b\": {\"c\": 1}}\n``` done");
    REQUIRE(j);
    CHECK((*j)["a"] == "}");
    CHECK((*j)["b"]["c"] == 1);
    CHECK_FALSE(extract_json_object("no braces here"));
    CHECK_FALSE(extract_json_object("{broken"));
    CHECK(extract_json_object("{bad} then {\"ok\": true}")->at("ok") == true);
}

TEST_CASE("classification parsing") {
    CHECK(parse_classification(R"({"classification": "NewKnowledge"})") == Classification::NewKnowledge);
    CHECK(parse_classification(R"({"classification": "help_me_understand"})") == Classification::HelpMeUnderstand);
    CHECK_FALSE(parse_classification(R"({"classification": "Other"})"));
    CHECK_FALSE(parse_classification("NewKnowledge"));
}

TEST_CASE("validator verdicts keep known mention kinds only") {
    auto v = parse_verdict(R"({"verdict": "Invalid", "feedback": "off topic", "plants": ["Melochia umbellata", " "],
                               "mentions": [{"text": "Melochia", "kind": "taxon"}, {"text": "x", "kind": "gene"}]})");
    REQUIRE(v);
    CHECK_FALSE(v->valid);
    CHECK(v->feedback == "off topic");
    CHECK(v->plants == std::vector<std::string>{"Melochia umbellata"});
    REQUIRE(v->mentions.size() == 1u);
    CHECK(v->mentions[0] == Mention{"Melochia", "taxon"});
    CHECK_FALSE(parse_verdict(R"({"verdict": "maybe"})"));
}

TEST_CASE("supervisor decisions") {
    auto d = parse_supervisor(R"({"mentions": [{"text": " Aspidosperma ", "kind": "chemical_class"},
                                               {"text": "BRCA1", "kind": "gene"}],
                                  "interpret": true, "rerun": "yes"})");
    REQUIRE(d);
    REQUIRE(d->mentions.size() == 1u);
    CHECK(d->mentions[0].text == "Aspidosperma");
    REQUIRE(d->dropped.size() == 1u);
    CHECK(d->dropped[0].kind == "gene");
    CHECK(d->interpret);
    CHECK_FALSE(d->rerun);  // only a JSON boolean counts
    CHECK(Mention{"ASPIDOSPERMA ", "chemical_class"}.key() == Mention{"aspidosperma", "chemical_class"}.key());
}

TEST_CASE("kg calls and runner plans") {
    auto calls = parse_kg_calls(R"({"calls": [{"tool": "taxon_resolver", "input": "Melochia", "mention": "Melochia"}, 3]})");
    REQUIRE(calls);
    REQUIRE(calls->size() == 1u);
    CHECK((*calls)[0].tool == "taxon_resolver");
    CHECK_FALSE(parse_kg_calls(R"({"tools": []})"));
    auto plan = parse_runner_plan(R"({"question": "count features", "wikidata_taxon": null})");
    REQUIRE(plan);
    CHECK(plan->wikidata_taxon.empty());
    CHECK_FALSE(parse_runner_plan(R"({"question": "  "})"));
}

TEST_CASE("routing sends unresolved mentions to the KG agent first") {
    SupervisorDecision d;
    d.mentions = {{"Melochia", "taxon"}};
    RouteFacts f;
    auto r = route(d, f);
    CHECK(r.route == Route::ToKG);
    CHECK(r.mentions == d.mentions);

    f.attempted.insert(d.mentions[0].key());
    CHECK(route(d, f).route == Route::ToSparqlRunner);

    f.has_result = true;
    CHECK(route(d, f).route == Route::Finish);
    d.interpret = true;
    CHECK(route(d, f).route == Route::Finish);  // no rows to interpret
    f.result_has_rows = true;
    CHECK(route(d, f).route == Route::ToInterpreter);
    f.interpreted = true;
    CHECK(route(d, f).route == Route::Finish);
    d.rerun = true;
    CHECK(route(d, f).route == Route::ToSparqlRunner);
}

TEST_CASE("follow-up turns never go to the KG agent") {
    SupervisorDecision d;
    d.mentions = {{"Melochia", "taxon"}};
    d.interpret = true;
    RouteFacts f;
    f.help_me_understand = true;
    f.has_result = true;
    f.result_has_rows = true;
    CHECK(route(d, f).route == Route::ToInterpreter);
}

TEST_CASE("default topology validates") {
    auto g = default_topology("gpt-4o");
    CHECK_NOTHROW(g.validate());
    CHECK(g.has_edge(kValidator, kTerminal));
    CHECK(g.has_edge(kEntry, kSupervisor));
    CHECK_FALSE(g.has_edge(kEntry, kKg));
    CHECK(g.node(kKg).tool_refs.size() == 4u);
    for (const auto& n : g.nodes) {
        for (const auto& t : n.tool_refs) CHECK(registered_tools().count(t));
    }
    CHECK(resolver_tool_kind("taxon_resolver") == "taxon");
    CHECK(resolver_tool_kind("sparql_chain").empty());
}

TEST_CASE("invalid topologies are rejected") {
    auto expect_config = [](const GraphTopology& g) {
        try {
            g.validate();
            FAIL("expected a config error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Config);
        }
    };
    auto dup = default_topology("m");
    dup.nodes.push_back(dup.nodes[0]);
    expect_config(dup);

    auto tool = default_topology("m");
    tool.nodes[2].tool_refs.push_back("rm_rf");
    expect_config(tool);

    auto missing = default_topology("m");
    missing.nodes.pop_back();
    expect_config(missing);

    auto unreachable = default_topology("m");
    std::erase_if(unreachable.edges, [](const auto& e) { return e.second == kInterpreter; });
    expect_config(unreachable);
}

TEST_CASE("message, event and session json round trips") {
    AgentMessage m{kSupervisor, MessageKind::RoutingDirective, {{"route", "ToKG"}}, {"r.csv"}, 2};
    auto m2 = message_from_json(to_json(m));
    CHECK(m2.sender == m.sender);
    CHECK(m2.kind == m.kind);
    CHECK(m2.body == m.body);
    CHECK(m2.attachments == m.attachments);
    CHECK(m2.turn == 2);
    CHECK(parse_message_kind(to_string(MessageKind::QueryResultRef)) == MessageKind::QueryResultRef);
    CHECK_THROWS_AS(parse_message_kind("telepathy"), Error);

    TraceEvent e;
    e.seq = 4;
    e.turn = 1;
    e.agent = kSparqlRunner;
    e.tool = "sparql_chain";
    e.kind = "tool_called";
    e.started_ms = 10;
    e.ended_ms = 12;
    e.usage = llm::TokenUsage{100, 20, 0};
    e.payload = {{"status", "ok"}};
    auto e2 = event_from_json(to_json(e));
    CHECK(to_json(e2) == to_json(e));
    CHECK(trace_jsonl({e, e}) == to_json(e).dump() + "\n" + to_json(e).dump() + "\n");

    SessionState s;
    s.session_id = "abc";
    s.turns = 1;
    s.history.push_back(m);
    s.trace.push_back(e);
    StoredResult r;
    r.turn = 1;
    r.question = "q";
    r.query = "SELECT * WHERE { ?s ?p ?o }";
    r.status = "ok";
    r.row_count = 3;
    r.spill_artifact = "result_1.csv";
    s.last_result = r;
    SessionState back;
    load_session(to_json(s), back);
    CHECK(back.session_id == "abc");
    CHECK(back.turns == 1);
    REQUIRE(back.last_result);
    CHECK(to_json(*back.last_result) == to_json(r));
    CHECK(to_json(back) == to_json(s));
}

}  // TEST_SUITE
