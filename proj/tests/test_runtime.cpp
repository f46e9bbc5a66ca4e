#include <doctest.h>

#include <deque>

#include "kgqa/agents/runtime.hpp"
#include "kgqa/app/config.hpp"
#include "kgqa/chain/chain.hpp"
#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/llm/provider.hpp"
#include "support.hpp"

using namespace kgqa;
using namespace kgqa::agents;
namespace fs = std::filesystem;

namespace {

/// Fails the test if the provider is ever reached.
class TrippingProvider final : public llm::Provider {
public:
    llm::ChatResponse complete(const llm::ChatRequest&) override {
        ++calls;
        throw Error(ErrorCode::Upstream, "provider reached in replay mode");
    }
    int calls = 0;
};

struct Scenario {
    testing::TempDir dir;
    std::unique_ptr<app::AppContext> ctx;
    std::shared_ptr<testing::CountingEndpoint> kg;
    std::shared_ptr<TrippingProvider> provider = std::make_shared<TrippingProvider>();
    std::unique_ptr<Runtime> runtime;
    SessionState state;
    std::deque<AgentMessage> answers;

    explicit Scenario(const std::string& cassette, std::function<std::int64_t()> clock = {}) {
        app::ContextOverrides o;
        o.provider = provider;
        ctx = app::build_context(testing::fixture_config(cassette, dir.path()), o);
        auto rc = ctx->runtime_config();
        kg = std::make_shared<testing::CountingEndpoint>(rc.tools.kg);
        rc.tools.kg = kg;
        if (clock) rc.clock = std::move(clock);
        runtime = std::make_unique<Runtime>(std::move(rc), ctx->completer());
        state.session_id = "s1";
    }

    const AgentMessage& ask(const std::string& q) {
        answers.push_back(runtime->run_turn(state, q));
        return answers.back();
    }

    std::vector<const TraceEvent*> events(const std::string& kind, int turn = 0) const {
        std::vector<const TraceEvent*> out;
        for (const auto& e : state.trace) {
            if (e.kind == kind && (turn == 0 || e.turn == turn)) out.push_back(&e);
        }
        return out;
    }

    int llm_calls(const std::string& purpose, int turn = 0) const {
        int n = 0;
        for (const auto* e : events("llm_call", turn)) n += e->payload.value("purpose", "") == purpose;
        return n;
    }

    int resolver_calls() const {
        int n = 0;
        for (const auto* e : events("tool_called")) n += !resolver_tool_kind(e->tool).empty();
        return n;
    }

    fs::path session_dir() const { return runtime->session_dir(state.session_id); }
};

}  // namespace

TEST_SUITE("runtime") {

TEST_CASE("golden count question") {
    Scenario s("fig2a");
    const auto& a = s.ask(testing::script_question("fig2a"));
    CHECK(a.kind == MessageKind::FinalAnswer);
    CHECK(a.text().find("Result: metaboliteCount = 3") != std::string::npos);
    CHECK(a.text().find("http://www.wikidata.org/entity/Q15376858") != std::string::npos);
    const auto query = a.body.value("query", "");
    CHECK(query.find("COUNT(DISTINCT ?feature)") != std::string::npos);
    CHECK(query.find("0.9") != std::string::npos);
    CHECK(query.find("0.3") != std::string::npos);
    CHECK(s.ctx->cassette->remaining() == 0u);
    CHECK(s.provider->calls == 0);
    CHECK(s.resolver_calls() == 1);
    CHECK(s.llm_calls("sparql_generate") == 1);
    CHECK(s.llm_calls("sparql_refine") == 0);
}

TEST_CASE("the usage ledger counts every gateway completion") {
    Scenario s("fig2a");
    s.ask(testing::script_question("fig2a"));
    CHECK(s.state.ledger.calls() == s.ctx->gateway->completions());
    CHECK(s.state.ledger.calls() == 8);
    auto ledger = s.events("ledger");
    REQUIRE(ledger.size() == 1u);
    CHECK(ledger[0]->payload["calls"] == 8);
    CHECK(ledger[0]->payload["estimated_cost"].get<double>() > 0.0);
}

TEST_CASE("empty results are refined once and diagnosed") {
    SUBCASE("resolved") {
        Scenario s("refine_resolved");
        const auto& a = s.ask(testing::script_question("refine_resolved"));
        CHECK(s.llm_calls("sparql_generate") + s.llm_calls("sparql_refine") == 2);
        auto d = s.events("diagnosis");
        REQUIRE(d.size() == 1u);
        CHECK(d[0]->payload["diagnosis"] == "resolved");
        CHECK(a.text().find("Result (5 rows") != std::string::npos);
    }
    SUBCASE("data absent") {
        Scenario s("refine_absent");
        const auto& a = s.ask(testing::script_question("refine_absent"));
        CHECK(s.llm_calls("sparql_generate") + s.llm_calls("sparql_refine") == 2);
        auto d = s.events("diagnosis");
        REQUIRE(d.size() == 1u);
        CHECK(d[0]->payload["diagnosis"] == "data_absent");
        CHECK(a.text().find(chain::kDataAbsentMessage) != std::string::npos);
    }
}

TEST_CASE("large results are spilled and pointed at") {
    Scenario s("spill");
    const auto& a = s.ask(testing::script_question("spill"));
    CHECK(a.text().find("The query returned 602 rows.") != std::string::npos);
    CHECK(a.text().find(spill_pointer("1-results.csv")) != std::string::npos);
    CHECK(a.text().find("f_ob_0001") == std::string::npos);
    CHECK(a.attachments == std::vector<std::string>{"1-results.csv"});
    auto table = csv::read_file(s.session_dir() / "1-results.csv");
    CHECK(table.rows.size() == 602u);
    auto interp = s.events("tool_called");
    bool inlined = true;
    for (const auto* e : interp) {
        if (e->tool == "interpreter") inlined = e->payload["rows_inlined"];
    }
    CHECK_FALSE(inlined);
}

TEST_CASE("rejected questions never reach the KG or the resolvers") {
    Scenario s("rejection");
    const auto& a = s.ask(testing::script_question("rejection"));
    CHECK(a.text().rfind("This question cannot be answered from the knowledge graph.", 0) == 0);
    CHECK(a.text().find("not about the metabolomics knowledge graph") != std::string::npos);
    CHECK(s.kg->calls() == 0);
    CHECK(s.resolver_calls() == 0);
    CHECK(s.llm_calls("sparql_generate") == 0);
    CHECK(s.state.ledger.calls() == 2);
}

TEST_CASE("plants missing from the database invalidate the question") {
    Scenario s("plant_absent");
    const auto& a = s.ask(testing::script_question("plant_absent"));
    CHECK(a.text().find("'PlantNotInDb x' is not present") != std::string::npos);
    CHECK(s.kg->calls() == 0);
    bool checked = false;
    for (const auto* e : s.events("tool_called")) {
        if (e->tool == "plant_db_checker") checked = e->payload["outcome"] == "absent";
    }
    CHECK(checked);
}

TEST_CASE("follow-up turns reuse the stored result") {
    Scenario s("followup");
    const auto& first = s.ask(testing::script_question("followup", 0));
    CHECK(first.text().find("Result (3 rows") != std::string::npos);
    const auto kg_before = s.kg->calls();
    const auto& second = s.ask(testing::script_question("followup", 1));
    CHECK(second.kind == MessageKind::FinalAnswer);
    CHECK(s.llm_calls("sparql_generate", 2) == 0);
    CHECK(s.events("query_generated", 2).empty());
    CHECK(s.kg->calls() == kg_before);
    CHECK(second.text().find("Chart specification: 2-chart.json") != std::string::npos);
    CHECK(fs::exists(s.session_dir() / "2-chart.json"));
    CHECK(s.ctx->cassette->remaining() == 0u);
    REQUIRE(s.state.last_result);
    CHECK(s.state.last_result->turn == 1);
    CHECK_FALSE(s.state.last_result->interpretation.empty());
}

TEST_CASE("oscillating supervisors hit the step cap") {
    Scenario s("oscillate");
    const auto& a = s.ask(testing::script_question("oscillate"));
    CHECK(a.text() ==
          "Stopped after 12 routing steps without reaching an answer. Please rephrase or narrow the question.");
    CHECK(s.events("routing").size() == 12u);
    CHECK(s.events("step_cap").size() == 1u);
    CHECK(s.ctx->cassette->remaining() == 0u);
}

TEST_CASE("bioassay targets resolve through the HTTP fixtures") {
    Scenario s("bioassay");
    const auto& a = s.ask(testing::script_question("bioassay"));
    CHECK(a.text().find("CHEMBL367") != std::string::npos);
    CHECK(a.text().find("ext_tc_1") != std::string::npos);
    CHECK(a.text().find("62.5") != std::string::npos);
    CHECK(a.text().find("ext_mu_1") == std::string::npos);  // 30% is below the threshold
}

TEST_CASE("traces are deterministic under an injected clock") {
    auto run = [] {
        std::int64_t t = 1000;
        Scenario s("fig2a", [&t] { return t += 7; });
        s.ask(testing::script_question("fig2a"));
        return trace_jsonl(s.state.trace);
    };
    auto a = run();
    auto b = run();
    CHECK(a == b);
    CHECK(a.find("\"started_ms\":1007") != std::string::npos);
}

TEST_CASE("trace sequence numbers and times are monotone") {
    Scenario s("followup");
    s.ask(testing::script_question("followup", 0));
    s.ask(testing::script_question("followup", 1));
    for (std::size_t i = 1; i < s.state.trace.size(); ++i) {
        const auto& p = s.state.trace[i - 1];
        const auto& e = s.state.trace[i];
        CHECK(e.seq == p.seq + 1);
        CHECK(e.ended_ms >= p.ended_ms);
        CHECK(e.started_ms <= e.ended_ms);
        CHECK(e.turn >= p.turn);
    }
}

TEST_CASE("empty questions are rejected without model calls") {
    Scenario s("fig2a");
    const auto& a = s.ask("   ");
    CHECK(a.kind == MessageKind::Error);
    CHECK(a.body["code"] == "invalid_input");
    CHECK(s.ctx->gateway->completions() == 0);
}

TEST_CASE("replay misses surface as errors") {
    Scenario s("rejection");
    const auto& a = s.ask("A question nobody recorded");
    CHECK(a.kind == MessageKind::Error);
    CHECK(a.text().find("fingerprint") != std::string::npos);
    CHECK(s.provider->calls == 0);
}

TEST_CASE("uploads are analyzed inside the session directory") {
    Scenario s("fig2a");
    fs::create_directories(s.session_dir());
    fs::copy_file(testing::fixture("files/spectra.mgf"), s.session_dir() / "spectra.mgf");
    auto f = s.runtime->register_upload(s.state, "spectra.mgf");
    CHECK(f.summary.spectrum_count == 7u);
    CHECK(s.state.uploaded_files.count("spectra.mgf"));
    CHECK_THROWS_AS(s.runtime->register_upload(s.state, "../../etc/passwd"), Error);
}

TEST_CASE("runtime construction checks prompts and topology") {
    testing::TempDir dir;
    auto ctx = app::build_context(testing::fixture_config("fig2a", dir.path()));
    auto rc = ctx->runtime_config();
    rc.topology.nodes[0].tool_refs.push_back("nope");
    CHECK_THROWS_AS(Runtime(rc, ctx->completer()), Error);
    CHECK_THROWS_AS(Runtime(ctx->runtime_config(), CompleteFn{}), Error);
}

}  // TEST_SUITE
