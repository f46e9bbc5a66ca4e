// Acceptance checks. One line per criterion; exit status 1 if any fails.
// The live taxon check runs only with KGQA_LIVE_TESTS=1 and network access.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "kgqa/agents/runtime.hpp"
#include "kgqa/app/config.hpp"
#include "kgqa/chain/chain.hpp"
#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/core/http.hpp"
#include "kgqa/eval/harness.hpp"
#include "kgqa/interp/interpret.hpp"
#include "kgqa/llm/provider.hpp"
#include "kgqa/rdf/turtle.hpp"
#include "kgqa/resolvers/remote.hpp"
#include "properties.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace kgqa;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kGoldenSeconds = 5.0;
constexpr double kMergerSeconds = 10.0;
constexpr double kAccuracyTolerance = 0.01;  // percentage points
constexpr int kResolverCalls = 200;
constexpr int kMergerPairs = 1000;
constexpr int kSpectrumUsis = 20;

struct Outcome {
    enum { Pass, Fail, Skip } state = Pass;
    std::string detail;
};

Outcome pass(std::string d = {}) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Skip, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// One replayed turn sequence over the fixture config.
struct Replay {
    testing::TempDir dir;
    std::unique_ptr<app::AppContext> ctx;
    std::shared_ptr<testing::CountingEndpoint> kg;
    std::unique_ptr<agents::Runtime> runtime;
    agents::SessionState state;
    std::vector<llm::ChatRequest> requests;

    explicit Replay(const std::string& cassette) {
        ctx = app::build_context(testing::fixture_config(cassette, dir.path()));
        auto rc = ctx->runtime_config();
        kg = std::make_shared<testing::CountingEndpoint>(rc.tools.kg);
        rc.tools.kg = kg;
        auto inner = ctx->completer();
        runtime = std::make_unique<agents::Runtime>(std::move(rc), [this, inner](const llm::ChatRequest& r) {
            requests.push_back(r);
            return inner(r);
        });
        state.session_id = "acceptance";
    }

    agents::AgentMessage ask(const std::string& q) { return runtime->run_turn(state, q); }

    int purpose_count(const std::string& purpose, int turn = 0) const {
        int n = 0;
        for (const auto& e : state.trace) {
            if (e.kind == "llm_call" && (turn == 0 || e.turn == turn) && e.payload.value("purpose", "") == purpose) ++n;
        }
        return n;
    }

    int resolver_calls() const {
        int n = 0;
        for (const auto& e : state.trace) n += e.kind == "tool_called" && !agents::resolver_tool_kind(e.tool).empty();
        return n;
    }

    std::optional<std::string> diagnosis() const {
        for (const auto& e : state.trace) {
            if (e.kind == "diagnosis") return e.payload.value("diagnosis", "");
        }
        return std::nullopt;
    }
};

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

Outcome fig2a_golden() {
    auto t0 = std::chrono::steady_clock::now();
    Replay r("fig2a");
    auto msg = r.ask(testing::script_question("fig2a"));
    const double secs = seconds_since(t0);
    const auto query = msg.body.value("query", "");
    if (!contains(msg.text(), "Result: metaboliteCount = 3")) return fail("answer lacks count 3: " + msg.text());
    if (!contains(query, "COUNT(DISTINCT ?feature)")) return fail("query lacks COUNT(DISTINCT ?feature)");
    if (!contains(query, "?zodiacScore > 0.9") || !contains(query, "?cosmicScore > 0.3")) {
        return fail("query lacks the FILTER constants");
    }
    if (!contains(msg.text(), query)) return fail("answer does not show the SPARQL text");
    if (secs >= kGoldenSeconds) return fail(fmt::format("took {:.3f} s", secs));
    return pass(fmt::format("count 3, {:.3f} s", secs));
}

Outcome refinement_discipline() {
    auto t0 = std::chrono::steady_clock::now();
    Replay resolved("refine_resolved");
    resolved.ask(testing::script_question("refine_resolved"));
    const int c1 = resolved.purpose_count("sparql_generate") + resolved.purpose_count("sparql_refine");
    if (resolved.diagnosis() != "resolved" || c1 != 2) {
        return fail(fmt::format("resolved case: diagnosis {}, {} completions", resolved.diagnosis().value_or("none"), c1));
    }
    Replay absent("refine_absent");
    auto msg = absent.ask(testing::script_question("refine_absent"));
    const int c2 = absent.purpose_count("sparql_generate") + absent.purpose_count("sparql_refine");
    if (absent.diagnosis() != "data_absent" || c2 != 2 || !contains(msg.text(), chain::kDataAbsentMessage)) {
        return fail(fmt::format("absent case: diagnosis {}, {} completions", absent.diagnosis().value_or("none"), c2));
    }
    const double secs = seconds_since(t0);
    if (secs >= kGoldenSeconds) return fail(fmt::format("took {:.3f} s", secs));
    return pass(fmt::format("Resolved 2 completions, DataAbsent 2 completions, {:.3f} s", secs));
}

Outcome spill_rule() {
    auto t0 = std::chrono::steady_clock::now();
    // Boundary under the estimator ceil(bytes / 3): header "v\n" plus n rows
    // of "xx\n" is n + 1 tokens; question and query are one token each.
    testing::TempDir dir;
    const auto prompts = chain::PromptLibrary::load_dir(testing::source_dir() / "prompts");
    std::string seen;
    auto complete = [&](const llm::ChatRequest& r) {
        seen = r.messages.front().text;
        return llm::ChatResponse{"ok", {}};
    };
    auto run = [&](std::size_t rows) {
        std::string body = "v\n";
        for (std::size_t i = 0; i < rows; ++i) body += "xx\n";
        text::write_file(dir / "r.csv", body);
        const std::size_t total = llm::estimate_tokens("abc") + llm::estimate_tokens("def") + llm::estimate_tokens(body);
        auto s = interp::summarize_results(dir / "r.csv", "def", "abc", prompts, "m", complete);
        return std::make_pair(total, s.rows_inlined);
    };
    auto [t_in, inl] = run(5996);
    if (t_in != 5999 || !inl || !contains(seen, "xx\n")) return fail(fmt::format("{} tokens: not inlined", t_in));
    auto [t_out, inl2] = run(5998);
    if (t_out != 6001 || inl2 || contains(seen, "xx")) return fail(fmt::format("{} tokens: rows leaked", t_out));

    Replay r("spill");
    auto msg = r.ask(testing::script_question("spill"));
    if (!contains(msg.text(), agents::spill_pointer("1-results.csv"))) return fail("no spill pointer in the answer");
    const llm::ChatRequest* interp_req = nullptr;
    for (const auto& q : r.requests) {
        if (q.purpose == "interpreter") interp_req = &q;
    }
    if (!interp_req) return fail("interpreter was not called");
    if (contains(interp_req->messages.front().text, "f_ob_")) return fail("interpretation prompt contains data rows");
    const double secs = seconds_since(t0);
    if (secs >= kGoldenSeconds) return fail(fmt::format("took {:.3f} s", secs));
    return pass(fmt::format("5999 inlined, 6001 spilled, 602-row replay points to CSV, {:.3f} s", secs));
}

Outcome resolver_provenance() {
    std::ostringstream log;
    const int v = testing::resolver_provenance_violations(20261018, kResolverCalls, &log);
    if (v) return fail(fmt::format("{} violations\n{}", v, log.str()));
    return pass(fmt::format("{} calls, 0 violations", kResolverCalls));
}

Outcome merger_oracle() {
    testing::TempDir dir;
    std::ostringstream log;
    auto t0 = std::chrono::steady_clock::now();
    const int m = testing::merger_oracle_mismatches(4242, kMergerPairs, dir.path(), &log);
    const double secs = seconds_since(t0);
    if (m) return fail(fmt::format("{} mismatches\n{}", m, log.str()));
    if (secs >= kMergerSeconds) return fail(fmt::format("took {:.3f} s", secs));
    return pass(fmt::format("{} pairs, 0 mismatches, {:.3f} s", kMergerPairs, secs));
}

Outcome entry_validator_routing() {
    Replay rej("rejection");
    auto msg = rej.ask(testing::script_question("rejection"));
    if (!contains(msg.text(), "cannot be answered from the knowledge graph")) return fail("question was not rejected");
    if (rej.kg->calls() != 0 || rej.resolver_calls() != 0) {
        return fail(fmt::format("rejection ran {} SPARQL queries and {} resolver calls", rej.kg->calls(), rej.resolver_calls()));
    }
    Replay fu("followup");
    fu.ask(testing::script_question("followup", 0));
    const int kg_before = fu.kg->calls();
    fu.ask(testing::script_question("followup", 1));
    const int gens = fu.purpose_count("sparql_generate", 2) + fu.purpose_count("sparql_refine", 2);
    if (gens != 0 || fu.kg->calls() != kg_before) {
        return fail(fmt::format("follow-up made {} generations and {} queries", gens, fu.kg->calls() - kg_before));
    }
    return pass("rejection: 0 SPARQL, 0 resolver calls; follow-up: 0 generations");
}

Outcome eval_arithmetic() {
    auto rep = eval::aggregate_metrics(testing::stratified_records(), testing::stratified_exclusions());
    if (rep.overall.total != 50 || rep.overall.excluded != 1 || rep.overall.correct != 41) return fail("wrong counts");
    if (std::abs(rep.overall.accuracy - 83.67) > kAccuracyTolerance) {
        return fail(fmt::format("overall {:.4f}", rep.overall.accuracy));
    }
    // hand computation: low 17/19, medium 15/18, high 9/12
    const std::map<std::string, double> expected{{"low", 100.0 * 17 / 19}, {"medium", 100.0 * 15 / 18}, {"high", 75.0}};
    for (const auto& [k, v] : expected) {
        if (rep.strata[k].accuracy != v) return fail(fmt::format("{} stratum {:.6f} != {:.6f}", k, rep.strata[k].accuracy, v));
    }
    return pass(fmt::format("overall {:.2f}%, strata {:.2f}/{:.2f}/{:.2f}", rep.overall.accuracy, rep.strata["low"].accuracy,
                            rep.strata["medium"].accuracy, rep.strata["high"].accuracy));
}

Outcome error_taxonomy() {
    using eval::ErrorType;
    const std::vector<std::pair<std::vector<agents::TraceEvent>, ErrorType>> cases{
        {testing::trace_t1(), ErrorType::T1},
        {testing::trace_t2(), ErrorType::T2},
        {testing::trace_t3(), ErrorType::T3},
        {testing::trace_t4(), ErrorType::T4}};
    for (const auto& [trace, want] : cases) {
        auto got = eval::classify_error(trace, eval::Verdict::Incorrect);
        if (got != want) return fail("expected " + eval::to_string(want) + ", got " + eval::to_string(got));
    }
    return pass("T1 T2 T3 T4");
}

Outcome result_set_judging() {
    sparql::LocalGraphEndpoint kg(
        std::make_shared<rdf::Graph>(rdf::load_graph(text::read_file(testing::fixture("enpkg/graph.ttl")))));
    const std::string ref =
        "PREFIX ns1: <https://enpkg.commons-lab.org/kg/>\n"
        "SELECT ?feature ?mass WHERE { ?feature a ns1:LCMSFeature ; ns1:has_parent_mass ?mass . FILTER(?mass > 500) }";
    std::string renamed = ref;
    for (auto [from, to] : {std::pair{"?feature", "?f"}, std::pair{"?mass", "?pm"}}) {
        for (auto p = renamed.find(from); p != std::string::npos; p = renamed.find(from)) {
            renamed.replace(p, std::string(from).size(), to);
        }
    }
    std::string perturbed = ref;
    perturbed.replace(perturbed.find("500"), 3, "600");
    auto a = eval::judge_answer("q", ref, renamed, kg);
    auto b = eval::judge_answer("q", ref, perturbed, kg);
    if (a.verdict != eval::Verdict::Correct) return fail("renamed query judged " + eval::to_string(a.verdict));
    if (b.verdict != eval::Verdict::Incorrect) return fail("perturbed query judged " + eval::to_string(b.verdict));
    return pass("renamed correct, perturbed incorrect");
}

Outcome spectrum_url_format() {
    testing::TempDir dir;
    std::ostringstream log;
    const int m = testing::spectrum_url_mismatches(1018, kSpectrumUsis, dir.path(), &log);
    if (m) return fail(fmt::format("{} mismatches\n{}", m, log.str()));
    return pass(fmt::format("{} USIs match the oracle", kSpectrumUsis));
}

Outcome live_taxon() {
    const char* live = std::getenv("KGQA_LIVE_TESTS");
    if (!live || std::string(live) != "1") return skip("set KGQA_LIVE_TESTS=1 with network access to run");
    const char* url = std::getenv("KGQA_WIKIDATA_ENDPOINT");
    auto ep = std::make_shared<sparql::HttpEndpoint>(url ? url : "https://query.wikidata.org/sparql",
                                                     std::make_shared<http::NetworkTransport>());
    resolvers::TaxonResolver taxa(ep);
    try {
        auto r = taxa.resolve("Tabernaemontana coffeoides");
        if (!r.entity) return fail("no match: " + r.detail);
        if (r.entity->identifier != "http://www.wikidata.org/entity/Q15376858") return fail("got " + r.entity->identifier);
    } catch (const Error& e) {
        return fail(e.what());
    }
    return pass("Q15376858");
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fig2a golden flow", fig2a_golden},
        {"refinement discipline", refinement_discipline},
        {"6000-token spill rule", spill_rule},
        {"resolver provenance", resolver_provenance},
        {"merger oracle", merger_oracle},
        {"entry/validator routing", entry_validator_routing},
        {"evaluation arithmetic", eval_arithmetic},
        {"error taxonomy", error_taxonomy},
        {"result-set judging", result_set_judging},
        {"spectrum_url encoding", spectrum_url_format},
        {"live taxon resolution", live_taxon},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = fail(std::string("threw: ") + e.what());
        }
        const char* tag = o.state == Outcome::Pass ? "PASS" : o.state == Outcome::Fail ? "FAIL" : "SKIP";
        if (o.state == Outcome::Fail) ++failures;
        std::cout << tag << "  " << name;
        if (!o.detail.empty()) std::cout << "  (" << o.detail << ")";
        std::cout << "\n";
    }
    std::cout << (failures ? fmt::format("{} criteria failed\n", failures) : std::string("all criteria passed\n"));
    return failures ? 1 : 0;
}
