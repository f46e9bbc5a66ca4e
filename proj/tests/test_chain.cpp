#include <doctest.h>

#include <deque>

#include "kgqa/chain/chain.hpp"
#include "kgqa/chain/prompts.hpp"
#include "kgqa/chain/sanitize.hpp"
#include "kgqa/chain/schema.hpp"
#include "kgqa/chain/store.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/rdf/turtle.hpp"
#include "support.hpp"

using namespace kgqa;
using namespace kgqa::chain;

namespace {

const std::string kNs = "https://enpkg.commons-lab.org/kg/";

const SchemaDocument& enpkg_schema() {
    static const SchemaDocument s = load_schema(text::read_file(testing::fixture("enpkg/schema.ttl")));
    return s;
}

std::shared_ptr<sparql::Endpoint> enpkg_endpoint() {
    static auto ep = std::make_shared<sparql::LocalGraphEndpoint>(
        std::make_shared<rdf::Graph>(rdf::load_graph(text::read_file(testing::fixture("enpkg/graph.ttl")))));
    return ep;
}

const PromptLibrary& prompts() {
    static const PromptLibrary p = PromptLibrary::load_dir(testing::source_dir() / "prompts");
    return p;
}

std::string fenced(const std::string& q) { return "Here you go:\n```sparql\n" + q + "\n```\nDone."; }

const std::string kRight = "PREFIX ns1: <" + kNs + ">\nSELECT DISTINCT ?f WHERE { ?f ns1:has_parent_mass ?m FILTER(?m > 600) }";
const std::string kEmpty = "PREFIX ns1: <" + kNs + ">\nSELECT ?f WHERE { ?f ns1:has_parent_mass ?m FILTER(?m > 6000) }";

struct Scripted {
    std::deque<std::string> replies;
    std::vector<llm::ChatRequest> seen;
    CompleteFn fn() {
        return [this](const llm::ChatRequest& r) {
            seen.push_back(r);
            auto t = replies.front();
            replies.pop_front();
            return llm::ChatResponse{t, {10, 5, 0}};
        };
    }
};

ChainConfig chain_config(Scripted& s, const std::filesystem::path& spill, const RefinementStore* store) {
    ChainConfig c;
    c.model = "gpt-4o";
    c.prompts = &prompts();
    c.schema = &enpkg_schema();
    c.endpoint = enpkg_endpoint();
    c.store = store;
    c.spill_path = spill;
    c.complete = s.fn();
    return c;
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("schema inventory from the fixture") {
    const auto& s = enpkg_schema();
    CHECK(s.classes.size() == 12u);
    CHECK(s.properties.size() == 17u);
    CHECK(s.has_class(kNs + "LCMSFeature"));
    CHECK(s.has_property(kNs + "has_zodiac_score"));
    CHECK_FALSE(s.has_term(kNs + "nothing"));
    CHECK(s.namespace_for("ns1") == kNs);
    CHECK(s.compact_iri(kNs + "LabExtract") == "ns1:LabExtract");
    CHECK(s.compact_iri("http://other/x") == "<http://other/x>");
    CHECK(s.compact_inventory().find("ns1:has_zodiac_score") != std::string::npos);
}

TEST_CASE("schema with owl declarations") {
    auto s = load_schema(text::read_file(testing::fixture("enpkg/schema_small.ttl")));
    CHECK(s.classes.size() == 5u);
    CHECK(s.properties.size() == 4u);
    for (const auto& p : s.properties) {
        if (p.iri == "http://example.org/lab/score") {
            CHECK(p.range == std::vector<std::string>{"http://www.w3.org/2001/XMLSchema#double"});
        }
    }
}

TEST_CASE("malformed schema is a config error with a line") {
    try {
        load_schema("@prefix ex: <http://e/> .\nex:A a \n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Config);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("vocabulary helpers") {
    CHECK(local_name("http://e/a#b") == "b");
    CHECK(local_name("http://e/a/b") == "b");
    CHECK(is_standard_vocabulary("http://www.w3.org/2000/01/rdf-schema#label"));
    CHECK_FALSE(is_standard_vocabulary(kNs + "x"));
    CHECK(standard_prefixes().count("wdt") == 1u);
}

TEST_CASE("sanitizer extracts the query from prose and fences") {
    auto r = sanitize_query(fenced(kRight), &enpkg_schema());
    REQUIRE(r.ok());
    CHECK(*r.query == kRight);
    auto again = sanitize_query(*r.query, &enpkg_schema());
    CHECK(*again.query == *r.query);
}

TEST_CASE("sanitizer declares missing prefixes from the schema") {
    auto r = sanitize_query("SELECT ?f WHERE { ?f a ns1:LCMSFeature }", &enpkg_schema());
    REQUIRE(r.ok());
    CHECK(r.query->rfind("PREFIX ns1: <" + kNs + ">", 0) == 0);
    auto wd = sanitize_query("SELECT ?x WHERE { ?x wdt:P225 \"a\" }");
    REQUIRE(wd.ok());
    CHECK(wd.query->find("PREFIX wdt: <http://www.wikidata.org/prop/direct/>") != std::string::npos);
}

TEST_CASE("sanitizer reports unusable output") {
    CHECK_FALSE(sanitize_query("I cannot help with that.").ok());
    CHECK_FALSE(sanitize_query("```sparql\nSELECT ?x WHERE { ?x ?p \n```").ok());
    CHECK_FALSE(sanitize_query("SELECT ?x WHERE { ?x zz:p ?y }").ok());
}

TEST_CASE("schema compliance flags undeclared predicates and classes") {
    auto v = validate_schema_compliance("PREFIX ns1: <" + kNs + ">\nSELECT ?x WHERE { ?x a ns1:Bogus ; ns1:made_up ?y ; "
                                        "ns1:has_usi ?u ; <http://www.w3.org/2000/01/rdf-schema#label> ?l }",
                                        enpkg_schema());
    REQUIRE(v.size() == 2u);
    CHECK(v[0].role == "predicate");
    CHECK(v[0].iri == kNs + "made_up");
    CHECK(v[1] == Violation{kNs + "Bogus", "class"});
    CHECK_THROWS_AS(validate_schema_compliance("SELECT", enpkg_schema()), Error);
}

TEST_CASE("related schema nodes share tokens with the text") {
    auto nodes = related_schema_nodes("features with a high zodiac score", enpkg_schema());
    CHECK(std::find(nodes.begin(), nodes.end(), kNs + "has_zodiac_score") != nodes.end());
    CHECK(std::find(nodes.begin(), nodes.end(), kNs + "LCMSFeature") != nodes.end());
    CHECK(std::find(nodes.begin(), nodes.end(), kNs + "BioAssayResults") == nodes.end());
}

TEST_CASE("refinement store retrieval and withholding") {
    auto store = RefinementStore::load_csv(testing::fixture("resources/refinement_store.csv"));
    CHECK(store.size() == 4u);
    auto best = store.retrieve("Which LC-MS features have a parent mass above 700?");
    REQUIRE(best);
    CHECK(best->question == "Which LC-MS features have a parent mass above 600?");
    auto held = store.without("  which lc-ms features have a parent mass above 600? ");
    CHECK(held.size() == 3u);
    CHECK(held.retrieve("Which LC-MS features have a parent mass above 700?")->question !=
          "Which LC-MS features have a parent mass above 600?");
    CHECK_FALSE(RefinementStore{}.retrieve("x"));
}

TEST_CASE("diagnosis of an empty first attempt") {
    SparqlAttempt empty;
    empty.status = AttemptStatus::OkEmpty;
    SparqlAttempt rows;
    rows.status = AttemptStatus::OkRows;
    rows.row_count = 3;
    SparqlAttempt broken;
    broken.status = AttemptStatus::SyntaxError;
    CHECK(diagnose_empty(empty, rows) == Diagnosis::Resolved);
    CHECK(diagnose_empty(empty, empty) == Diagnosis::DataAbsent);
    CHECK(diagnose_empty(broken, broken) == Diagnosis::ConstructionError);
    CHECK(diagnose_empty(broken, rows) == Diagnosis::Resolved);
    CHECK_THROWS_AS(diagnose_empty(rows, empty), Error);
}

TEST_CASE("chain runs one generation when rows come back") {
    testing::TempDir dir;
    Scripted s{{fenced(kRight)}};
    SparqlChain chain(chain_config(s, dir / "r.csv", nullptr));
    auto out = chain.run("Which features weigh more than 600?", {});
    CHECK(out.attempts.size() == 1u);
    CHECK_FALSE(out.diagnosis);
    CHECK(out.last().status == AttemptStatus::OkRows);
    CHECK(out.last().row_count == 1u);
    CHECK(chain.generation_completions() == 1);
    CHECK(csv::read_file(dir / "r.csv").header == csv::Row{"f"});
    CHECK(s.seen[0].purpose == "sparql_generate");
    CHECK(s.seen[0].temperature == 0.0);
}

TEST_CASE("refinement happens once and carries the failure context") {
    testing::TempDir dir;
    RefinementStore store({{"Which LC-MS features have a parent mass above 600?", kRight}});
    Scripted s{{fenced(kEmpty), fenced(kRight)}};
    SparqlChain chain(chain_config(s, dir / "r.csv", &store));
    auto out = chain.run("Which LC-MS features have a parent mass above 6000?", {});
    REQUIRE(out.attempts.size() == 2u);
    CHECK(out.diagnosis == Diagnosis::Resolved);
    CHECK(chain.generation_completions() == 2);
    const auto& prompt = s.seen[1].messages[0].text;
    CHECK(s.seen[1].purpose == "sparql_refine");
    CHECK(prompt.find(kEmpty) != std::string::npos);
    CHECK(prompt.find("returned no rows") != std::string::npos);
    CHECK(prompt.find("ns1:has_parent_mass") != std::string::npos);
    CHECK(prompt.find(kRight) != std::string::npos);  // the exemplar
    CHECK_THROWS_AS(chain.refine("again", out.attempts[0]), Error);
}

TEST_CASE("syntax errors are refined, empty store refines without an example") {
    testing::TempDir dir;
    Scripted s{{"no query here", fenced(kEmpty)}};
    std::vector<std::string> events;
    auto cfg = chain_config(s, dir / "r.csv", nullptr);
    cfg.on_event = [&](const std::string& kind, const nlohmann::json&) { events.push_back(kind); };
    SparqlChain chain(std::move(cfg));
    auto out = chain.run("Which LC-MS features have a parent mass above 6000?", {});
    CHECK(out.attempts[0].status == AttemptStatus::SyntaxError);
    CHECK(out.attempts[1].status == AttemptStatus::OkEmpty);
    CHECK(out.diagnosis == Diagnosis::DataAbsent);
    CHECK(s.seen[1].messages[0].text.find("(no similar example available)") != std::string::npos);
    CHECK(std::find(events.begin(), events.end(), "warning") != events.end());
    CHECK_FALSE(std::filesystem::exists(dir / "r.csv"));
}

TEST_CASE("refine refuses a first attempt that had rows") {
    testing::TempDir dir;
    Scripted s{{fenced(kRight)}};
    SparqlChain chain(chain_config(s, dir / "r.csv", nullptr));
    auto first = chain.generate("q", {});
    CHECK_THROWS_AS(chain.refine("q", first), Error);
}

TEST_CASE("resolved entities are passed verbatim to generation") {
    testing::TempDir dir;
    Scripted s{{fenced(kRight)}};
    SparqlChain chain(chain_config(s, dir / "r.csv", nullptr));
    resolvers::ResolvedEntity tc{"T. coffeoides", resolvers::EntityKind::Taxon,
                                 "http://www.wikidata.org/entity/Q15376858", resolvers::Source::WikidataEndpoint,
                                 std::nullopt};
    auto prompt = chain.build_generation_prompt("q", {tc});
    CHECK(prompt.find("<http://www.wikidata.org/entity/Q15376858>") != std::string::npos);
    CHECK(prompt.find("ns1:has_zodiac_score") != std::string::npos);  // schema text
    CHECK(format_entity_block({}).empty());
}

TEST_CASE("endpoint failures become endpoint errors") {
    class Down final : public sparql::Endpoint {
    public:
        sparql::ResultSet select(const std::string&) override { throw Error(ErrorCode::Upstream, "down", true); }
        std::string describe() const override { return "down"; }
    } down;
    testing::TempDir dir;
    auto r = execute_query(kRight, down, dir / "x.csv");
    CHECK(r.status == AttemptStatus::EndpointError);
    CHECK(r.error.find("down") != std::string::npos);
}

TEST_CASE("chain requires its collaborators") {
    CHECK_THROWS_AS(SparqlChain(ChainConfig{}), Error);
}

TEST_CASE("prompt library") {
    const auto& p = prompts();
    for (auto ref : {"entry", "validator", "supervisor", "kg", "sparql_runner", "sparql_generate", "sparql_refine",
                     "interpreter", "judge"}) {
        CHECK_MESSAGE(p.has(ref), ref);
    }
    CHECK_THROWS_AS(p.get("missing"), Error);
}

}  // TEST_SUITE
