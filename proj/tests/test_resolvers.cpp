#include <doctest.h>

#include "kgqa/core/error.hpp"
#include "kgqa/core/http.hpp"
#include "kgqa/rdf/turtle.hpp"
#include "kgqa/resolvers/entity.hpp"
#include "kgqa/resolvers/local.hpp"
#include "kgqa/resolvers/remote.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace kgqa;
using namespace kgqa::resolvers;

namespace {

std::shared_ptr<sparql::Endpoint> fixture_wikidata() {
    return std::make_shared<sparql::LocalGraphEndpoint>(std::make_shared<rdf::Graph>(
        rdf::load_graph(text::read_file(testing::fixture("wikidata/graph.ttl")))));
}

std::shared_ptr<http::Transport> fixture_http() { return http::FixtureTransport::load(testing::fixture("http/routes.json")); }

}  // namespace

TEST_SUITE("resolvers") {

TEST_CASE("plant names are normalized before lookup") {
    CHECK(normalize_plant_name("  Tabernaemontana   COFFEOIDES ") == "tabernaemontana coffeoides");
    auto db = PlantDb::load(testing::fixture("resources/plants.csv"), "plant_name");
    CHECK(db.size() == 5u);
    CHECK(check_plant("tabernaemontana  coffeoides", db) == PlantPresence::Present);
    CHECK(db.canonical("MELOCHIA umbellata") == "Melochia umbellata");
    CHECK(check_plant("Tabernaemontana", db) == PlantPresence::Absent);
    CHECK(check_plant("   ", db) == PlantPresence::Absent);
}

TEST_CASE("plant database load errors") {
    try {
        PlantDb::load("/nonexistent/plants.csv", "plant_name");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
        CHECK(std::string(e.what()).find("/nonexistent/plants.csv") != std::string::npos);
    }
    try {
        PlantDb::load(testing::fixture("resources/plants.csv"), "species");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Config);
    }
}

TEST_CASE("chemical classes resolve by trigram similarity") {
    auto index = ChemicalIndex::load(testing::fixture("resources/npc_classes.csv"));
    auto r = resolve_chemical_class("aspidosperma-type alkaloids", index);
    REQUIRE(r.matched());
    CHECK(r.entity->identifier == "https://enpkg.commons-lab.org/kg/npc_Aspidosperma_type");
    CHECK(r.entity->source == Source::ChemicalIndex);
    CHECK(*r.entity->score >= kChemicalMatchThreshold);
    auto none = resolve_chemical_class("xyzzy quux", index);
    CHECK_FALSE(none.matched());
    CHECK_FALSE(none.detail.empty());
    CHECK(resolve_chemical_class("", index).detail == "empty chemical name");
}

TEST_CASE("identifier validators") {
    CHECK(is_valid_inchikey("SIKJAQJRHWYJAI-UHFFFAOYSA-N"));
    CHECK_FALSE(is_valid_inchikey("SIKJAQJRHWYJAI-UHFFFAOYSA"));
    CHECK_FALSE(is_valid_inchikey("sikjaqjrhwyjai-uhffffaoysa-n"));
    CHECK(is_valid_iri("http://www.wikidata.org/entity/Q1"));
    CHECK_FALSE(is_valid_iri("Q1"));
    CHECK_FALSE(is_valid_iri("http://a b"));
}

TEST_CASE("SMILES resolve through the GNPS mock") {
    SmilesResolver r("https://structure.gnps2.org", fixture_http());
    auto e = r.resolve("c1ccc2c(c1)cc[nH]2");
    CHECK(e.identifier == "SIKJAQJRHWYJAI-UHFFFAOYSA-N");
    CHECK(e.kind == EntityKind::Structure);
    CHECK(e.source == Source::GnpsApi);
    try {
        r.resolve("not a smiles");
        FAIL("expected an error");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::Upstream);
        CHECK_FALSE(err.retriable());
    }
    CHECK_THROWS_AS(r.resolve(""), Error);
}

TEST_CASE("targets resolve through the ChEMBL mock") {
    TargetResolver r("https://www.ebi.ac.uk/chembl/api/data", fixture_http());
    auto l = r.resolve("Leishmania donovani");
    REQUIRE(l.matched());
    CHECK(l.entity->identifier == "https://www.ebi.ac.uk/chembl/target_report_card/CHEMBL367");
    auto a = r.resolve("acetylcholinesterase");
    REQUIRE(a.matched());
    CHECK(a.entity->identifier == "https://www.ebi.ac.uk/chembl/target_report_card/CHEMBL220");
    auto none = r.resolve("unobtainium receptor");
    CHECK_FALSE(none.matched());
    CHECK(none.detail.find("unobtainium receptor") != std::string::npos);
}

TEST_CASE("target resolver prefers the exact preferred name") {
    auto t = std::make_shared<http::FunctionTransport>([](const http::Request&) {
        return http::Response{200,
                              "<response><targets>"
                              "<target><target_chembl_id>CHEMBL1</target_chembl_id><pref_name>Other</pref_name></target>"
                              "<target><target_chembl_id>CHEMBL2</target_chembl_id><pref_name>Kinase X</pref_name></target>"
                              "</targets></response>",
                              "application/xml"};
    });
    TargetResolver r("https://chembl.mock", t);
    CHECK(r.resolve("kinase x").entity->identifier == std::string(kChemblTargetIriPrefix) + "CHEMBL2");
    CHECK(r.resolve("kinase").entity->identifier == std::string(kChemblTargetIriPrefix) + "CHEMBL1");
    CHECK(t->requests().at(0).url == "https://chembl.mock/target/search?q=kinase%20x");
}

TEST_CASE("taxa resolve on the Wikidata fixture") {
    TaxonResolver r(fixture_wikidata());
    auto tc = r.resolve("Tabernaemontana coffeoides");
    REQUIRE(tc.matched());
    CHECK(tc.entity->identifier == "http://www.wikidata.org/entity/Q15376858");
    CHECK(tc.entity->source == Source::WikidataEndpoint);
    // English label fallback
    CHECK(r.resolve("crape jasmine").entity->identifier == "http://www.wikidata.org/entity/Q90000002");
    CHECK_FALSE(r.resolve("Nonexistent plantus").matched());
    try {
        r.resolve("Duplicata ambigua");
        FAIL("expected an ambiguity error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidInput);
        CHECK(std::string(e.what()).find("Q90000201") != std::string::npos);
        CHECK(std::string(e.what()).find("Q90000202") != std::string::npos);
    }
}

TEST_CASE("taxon names are escaped in the query") {
    TaxonResolver r(fixture_wikidata());
    CHECK(r.build_query("a\"b").find("\"a\\\"b\"") != std::string::npos);
    CHECK(sparql_string_literal("x\\y\n") == "\"x\\\\y\\n\"");
}

TEST_CASE("entity json round trip") {
    ResolvedEntity e{"aspidosperma", EntityKind::ChemicalClass, "https://x/npc", Source::ChemicalIndex, 0.42};
    CHECK(entity_from_json(to_json(e)) == e);
    CHECK(parse_entity_kind("chemical_class") == EntityKind::ChemicalClass);
    CHECK_THROWS_AS(parse_entity_kind("protein"), Error);
}

TEST_CASE("resolvers never emit identifiers absent from their payloads") {
    std::ostringstream log;
    CHECK(testing::resolver_provenance_violations(20261018, 200, &log) == 0);
    INFO(log.str());
}

}  // TEST_SUITE
