#include <doctest.h>

#include "kgqa/core/csv.hpp"
#include "kgqa/core/error.hpp"
#include "kgqa/rdf/turtle.hpp"
#include "kgqa/wikidata/bridge.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace kgqa;
using namespace kgqa::wikidata;

namespace {

class CountingLocal final : public sparql::Endpoint {
public:
    CountingLocal()
        : inner_(std::make_shared<rdf::Graph>(rdf::load_graph(text::read_file(testing::fixture("wikidata/graph.ttl"))))) {}
    sparql::ResultSet select(const std::string& q) override {
        ++calls;
        last = q;
        return inner_.select(q);
    }
    std::string describe() const override { return "wikidata-fixture"; }
    int calls = 0;
    std::string last;

private:
    sparql::LocalGraphEndpoint inner_;
};

}  // namespace

TEST_SUITE("wikidata") {

TEST_CASE("id canonicalization") {
    const std::string q = "http://www.wikidata.org/entity/Q15376858";
    CHECK(canonicalize_id("Q15376858") == q);
    CHECK(canonicalize_id(" wd:Q15376858 ") == q);
    CHECK(canonicalize_id("<http://www.wikidata.org/entity/Q15376858>") == q);
    CHECK(canonicalize_id("https://www.wikidata.org/wiki/Q15376858") == q);
    CHECK_FALSE(canonicalize_id("P225"));
    CHECK_FALSE(canonicalize_id("Q0"));
    CHECK_FALSE(canonicalize_id("Q12x"));
    CHECK_FALSE(canonicalize_id(""));
    CHECK(numeric_id(q) == 15376858ull);
}

TEST_CASE("genus compounds on the fixture") {
    testing::TempDir dir;
    CountingLocal ep;
    auto out = genus_compounds("Q15376858", ep, dir / "wd.csv");
    REQUIRE(out);
    CHECK(out->ids == std::vector<std::string>{"http://www.wikidata.org/entity/Q90000101",
                                               "http://www.wikidata.org/entity/Q90000102",
                                               "http://www.wikidata.org/entity/Q90000105"});
    CHECK(read_ids(dir / "wd.csv") == out->ids);
    CHECK(ep.last.find("wdt:P171*") != std::string::npos);
    CHECK(ep.last.find("wd:Q34740") != std::string::npos);
    CHECK(ep.last.find("LIMIT 10000") != std::string::npos);
}

TEST_CASE("genus compounds: nothing found and malformed ids") {
    testing::TempDir dir;
    CountingLocal ep;
    CHECK_FALSE(genus_compounds("Q90000003", ep, dir / "none.csv"));
    CHECK_THROWS_AS(genus_compounds("Tabernaemontana", ep, dir / "x.csv"), Error);
    CHECK(ep.calls == 1);  // the malformed id never reached the endpoint
}

TEST_CASE("read_ids picks the id column") {
    testing::TempDir dir;
    csv::write_file(dir / "a.csv", csv::Table{{"label", "compound"}, {{"x", "wd:Q5"}, {"y", "Q3"}, {"z", "Q5"}}});
    CHECK(read_ids(dir / "a.csv") == std::vector<std::string>{"http://www.wikidata.org/entity/Q3",
                                                              "http://www.wikidata.org/entity/Q5"});
    CHECK_THROWS_AS(read_ids(dir / "missing.csv"), Error);
}

TEST_CASE("merge writes the sorted intersection") {
    testing::TempDir dir;
    csv::write_file(dir / "a.csv", csv::Table{{"id"}, {{"Q10"}, {"Q2"}, {"Q7"}}});
    csv::write_file(dir / "b.csv", csv::Table{{"id"}, {{"http://www.wikidata.org/entity/Q7"}, {"wd:Q10"}, {"Q99"}}});
    merge_outputs(dir / "a.csv", dir / "b.csv", dir / "m.csv");
    auto m = csv::read_file(dir / "m.csv");
    CHECK(m.header == csv::Row{"wikidata_id"});
    REQUIRE(m.rows.size() == 2u);
    CHECK(m.rows[0][0] == "http://www.wikidata.org/entity/Q7");
    CHECK(m.rows[1][0] == "http://www.wikidata.org/entity/Q10");
}

TEST_CASE("merge matches the brute-force oracle on random pairs") {
    testing::TempDir dir;
    std::ostringstream log;
    CHECK(testing::merger_oracle_mismatches(7, 300, dir.path(), &log) == 0);
    INFO(log.str());
}

}  // TEST_SUITE
