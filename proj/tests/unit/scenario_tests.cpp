#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bvp/scenario.hpp"

#include "json.hpp"

using namespace bvp;

namespace {

std::string minimal = R"({
  "schema": "bvp-scenario/1",
  "election": {"n": 5, "k": 2}
})";

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("a minimal scenario parses with documented defaults") {
    ParsedScenario parsed = parse_scenario(minimal);
    const Scenario& s = parsed.scenario;
    CHECK(s.config.n == 5);
    CHECK(s.config.k == 2);
    CHECK(s.config.extras == 2);
    CHECK(s.roster.size() == 5);
    CHECK(s.roster[3].preference == 1);  // round-robin default
    CHECK(s.config.physical.nominal_weight_g == 4.0);
    CHECK(s.config.physical.pattern_space == 1000);
    CHECK(s.config.physical.stamp_charges == 3);
    CHECK(s.trials == 1000);
    CHECK_FALSE(s.spb);

    // Every applied default is echoed as a provenance note.
    bool roster_noted = false;
    for (const auto& note : parsed.notes)
        if (note.find("roster: defaulted") != std::string::npos) roster_noted = true;
    CHECK(roster_noted);
    CHECK(parsed.notes.size() >= 10);
}

TEST_CASE("out-of-range probabilities are rejected with the field name") {
    std::string bad = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "roster": [
        {"preference": 0, "p_forget": 1.5}, {"preference": 1}, {"preference": 0},
        {"preference": 1}, {"preference": 0}
      ]
    })";
    CHECK_THROWS_AS(parse_scenario(bad), SimError);
    try {
        parse_scenario(bad);
    } catch (const SimError& e) {
        CHECK(e.code() == Err::ValidationError);
        CHECK(std::string(e.what()).find("p_forget") != std::string::npos);
    }
}

TEST_CASE("the arity bound is enforced at parse time") {
    std::string seven = R"({"schema": "bvp-scenario/1", "election": {"n": 5, "k": 7}})";
    try {
        parse_scenario(seven);
        FAIL("expected a validation error");
    } catch (const SimError& e) {
        CHECK(e.code() == Err::ValidationError);
        CHECK(std::string(e.what()).find("k-ary") != std::string::npos);
    }
}

TEST_CASE("unknown keys and sections are rejected") {
    std::string extra_key = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2, "voters": 5}
    })";
    CHECK_THROWS_AS(parse_scenario(extra_key), SimError);

    std::string extra_section = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "misc": {}
    })";
    CHECK_THROWS_AS(parse_scenario(extra_section), SimError);

    std::string wrong_schema = R"({"schema": "bvp-scenario/2", "election": {"n": 5, "k": 2}})";
    CHECK_THROWS_AS(parse_scenario(wrong_schema), SimError);

    CHECK_THROWS_AS(parse_scenario("not json at all"), SimError);
    try {
        parse_scenario("{");
    } catch (const SimError& e) {
        CHECK(e.code() == Err::ParseError);
    }
}

TEST_CASE("strategies parse with preconditions checked") {
    std::string chain = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "roster": [
        {"role": "malicious", "preference": 0},
        {"role": "coerced", "preference": 1, "demand": 0, "adversary": 0},
        {"preference": 0}, {"preference": 1}, {"preference": 0}
      ],
      "strategies": [
        {"type": "chain_voting", "actor": 0, "target": 1, "demand": 0, "p_detect": 0.9}
      ]
    })";
    Scenario s = parse_scenario(chain).scenario;
    REQUIRE(s.strategies.size() == 1);
    CHECK(s.strategies[0].kind == StrategyKind::ChainVoting);
    CHECK(s.strategies[0].p_detect == 0.9);

    // Attaching an unknown strategy name is a configuration error.
    std::string unknown = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "strategies": [{"type": "ballot_eating", "actor": 0}]
    })";
    CHECK_THROWS_AS(parse_scenario(unknown), SimError);

    // A strategy violating its precondition fails at parse (attach) time.
    std::string bad_target = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "roster": [
        {"role": "malicious", "preference": 0}, {"preference": 1}, {"preference": 0},
        {"preference": 1}, {"preference": 0}
      ],
      "strategies": [{"type": "chain_voting", "actor": 0, "target": 1, "demand": 0}]
    })";
    CHECK_THROWS_AS(parse_scenario(bad_target), SimError);
}

TEST_CASE("sweep axes validate their paths up front") {
    std::string sweep = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "run": {"trials": 10, "seed": 7, "sweep": [{"path": "physical.p_peek", "values": [0, 0.5]}]}
    })";
    Scenario s = parse_scenario(sweep).scenario;
    REQUIRE(s.sweep.size() == 1);
    CHECK(s.sweep[0].values.size() == 2);

    std::string bad = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "run": {"sweep": [{"path": "physical.gravity", "values": [9.8]}]}
    })";
    CHECK_THROWS_AS(parse_scenario(bad), SimError);
}

TEST_CASE("the published schema is valid JSON covering all sections") {
    auto doc = nlohmann::json::parse(scenario_schema_text());
    CHECK(doc.at("schema") == "bvp-scenario/1");
    for (const char* section :
         {"election", "physical", "detection", "roster", "strategies", "run"})
        CHECK(doc.at("sections").contains(section));
}

TEST_CASE("every shipped scenario validates against the schema and parses") {
    auto schema = nlohmann::json::parse(scenario_schema_text());
    const auto& sections = schema.at("sections");
    std::filesystem::path dir = BVP_SCENARIO_DIR;
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".scn") continue;
        ++seen;
        INFO("scenario file: " << entry.path());
        std::string text = read_file(entry.path());
        CHECK_NOTHROW(parse_scenario(text));

        // Schema round trip: every key used in the file is in the schema.
        auto doc = nlohmann::json::parse(text, nullptr, true, true);
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (it.key() == "schema") continue;
            REQUIRE(sections.contains(it.key()));
            const auto& section_schema = sections.at(it.key());
            if (it.value().is_object()) {
                for (auto kit = it.value().begin(); kit != it.value().end(); ++kit)
                    CHECK(section_schema.contains(kit.key()));
            } else if (it.value().is_array() && section_schema.contains("item_fields")) {
                for (const auto& item : it.value())
                    for (auto fit = item.begin(); fit != item.end(); ++fit)
                        CHECK(section_schema.at("item_fields").contains(fit.key()));
            }
        }
    }
    CHECK(seen >= 3);  // the repo ships several example scenarios
}

TEST_CASE("spb scenarios skip bvp1-only strategy preconditions") {
    std::string spb = R"({
      "schema": "bvp-scenario/1",
      "election": {"n": 5, "k": 2},
      "physical": {"p_peek": 0.8},
      "run": {"protocol": "spb", "trials": 10}
    })";
    Scenario s = parse_scenario(spb).scenario;
    CHECK(s.spb);
    CHECK(s.config.physical.p_peek == 0.8);
}
