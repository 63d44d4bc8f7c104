#include <doctest.h>

#include <fstream>
#include <string>
#include <vector>

#include "ragjam/fixtures.hpp"
#include "ragjam/metrics.hpp"
#include "ragjam/runner.hpp"

using namespace ragjam;

namespace {

std::vector<std::string> serialize(const std::vector<RunRecord>& records) {
    std::vector<std::string> out;
    for (const auto& r : records) out.push_back(run_record_to_json(r).dump());
    return out;
}

// Raw golden lines, bypassing the parse/re-serialize round trip, so the
// comparison is against the bytes that were actually frozen.
std::vector<std::string> golden_lines(const FixtureSuite& suite) {
    std::ifstream in(suite.dir + "/golden_records.jsonl");
    REQUIRE(in);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

std::vector<RunRecord> replay(const FixtureSuite& suite) {
    Runner runner(suite.config);
    return runner.run_attacks(Provenance::deja);
}

}  // namespace

TEST_CASE("fixture suites resolve config, corpus, queries and goldens") {
    const auto suite = load_fixture_suite("converge3");
    CHECK(suite.name == "converge3");
    CHECK(suite.corpus.size() == 50);  // shared corpus, one level up
    REQUIRE(suite.queries.size() == 1);
    CHECK(suite.queries[0].id == "q1");
    CHECK(!suite.golden.empty());
    CHECK(suite.config.cache_enabled == false);
    CHECK(suite.config.evolution.rng_seed == 101);
}

TEST_CASE("convergent suite replays byte-identically to its frozen records") {
    const auto suite = load_fixture_suite("converge3");
    const auto records = replay(suite);
    CHECK(serialize(records) == golden_lines(suite));

    REQUIRE(records.size() == 1);
    const auto& r = records[0];
    CHECK(r.query_id == "q1");
    CHECK(r.kind == Provenance::deja);
    CHECK(r.final_aus == 3.05);
    CHECK(r.outcome == OutcomeClass::soft);
    CHECK(r.trajectory.termination == TerminationReason::tolerance_met);
    CHECK(r.trajectory.generations.size() == 3);
    CHECK(r.judge_calls == 16);  // 6 seeds + 2 x 5 offspring
    REQUIRE(r.adv_rank.has_value());
    CHECK(*r.adv_rank == 1);
    CHECK(r.wall_ms == 0);  // scripted runs keep records time-free
    CHECK(r.tokens.count("victim") == 1);
    CHECK(r.tokens.count("judge") == 1);
    CHECK(r.tokens.count("auxiliary") == 1);
}

TEST_CASE("stalled suite burns the full budget without converging") {
    const auto suite = load_fixture_suite("stuck");
    const auto records = replay(suite);
    CHECK(serialize(records) == golden_lines(suite));

    REQUIRE(records.size() == 1);
    const auto& r = records[0];
    CHECK(r.trajectory.termination == TerminationReason::budget_exhausted);
    CHECK(r.trajectory.generations.size() == 10);
    CHECK(r.final_aus == 4.5);
    CHECK(r.outcome == OutcomeClass::other);
    CHECK(r.judge_calls == 51);  // 6 seeds + 9 x 5 offspring
    // The budget cap binds: seeds + T*N is the contract ceiling.
    CHECK(r.judge_calls <= 6 + 10 * 5);
}

TEST_CASE("hard-failure suite recovers through feedback correction") {
    const auto suite = load_fixture_suite("hardfail");
    const auto records = replay(suite);
    CHECK(serialize(records) == golden_lines(suite));

    REQUIRE(records.size() == 1);
    const auto& r = records[0];
    CHECK(r.trajectory.termination == TerminationReason::tolerance_met);
    REQUIRE(r.trajectory.generations.size() == 2);
    CHECK(r.final_aus == 3.0);
    // The refinement between the two generations must have used the
    // diagnose-and-revise operator at least once: generation 1 contained a
    // hard failure among the parents.
    const auto& ops = r.trajectory.generations[1].operator_counts;
    REQUIRE(ops.count("feedback") == 1);
    CHECK(ops.at("feedback") >= 1);
}

TEST_CASE("replays are deterministic run over run") {
    const auto suite = load_fixture_suite("converge3");
    const auto first = serialize(replay(suite));
    const auto second = serialize(replay(suite));
    CHECK(first == second);
}
