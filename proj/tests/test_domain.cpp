#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "ragjam/domain.hpp"
#include "ragjam/error.hpp"
#include "ragjam/judge.hpp"

using namespace ragjam;

namespace {

// Straight-line re-derivation of the score-to-fitness map, kept deliberately
// naive so the production implementation has something independent to match.
double fitness_by_hand(double u, const FitnessConfig& cfg) {
    double d = u - cfg.tau_soft;
    if (d < 0) d = -d;
    if (u > cfg.tau_upper) d = d * cfg.lambda;
    return 1.0 / (d + cfg.epsilon);
}

std::string temp_path(const char* stem) {
    return std::string("build/") + stem + "-" +
           std::to_string(std::random_device{}()) + ".jsonl";
}

}  // namespace

TEST_CASE("fitness peaks at the target utility and matches hand values") {
    FitnessConfig cfg;

    CHECK(fitness(AusScore(3.0), cfg).fitness == 100.0);  // exact: 1/epsilon

    CHECK(fitness(AusScore(4.0), cfg).fitness ==
          doctest::Approx(0.6622516556291391).epsilon(1e-12));
    CHECK(fitness(AusScore(2.0), cfg).fitness ==
          doctest::Approx(0.9900990099009901).epsilon(1e-12));
    CHECK(fitness(AusScore(4.5), cfg).fitness ==
          doctest::Approx(1.0 / 2.26).epsilon(1e-12));
    CHECK(fitness(AusScore(1.3), cfg).fitness ==
          doctest::Approx(1.0 / 1.71).epsilon(1e-12));
    CHECK(fitness(AusScore(5.0), cfg).fitness ==
          doctest::Approx(1.0 / 3.01).epsilon(1e-12));

    CHECK(fitness(AusScore(3.0), cfg).penalized == false);
    CHECK(fitness(AusScore(3.5), cfg).penalized == false);  // boundary: not over
    CHECK(fitness(AusScore(3.500001), cfg).penalized == true);
}

TEST_CASE("fitness equals a straight-line reimplementation across the range") {
    FitnessConfig cfg;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(kAusMin, kAusMax);
    for (int i = 0; i < 1000; ++i) {
        const double u = dist(rng);
        const double expect = fitness_by_hand(u, cfg);
        const double got = fitness(AusScore(u), cfg).fitness;
        CHECK(std::abs(got - expect) <= 1e-12 * expect);
    }
}

TEST_CASE("over-informative responses score strictly worse than symmetric hedges") {
    // For the same distance d from the target, u = tau_soft + d is penalized
    // once it clears tau_upper, while u = tau_soft - d never is.
    FitnessConfig cfg;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.5, 2.0);
    for (int i = 0; i < 200; ++i) {
        double d = dist(rng);
        if (d <= 0.5) d = 0.500001;  // open lower bound
        const double above = fitness(AusScore(cfg.tau_soft + d), cfg).fitness;
        const double below = fitness(AusScore(cfg.tau_soft - d), cfg).fitness;
        CHECK(above < below);
    }
    // At or inside the upper threshold the map is symmetric again.
    CHECK(fitness(AusScore(3.4), cfg).fitness ==
          doctest::Approx(fitness(AusScore(2.6), cfg).fitness).epsilon(1e-12));
}

TEST_CASE("outcome classification bands") {
    FitnessConfig cfg;
    CHECK(classify_outcome(AusScore(1.0), cfg) == OutcomeClass::hard);
    CHECK(classify_outcome(AusScore(1.999), cfg) == OutcomeClass::hard);
    CHECK(classify_outcome(AusScore(2.0), cfg) == OutcomeClass::soft);  // inclusive
    CHECK(classify_outcome(AusScore(3.0), cfg) == OutcomeClass::soft);
    CHECK(classify_outcome(AusScore(3.5), cfg) == OutcomeClass::soft);  // inclusive
    CHECK(classify_outcome(AusScore(3.51), cfg) == OutcomeClass::other);
    CHECK(classify_outcome(AusScore(5.0), cfg) == OutcomeClass::other);
}

TEST_CASE("utility scores outside the rubric range are rejected") {
    CHECK_THROWS_AS(AusScore(0.99), Error);
    CHECK_THROWS_AS(AusScore(5.01), Error);
    CHECK_NOTHROW(AusScore(1.0));
    CHECK_NOTHROW(AusScore(5.0));
}

TEST_CASE("adversarial document assembly joins non-empty parts with newlines") {
    const auto full = make_adversarial("Q text", "H text", "P text");
    CHECK(full.assembled == "Q text\nH text\nP text");
    CHECK(full.query_anchor == "Q text");
    CHECK(full.hook == "H text");
    CHECK(full.payload == "P text");

    // No-anchor ablation and hookless baselines must not leave blank lines.
    CHECK(make_adversarial("", "H", "P").assembled == "H\nP");
    CHECK(make_adversarial("Q", "", "P").assembled == "Q\nP");

    const auto parts = split_adversarial(full.assembled);
    CHECK(parts.query_anchor == "Q text");
    CHECK(parts.hook == "H text");
    CHECK(parts.payload == "P text");
}

TEST_CASE("strategy set is closed, ordered, and round-trips by tag name") {
    const auto& set = strategy_set();
    REQUIRE(set.size() == 6);
    for (const auto& s : set) {
        CHECK(!s.title.empty());
        CHECK(!s.description.empty());
        CHECK(strategy_tag_from_name(strategy_tag_name(s.tag)) == s.tag);
        CHECK(strategy_by_tag(s.tag).title == s.title);
    }
    CHECK_THROWS_AS(strategy_tag_from_name("nope"), Error);
}

TEST_CASE("config validation rejects inverted thresholds and bad budgets") {
    FitnessConfig f;
    f.tau_lower = 3.6;  // lower above soft
    CHECK_THROWS_AS(f.validate(), Error);

    FitnessConfig f2;
    f2.epsilon = 0.0;
    CHECK_THROWS_AS(f2.validate(), Error);

    EvolutionConfig e;
    e.population_size = 0;
    CHECK_THROWS_AS(e.validate(), Error);

    EvolutionConfig e2;
    e2.init_seed_count = 3;  // fewer seeds than population slots
    e2.population_size = 5;
    CHECK_THROWS_AS(e2.validate(), Error);

    EvolutionConfig e3;
    e3.parent_count = 9;  // parents exceed population
    CHECK_THROWS_AS(e3.validate(), Error);
}

TEST_CASE("corpus JSONL round-trips and rejects duplicates") {
    const std::string path = temp_path("corpus-roundtrip");
    std::vector<Document> docs{{"a", "alpha text", Provenance::benign},
                               {"b", "beta text", Provenance::benign}};
    save_corpus(docs, path);
    const auto loaded = load_corpus(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].id == "a");
    CHECK(loaded[1].text == "beta text");

    {
        std::ofstream out(path, std::ios::app);
        out << R"({"id": "a", "text": "duplicate"})" << "\n";
    }
    CHECK_THROWS_AS(load_corpus(path), Error);
    std::remove(path.c_str());
}

TEST_CASE("query JSONL loading keeps optional answers and rejects empties") {
    const std::string path = temp_path("queries");
    {
        std::ofstream out(path);
        out << R"({"id": "q1", "query": "What is north?", "answer": "up"})" << "\n";
        out << R"({"id": "q2", "query": "What is south?"})" << "\n";
    }
    const auto qs = load_queries(path);
    REQUIRE(qs.size() == 2);
    CHECK(qs[0].gold_answer.has_value());
    CHECK(*qs[0].gold_answer == "up");
    CHECK(!qs[1].gold_answer.has_value());

    {
        std::ofstream out(path, std::ios::app);
        out << R"({"id": "q3", "query": ""})" << "\n";
    }
    CHECK_THROWS_AS(load_queries(path), Error);
    std::remove(path.c_str());
}

TEST_CASE("provenance names round-trip") {
    for (auto p : {Provenance::benign, Provenance::deja,
                   Provenance::prompt_injection, Provenance::heuristic_payload})
        CHECK(provenance_from_name(provenance_name(p)) == p);
    CHECK_THROWS_AS(provenance_from_name("bogus"), Error);
}
