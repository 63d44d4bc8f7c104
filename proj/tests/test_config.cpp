#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "ragjam/config.hpp"
#include "ragjam/error.hpp"

using namespace ragjam;
using nlohmann::json;

namespace {

std::string temp_path(const char* stem) {
    return std::string("build/") + stem + "-" +
           std::to_string(std::random_device{}()) + ".json";
}

}  // namespace

TEST_CASE("an empty config object yields the documented defaults") {
    const RunConfig cfg = config_from_json(json::object());
    CHECK(cfg.embedder_dim == 512);
    CHECK(cfg.retrieval_k == 4);
    CHECK(cfg.isolate == true);
    CHECK(cfg.rsr_cutoff == 5);
    CHECK(cfg.cache_enabled == true);
    CHECK(cfg.run_count == 1);
    CHECK(cfg.worker_count == 1);
    CHECK(cfg.anchor_mode == AnchorMode::with_query);
    CHECK(cfg.clean_gate_threshold == 4.0);
    CHECK(cfg.skip_clean_gate == false);
    CHECK(cfg.evolution.max_generations == 10);
    CHECK(cfg.evolution.population_size == 5);
    CHECK(cfg.evolution.parent_count == 3);
    CHECK(cfg.evolution.init_seed_count == 6);
    CHECK(cfg.evolution.tolerance == 0.1);
    CHECK(cfg.fitness.tau_soft == 3.0);
    CHECK(cfg.fitness.tau_lower == 2.0);
    CHECK(cfg.fitness.tau_upper == 3.5);
    CHECK(cfg.fitness.lambda == 1.5);
    CHECK(cfg.fitness.epsilon == 0.01);
    CHECK(cfg.sweep_ks == std::vector<int>{4, 6, 8, 10});
}

TEST_CASE("configs survive a JSON round trip") {
    RunConfig cfg;
    cfg.providers[LlmRole::victim] = {"openai", "gpt-x", "https://api.example",
                                      "RAGJAM_VICTIM_API_KEY", 30.0, "hash"};
    cfg.providers[LlmRole::judge] = {"scripted", "", "", "", 0.0, "constant:-1.5"};
    cfg.transcript_path = "transcript.jsonl";
    cfg.embedder_dim = 256;
    cfg.fitness.tau_soft = 3.1;
    cfg.evolution.rng_seed = 99;
    cfg.evolution.max_generations = 4;
    cfg.retrieval_k = 6;
    cfg.isolate = false;
    cfg.corpus_path = "corpus.jsonl";
    cfg.queries_path = "queries.jsonl";
    cfg.out_dir = "results";
    cfg.cache_enabled = false;
    cfg.run_count = 3;
    cfg.anchor_mode = AnchorMode::without_query;
    cfg.paraphrase_n = 5;
    cfg.sweep_ks = {2, 4};
    cfg.warning_lexicon = {"alpha", "beta"};

    const json j = config_to_json(cfg);
    const RunConfig back = config_from_json(j);
    CHECK(config_to_json(back).dump() == j.dump());
    CHECK(back.providers.at(LlmRole::victim).api_key_env ==
          "RAGJAM_VICTIM_API_KEY");
    CHECK(back.providers.at(LlmRole::judge).logprob_mode == "constant:-1.5");
    CHECK(back.anchor_mode == AnchorMode::without_query);
    CHECK(back.cache_enabled == false);
}

TEST_CASE("embedder id names the algorithm and dimension") {
    RunConfig cfg;
    CHECK(cfg.embedder_id() == "fnv-bow-512");
    cfg.embedder_dim = 256;
    CHECK(cfg.embedder_id() == "fnv-bow-256");
}

TEST_CASE("the fingerprint tracks result-shaping knobs only") {
    RunConfig cfg;
    const std::string fp = cfg.fingerprint();
    CHECK(fp.rfind("tpl-v1+fnv-bow-512+", 0) == 0);
    CHECK(fp == cfg.fingerprint());  // stable

    RunConfig seeded = cfg;
    seeded.evolution.rng_seed = 42;
    CHECK(seeded.fingerprint() != fp);

    RunConfig wider = cfg;
    wider.retrieval_k = 8;
    CHECK(wider.fingerprint() != fp);

    RunConfig unanchored = cfg;
    unanchored.anchor_mode = AnchorMode::without_query;
    CHECK(unanchored.fingerprint() != fp);

    // File locations do not affect what the run computes.
    RunConfig moved = cfg;
    moved.corpus_path = "elsewhere/corpus.jsonl";
    moved.out_dir = "elsewhere/out";
    CHECK(moved.fingerprint() == fp);
}

TEST_CASE("invalid settings are rejected with config errors") {
    SUBCASE("unknown provider kind") {
        const json j = {{"providers", {{"victim", {{"kind", "azure"}}}}}};
        CHECK_THROWS_AS(config_from_json(j), Error);
    }
    SUBCASE("unknown anchor mode") {
        const json j = {{"anchor_mode", "sideways"}};
        CHECK_THROWS_AS(config_from_json(j), Error);
    }
    SUBCASE("fitness band out of order") {
        const json j = {{"fitness", {{"tau_lower", 3.6}}}};
        CHECK_THROWS_AS(config_from_json(j), Error);
    }
    SUBCASE("non-positive counters") {
        CHECK_THROWS_AS(config_from_json({{"retrieval_k", 0}}), Error);
        CHECK_THROWS_AS(config_from_json({{"run_count", 0}}), Error);
        CHECK_THROWS_AS(config_from_json({{"worker_count", -1}}), Error);
        CHECK_THROWS_AS(config_from_json({{"paraphrase_n", 0}}), Error);
        CHECK_THROWS_AS(
            config_from_json({{"evolution", {{"population_size", 0}}}}), Error);
    }
}

TEST_CASE("config files load with path-tagged diagnostics") {
    const std::string good = temp_path("config-good");
    std::ofstream(good) << R"({"retrieval_k": 7, "cache_enabled": false})";
    const RunConfig cfg = load_config(good);
    CHECK(cfg.retrieval_k == 7);
    CHECK(cfg.cache_enabled == false);
    std::remove(good.c_str());

    try {
        load_config("build/no-such-config.json");
        FAIL("expected io_failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io_failure);
    }

    const std::string bad = temp_path("config-bad");
    std::ofstream(bad) << "{ this is not json";
    try {
        load_config(bad);
        FAIL("expected config_invalid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config_invalid);
        CHECK(std::string(e.what()).find(bad) != std::string::npos);
    }
    std::remove(bad.c_str());
}
