#include <doctest.h>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "ragjam/defenses.hpp"
#include "ragjam/error.hpp"
#include "ragjam/gateway.hpp"

using namespace ragjam;

namespace {

// Victim-side scorer with a fixed per-token log-probability (or the default
// hash-derived one when mode is empty).
Gateway scoring_gateway(const std::string& logprob_mode = "") {
    GatewayConfig gc;
    gc.sleeper = [](int) {};
    Gateway gw(gc);
    ScriptedTranscript t;  // no completions needed, scoring only
    auto provider = logprob_mode.empty()
                        ? std::make_shared<ScriptedProvider>(t)
                        : std::make_shared<ScriptedProvider>(t, logprob_mode);
    gw.set_provider(LlmRole::victim, provider);
    return gw;
}

}  // namespace

TEST_CASE("perplexity is exp of minus the mean token logprob") {
    Gateway gw = scoring_gateway("constant:-1.5");
    CHECK(perplexity(gw, LlmRole::victim, "alpha beta gamma") ==
          doctest::Approx(std::exp(1.5)).epsilon(1e-12));

    Gateway gw2 = scoring_gateway("constant:-2");
    // Token count cancels out under a constant logprob.
    CHECK(perplexity(gw2, LlmRole::victim, "one") ==
          doctest::Approx(std::exp(2.0)).epsilon(1e-12));
    CHECK(perplexity(gw2, LlmRole::victim, "one two three four") ==
          doctest::Approx(std::exp(2.0)).epsilon(1e-12));
}

TEST_CASE("hash-mode perplexity stays inside the logprob band") {
    Gateway gw = scoring_gateway();  // hash mode: logprobs in [-3, -1)
    const double p = perplexity(gw, LlmRole::victim, "granite ridge elevation");
    CHECK(p > std::exp(1.0));
    CHECK(p <= std::exp(3.0));
    // Same text, same score: the hash has no hidden state.
    CHECK(perplexity(gw, LlmRole::victim, "granite ridge elevation") == p);
}

TEST_CASE("perplexity rejects text without tokens") {
    Gateway gw = scoring_gateway();
    CHECK_THROWS_AS(perplexity(gw, LlmRole::victim, ""), Error);
    try {
        perplexity(gw, LlmRole::victim, "   ");  // non-empty, zero tokens
        FAIL("expected empty_input");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_input);
    }
}

TEST_CASE("roc_auc is the exact pairwise rank statistic") {
    SUBCASE("perfect separation") {
        CHECK(roc_auc({1.0, 2.0, 3.0}, {4.0, 5.0}).auc == 1.0);
    }
    SUBCASE("identical distributions are chance") {
        CHECK(roc_auc({2.0, 2.0}, {2.0, 2.0}).auc == 0.5);
    }
    SUBCASE("ties count half") {
        // adv {2,3,4} vs clean {1,2,3}: 6 wins, 2 ties of 9 pairs.
        CHECK(roc_auc({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}).auc ==
              doctest::Approx(7.0 / 9.0).epsilon(1e-15));
    }
    SUBCASE("swapping the lists mirrors the statistic") {
        const std::vector<double> clean = {0.4, 1.1, 2.0, 2.0, 3.7};
        const std::vector<double> adv = {1.1, 2.5, 3.9};
        CHECK(roc_auc(clean, adv).auc + roc_auc(adv, clean).auc ==
              doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("either list empty is an error") {
        CHECK_THROWS_AS(roc_auc({}, {1.0}), Error);
        CHECK_THROWS_AS(roc_auc({1.0}, {}), Error);
    }
}

TEST_CASE("roc curve runs from the origin to (1,1) monotonically") {
    const auto roc = roc_auc({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0});
    REQUIRE(roc.points.size() >= 2);
    CHECK(roc.points.front() == std::pair{0.0, 0.0});
    CHECK(roc.points.back() == std::pair{1.0, 1.0});
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        CHECK(roc.points[i].first >= roc.points[i - 1].first);
        CHECK(roc.points[i].second >= roc.points[i - 1].second);
    }
}

TEST_CASE("perplexity records deduplicate by exact text") {
    Gateway gw = scoring_gateway("constant:-1");
    const std::vector<Document> docs = {
        {"c1", "the river floods in spring", Provenance::benign},
        {"a1", "an unverifiable account of the river", Provenance::deja},
        {"c2", "the river floods in spring", Provenance::benign},  // dup of c1
    };
    const auto records = perplexity_records(gw, LlmRole::victim, docs);
    REQUIRE(records.size() == 2);
    CHECK(records[0].doc_id == "c1");
    CHECK(records[0].provenance == Provenance::benign);
    CHECK(records[1].doc_id == "a1");
    CHECK(records[1].provenance == Provenance::deja);
    CHECK(records[0].perplexity == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("paraphrase defense yields n rewrites with derived ids") {
    GatewayConfig gc;
    gc.sleeper = [](int) {};
    Gateway gw(gc);
    ScriptedTranscript t;
    t.entries.push_back({"Rewrite the question below in",
                         "  How tall is the ridge?  \n\n"
                         "What is the ridge's height?\n"
                         "Give the ridge elevation.\n"
                         "A fourth rewrite that exceeds the request.",
                         {}, {}});
    gw.set_provider(LlmRole::auxiliary,
                    std::make_shared<ScriptedProvider>(std::move(t)));

    const Query q{"q9", "How high is the ridge?", std::string("1200 m")};
    const auto out = paraphrase_queries(gw, q, 3);
    REQUIRE(out.size() == 3);  // capped at n even with extra lines
    CHECK(out[0].id == "q9#para1");
    CHECK(out[0].text == "How tall is the ridge?");  // trimmed, blanks skipped
    CHECK(out[1].id == "q9#para2");
    CHECK(out[2].id == "q9#para3");
    for (const auto& p : out) CHECK(p.gold_answer == q.gold_answer);

    CHECK_THROWS_AS(paraphrase_queries(gw, q, 0), Error);
}

TEST_CASE("a paraphraser that returns nothing usable is an error") {
    GatewayConfig gc;
    gc.sleeper = [](int) {};
    Gateway gw(gc);
    ScriptedTranscript t;
    t.entries.push_back({"", "\n   \n\n", {}, {}});
    gw.set_provider(LlmRole::auxiliary,
                    std::make_shared<ScriptedProvider>(std::move(t)));
    try {
        paraphrase_queries(gw, Query{"q1", "anything", {}}, 2);
        FAIL("expected generation_failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::generation_failure);
    }
}

TEST_CASE("default retrieval sweep widths are the even ladder") {
    CHECK(kDefaultSweepKs == std::vector<int>{4, 6, 8, 10});
}
