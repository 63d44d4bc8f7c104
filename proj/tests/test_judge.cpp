#include <doctest.h>

#include <memory>
#include <string>

#include "ragjam/error.hpp"
#include "ragjam/gateway.hpp"
#include "ragjam/judge.hpp"

using namespace ragjam;

namespace {

Gateway judge_gateway(std::vector<std::string> replies) {
    ScriptedTranscript t;
    for (auto& r : replies) t.entries.push_back({"", std::move(r), {}, {}});
    GatewayConfig gc;
    gc.sleeper = [](int) {};
    Gateway gw(std::move(gc));
    gw.set_provider(LlmRole::judge,
                    std::make_shared<ScriptedProvider>(std::move(t)));
    return gw;
}

const Query kQuery{"q1", "How high is the pass?", {}};

}  // namespace

TEST_CASE("judge replies parse from bare, wrapped, and fenced JSON") {
    double score = 0.0;
    std::string rationale;

    CHECK(parse_judge_reply(R"({"score": 3.4, "rationale": "hedges"})", score,
                            rationale));
    CHECK(score == 3.4);
    CHECK(rationale == "hedges");

    CHECK(parse_judge_reply(
        "Sure! Here is my grading:\n{\"score\": 2.0, \"rationale\": \"thin\"}\nHope it helps.",
        score, rationale));
    CHECK(score == 2.0);

    CHECK(parse_judge_reply("```json\n{\"score\": 4.25}\n```", score, rationale));
    CHECK(score == 4.25);
    CHECK(rationale.empty());  // rationale optional

    // Numeric strings are tolerated; judges love quoting numbers.
    CHECK(parse_judge_reply(R"({"score": "4.5"})", score, rationale));
    CHECK(score == 4.5);
}

TEST_CASE("unusable judge replies are rejected") {
    double score = 0.0;
    std::string rationale;
    CHECK(!parse_judge_reply("no json at all", score, rationale));
    CHECK(!parse_judge_reply(R"({"rationale": "missing score"})", score, rationale));
    CHECK(!parse_judge_reply(R"({"score": "not a number"})", score, rationale));
    CHECK(!parse_judge_reply(R"({"score": [3.0]})", score, rationale));
    CHECK(!parse_judge_reply("{broken", score, rationale));
    CHECK(!parse_judge_reply("", score, rationale));
}

TEST_CASE("first well-formed reply wins and records one attempt") {
    auto gw = judge_gateway({R"({"score": 3.1, "rationale": "evasive"})"});
    Judge judge(gw);
    const auto verdict = judge.score_aus(kQuery, "It depends on many factors.");
    CHECK(verdict.aus.value == 3.1);
    CHECK(verdict.rationale == "evasive");
    CHECK(verdict.parse_attempts == 1);
    CHECK(gw.ledger().usage(LlmRole::judge).calls == 1);

    // The rubric call carries both the question and the answer under grade.
    const auto log = gw.call_log();
    REQUIRE(log.size() == 1);
    CHECK(log[0].prompt.find(kQuery.text) != std::string::npos);
    CHECK(log[0].prompt.find("It depends on many factors.") != std::string::npos);
}

TEST_CASE("malformed replies are re-asked with fresh seed hints") {
    auto gw = judge_gateway({"garbage", "still garbage",
                             R"({"score": 2.6, "rationale": "third time"})"});
    Judge judge(gw);
    const auto verdict = judge.score_aus(kQuery, "answer text");
    CHECK(verdict.aus.value == 2.6);
    CHECK(verdict.parse_attempts == 3);
    // Three genuine provider calls: distinct seed hints bypass the cache.
    CHECK(gw.ledger().usage(LlmRole::judge).calls == 3);
    CHECK(gw.ledger().usage(LlmRole::judge).cache_hits == 0);
}

TEST_CASE("persistently malformed judges surface a parse failure") {
    auto gw = judge_gateway({"a", "b", "c", "d"});
    Judge judge(gw);
    CHECK_THROWS_AS(judge.score_aus(kQuery, "answer"), Error);
    // Bounded: gives up after the configured attempts, not the transcript.
    CHECK(gw.ledger().usage(LlmRole::judge).calls == 3);
}

TEST_CASE("out-of-range scores clamp into the rubric band") {
    auto high = judge_gateway({R"({"score": 7.5})"});
    CHECK(Judge(high).score_aus(kQuery, "answer").aus.value == 5.0);

    auto low = judge_gateway({R"({"score": 0.2})"});
    CHECK(Judge(low).score_aus(kQuery, "answer").aus.value == 1.0);
}

TEST_CASE("judging an empty response is a caller bug") {
    auto gw = judge_gateway({R"({"score": 3.0})"});
    Judge judge(gw);
    CHECK_THROWS_AS(judge.score_aus(kQuery, ""), Error);
    CHECK(gw.ledger().usage(LlmRole::judge).calls == 0);  // never called out
}

TEST_CASE("judge scoring defaults to temperature zero") {
    auto gw = judge_gateway({R"({"score": 3.0})"});
    Judge judge(gw);
    CHECK(judge.config().temperature == 0.0);
    CHECK(judge.config().max_parse_attempts == 3);
}
