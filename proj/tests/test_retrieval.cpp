#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "ragjam/domain.hpp"
#include "ragjam/error.hpp"
#include "ragjam/retrieval.hpp"
#include "ragjam/text.hpp"

using namespace ragjam;

namespace {

// Independent cosine ranking: embed everything, sort by score descending
// with ascending-id tie-break. The index must agree with this exactly.
std::vector<std::pair<std::string, double>> brute_force(
    const HashEmbedder& emb, const std::vector<Document>& docs,
    const std::string& query_text) {
    const Eigen::VectorXd q = emb.embed(query_text);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& d : docs) out.emplace_back(d.id, q.dot(emb.embed(d.text)));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

std::vector<Document> random_corpus(std::mt19937_64& rng, std::size_t n) {
    static const std::vector<std::string> vocab = {
        "river", "bridge", "enzyme", "cipher", "glacier", "amphora", "tram",
        "moon",  "blue",   "boil",   "stage",  "key",     "span",    "litre",
        "iron",  "clay",   "alpine", "vapour", "subway",  "strand"};
    std::uniform_int_distribution<std::size_t> len(3, 24);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        const std::size_t words = len(rng);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) text += ' ';
            text += vocab[pick(rng)];
        }
        docs.push_back({"d" + std::to_string(100 + i), text, Provenance::benign});
    }
    return docs;
}

std::string random_text(std::mt19937_64& rng, std::size_t words) {
    std::vector<Document> one = random_corpus(rng, 1);
    (void)words;
    return one.front().text;
}

}  // namespace

TEST_CASE("hash embedder produces unit vectors, ignoring case and punctuation") {
    HashEmbedder emb(512);
    CHECK(emb.id() == "fnv-bow-512");
    CHECK(HashEmbedder(64).id() == "fnv-bow-64");

    const Eigen::VectorXd v = emb.embed("Hello, World! hello");
    CHECK(v.size() == 512);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));

    // Same bag of words under case folding and punctuation stripping.
    const Eigen::VectorXd w = emb.embed("hello WORLD (hello)");
    CHECK((v - w).norm() == doctest::Approx(0.0).epsilon(1e-12));

    // Token multiplicity matters: "hello hello world" != "hello world".
    const Eigen::VectorXd u = emb.embed("hello world");
    CHECK((v - u).norm() > 1e-6);

    // No tokens -> zero vector rather than NaN.
    CHECK(emb.embed("!!! ??? ---").norm() == 0.0);
}

TEST_CASE("index search equals brute-force ranking on randomized corpora") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        HashEmbedder emb(128);
        std::uniform_int_distribution<std::size_t> size_dist(1, 50);
        const auto docs = random_corpus(rng, size_dist(rng));
        VectorIndex index(emb);
        index.add_all(docs);

        const Query q{"q", random_text(rng, 8), {}};
        std::uniform_int_distribution<int> k_dist(
            1, static_cast<int>(docs.size()));
        const int k = k_dist(rng);

        const auto got = index.search(q, k);
        const auto expect = brute_force(emb, docs, q.text);
        REQUIRE(got.hits.size() == static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) {
            CHECK(got.hits[static_cast<std::size_t>(r)].doc_id ==
                  expect[static_cast<std::size_t>(r)].first);
            CHECK(got.hits[static_cast<std::size_t>(r)].score ==
                  doctest::Approx(expect[static_cast<std::size_t>(r)].second)
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("equal scores break ties by ascending document id") {
    VectorIndex index{HashEmbedder(64)};
    index.add({"b", "same words here", Provenance::benign});
    index.add({"c", "same words here", Provenance::benign});
    index.add({"a", "same words here", Provenance::benign});

    const auto ctx = index.search({"q", "same words here", {}}, 3);
    REQUIRE(ctx.hits.size() == 3);
    CHECK(ctx.hits[0].doc_id == "a");
    CHECK(ctx.hits[1].doc_id == "b");
    CHECK(ctx.hits[2].doc_id == "c");
}

TEST_CASE("index rejects duplicates, over-wide windows, and empty pools") {
    VectorIndex index{HashEmbedder(64)};
    CHECK_THROWS_AS(index.search({"q", "anything", {}}, 1), Error);  // empty

    index.add({"a", "first", Provenance::benign});
    CHECK_THROWS_AS(index.add({"a", "again", Provenance::benign}), Error);
    CHECK_THROWS_AS(index.search({"q", "first", {}}, 2), Error);  // k > pool
    CHECK_THROWS_AS(index.search({"q", "first", {}}, 0), Error);
    CHECK(index.contains("a"));
    CHECK(!index.contains("z"));
    CHECK(index.document("a").text == "first");
    CHECK_THROWS_AS(index.document("z"), Error);
}

TEST_CASE("injection is a logical overlay that never mutates the index") {
    VectorIndex index{HashEmbedder(128)};
    index.add({"a", "rivers and bridges", Provenance::benign});
    index.add({"b", "moons and ciphers", Provenance::benign});
    const auto before = index.doc_ids();

    const auto adv = make_adversarial("rivers and bridges", "hook words",
                                      "payload words");
    const auto ctx = index.inject_and_retrieve(adv, {"q", "rivers and bridges", {}},
                                               1, /*isolate=*/true);
    CHECK(index.size() == 2);
    CHECK(index.doc_ids() == before);
    CHECK(!index.contains("~adv"));

    // Window widened to k+1; the anchored document outranks both benign docs.
    CHECK(ctx.isolation_applied);
    CHECK(ctx.k_used == 2);
    REQUIRE(ctx.adv_rank.has_value());
    CHECK(*ctx.adv_rank == 1);
    CHECK(ctx.hits.front().doc_id == "~adv");
    CHECK(ctx.documents.front().provenance != Provenance::benign);
}

TEST_CASE("isolation keeps every benign top-k hit in the widened window") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        HashEmbedder emb(128);
        std::uniform_int_distribution<std::size_t> size_dist(2, 50);
        const auto docs = random_corpus(rng, size_dist(rng));
        VectorIndex index(emb);
        index.add_all(docs);

        const Query q{"q", random_text(rng, 8), {}};
        std::uniform_int_distribution<int> k_dist(
            1, static_cast<int>(docs.size()) - 1);
        const int k = k_dist(rng);
        const auto adv = make_adversarial(q.text, random_text(rng, 6),
                                          random_text(rng, 12));

        const auto benign = index.search(q, k);
        const auto attacked = index.inject_and_retrieve(adv, q, k, true);
        REQUIRE(attacked.hits.size() == static_cast<std::size_t>(k + 1));

        for (const auto& hit : benign.hits) {
            const bool still_there =
                std::any_of(attacked.hits.begin(), attacked.hits.end(),
                            [&](const ScoredDoc& h) { return h.doc_id == hit.doc_id; });
            CHECK(still_there);
        }
    }
}

TEST_CASE("without isolation the injected document competes for the same slots") {
    VectorIndex index{HashEmbedder(128)};
    index.add({"a", "alpine glacier meltwater", Provenance::benign});
    index.add({"b", "tram subway closure", Provenance::benign});

    const Query q{"q", "alpine glacier meltwater", {}};
    const auto adv = make_adversarial(q.text, "", "extra words");
    const auto ctx = index.inject_and_retrieve(adv, q, 2, /*isolate=*/false);
    CHECK(!ctx.isolation_applied);
    CHECK(ctx.k_used == 2);
    REQUIRE(ctx.hits.size() == 2);
    // The anchored doc takes a slot and evicts the weaker benign doc.
    CHECK(std::none_of(ctx.hits.begin(), ctx.hits.end(),
                       [](const ScoredDoc& h) { return h.doc_id == "b"; }));
}

TEST_CASE("an off-topic injected document falls outside the window") {
    VectorIndex index{HashEmbedder(256)};
    for (int i = 0; i < 6; ++i)
        index.add({"d" + std::to_string(i),
                   "red green blue color palette number " + std::to_string(i),
                   Provenance::benign});
    const Query q{"q", "red green blue color palette", {}};
    const auto adv = make_adversarial("", "zebra yak", "xylophone quartz");
    const auto ctx = index.inject_and_retrieve(adv, q, 2, true);
    CHECK(!ctx.adv_rank.has_value());
    for (const auto& h : ctx.hits) CHECK(h.doc_id != "~adv");
}

TEST_CASE("the overlay id sorts after benign ids on exact ties") {
    VectorIndex index{HashEmbedder(64)};
    index.add({"a", "identical text", Provenance::benign});
    const auto adv = make_adversarial("", "identical", "text");
    REQUIRE(adv.assembled == "identical\ntext");  // same bag of words as "a"
    const auto ctx = index.inject_and_retrieve(adv, {"q", "identical text", {}}, 1, true);
    REQUIRE(ctx.hits.size() == 2);
    CHECK(ctx.hits[0].doc_id == "a");     // tie -> benign id wins
    CHECK(ctx.hits[1].doc_id == "~adv");  // '~' sorts after alphanumerics
    REQUIRE(ctx.adv_rank.has_value());
    CHECK(*ctx.adv_rank == 2);
}

TEST_CASE("index round-trips through its save file") {
    const std::string path =
        "build/index-" + std::to_string(std::random_device{}()) + ".json";
    VectorIndex index{HashEmbedder(64)};
    index.add({"a", "rivers and bridges", Provenance::benign});
    index.add({"b", "moons and ciphers", Provenance::benign});
    index.save(path);

    const VectorIndex loaded = VectorIndex::load(path);
    std::remove(path.c_str());
    CHECK(loaded.size() == 2);
    CHECK(loaded.embedder().dim() == 64);
    const auto ctx = loaded.search({"q", "rivers and bridges", {}}, 2);
    CHECK(ctx.hits.front().doc_id == "a");
}

TEST_CASE("retrieval stats count in-cutoff and rank-one contexts") {
    RetrievedContext r1;
    r1.adv_rank = 1;
    RetrievedContext r5;
    r5.adv_rank = 5;
    RetrievedContext r6;
    r6.adv_rank = 6;
    RetrievedContext none;

    const auto stats = compute_retrieval_metrics({r1, r5, r6, none}, 5);
    CHECK(stats.n == 4);
    CHECK(stats.cutoff == 5);
    CHECK(stats.rsr == doctest::Approx(0.5));   // ranks 1 and 5
    CHECK(stats.top1 == doctest::Approx(0.25));  // rank 1 only
}

TEST_CASE("context builder applies its configured window and isolation") {
    VectorIndex index{HashEmbedder(128)};
    index.add({"a", "alpha text", Provenance::benign});
    index.add({"b", "beta text", Provenance::benign});
    index.add({"c", "gamma text", Provenance::benign});

    ContextBuilder cb(index, ContextBuilderConfig{2, true});
    const Query q{"q", "alpha text", {}};
    CHECK(cb.build(q).hits.size() == 2);

    const auto adv = make_adversarial(q.text, "", "payload");
    const auto ctx = cb.build_with_adversary(q, adv);
    CHECK(ctx.hits.size() == 3);  // k+1
    CHECK(ctx.isolation_applied);
}
