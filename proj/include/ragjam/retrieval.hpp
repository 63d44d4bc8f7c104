#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "ragjam/domain.hpp"

namespace ragjam {

// Hash-bucket bag-of-words embedder: lowercase, split on non-alphanumerics,
// FNV-1a each token into one of `dim` buckets, count, L2-normalize. Cheap,
// fully deterministic, and shared verbatim between indexing and querying, so
// a document that embeds the query text verbatim scores near the query.
class HashEmbedder {
public:
    explicit HashEmbedder(int dim = 512);

    Eigen::VectorXd embed(const std::string& text) const;
    int dim() const { return dim_; }
    std::string id() const;  // e.g. "fnv-bow-512"

private:
    int dim_;
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

// One retrieval outcome. `hits` is sorted by descending cosine, ties broken
// by ascending document id; `documents` carries the corresponding texts in
// the same order for prompt assembly.
struct RetrievedContext {
    std::string query_id;
    std::vector<ScoredDoc> hits;
    std::vector<Document> documents;
    int k_used = 0;
    bool isolation_applied = false;
    std::optional<int> adv_rank;  // 1-based; set iff an injected doc ranked
};

// In-memory dense index. Embeddings are rows of one matrix so scoring a
// query is a single matrix-vector product. Immutable once built; injection
// happens as a logical overlay without touching the shared index.
class VectorIndex {
public:
    explicit VectorIndex(HashEmbedder embedder);

    void add(const Document& doc);
    void add_all(const std::vector<Document>& docs);

    std::size_t size() const { return docs_.size(); }
    bool contains(const std::string& doc_id) const;
    const Document& document(const std::string& doc_id) const;
    const HashEmbedder& embedder() const { return embedder_; }

    RetrievedContext search(const Query& query, int k) const;

    // Retrieval with the adversarial document overlaid. isolate widens the
    // window to k+1 so the injected document can never displace a benign
    // top-k member; without it the injected document competes for the same
    // k slots.
    RetrievedContext inject_and_retrieve(const AdversarialDocument& adv,
                                         const Query& query, int k,
                                         bool isolate = true) const;

    std::vector<std::string> doc_ids() const;

    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

private:
    RetrievedContext top_k(const Query& query, int k,
                           const Document* extra_doc) const;

    HashEmbedder embedder_;
    std::vector<Document> docs_;
    Eigen::MatrixXd embeddings_;  // one row per document
};

// Share of contexts whose injected document ranked within the cutoff
// (top-5 by convention), and the share ranked first.
struct RetrievalStats {
    double rsr = 0.0;
    double top1 = 0.0;
    int cutoff = 5;
    std::size_t n = 0;
};

RetrievalStats compute_retrieval_metrics(
    const std::vector<RetrievedContext>& contexts, int cutoff = 5);

// Convenience wrapper binding an index to a window size for the engine.
struct ContextBuilderConfig {
    int k = 4;
    bool isolate = true;
};

class ContextBuilder {
public:
    ContextBuilder(const VectorIndex& index, ContextBuilderConfig config);

    RetrievedContext build(const Query& query) const;
    RetrievedContext build_with_adversary(const Query& query,
                                          const AdversarialDocument& adv) const;

    const ContextBuilderConfig& config() const { return config_; }
    const VectorIndex& index() const { return index_; }

private:
    const VectorIndex& index_;
    ContextBuilderConfig config_;
};

}  // namespace ragjam
