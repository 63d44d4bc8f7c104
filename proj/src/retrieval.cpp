#include "ragjam/retrieval.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>

#include "ragjam/error.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

using nlohmann::json;

HashEmbedder::HashEmbedder(int dim) : dim_(dim) {
    if (dim <= 0) throw Error(ErrorCode::config_invalid, "embedder dim must be positive");
}

std::string HashEmbedder::id() const { return "fnv-bow-" + std::to_string(dim_); }

Eigen::VectorXd HashEmbedder::embed(const std::string& text) const {
    if (text.empty()) throw Error(ErrorCode::empty_text, "cannot embed empty text");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    for (const auto& tok : tokenize_alnum(text)) {
        v[static_cast<Eigen::Index>(fnv1a64(tok) % static_cast<std::uint64_t>(dim_))] += 1.0;
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return v;
}

VectorIndex::VectorIndex(HashEmbedder embedder) : embedder_(std::move(embedder)) {}

void VectorIndex::add(const Document& doc) {
    if (doc.text.empty())
        throw Error(ErrorCode::empty_text, "document '" + doc.id + "' has empty text");
    if (contains(doc.id))
        throw Error(ErrorCode::duplicate_id, "duplicate document id '" + doc.id + "'");
    const Eigen::VectorXd e = embedder_.embed(doc.text);
    embeddings_.conservativeResize(static_cast<Eigen::Index>(docs_.size()) + 1,
                                   embedder_.dim());
    embeddings_.row(static_cast<Eigen::Index>(docs_.size())) = e.transpose();
    docs_.push_back(doc);
}

void VectorIndex::add_all(const std::vector<Document>& docs) {
    // Bulk path sizes the matrix once instead of growing row by row.
    const auto base = static_cast<Eigen::Index>(docs_.size());
    embeddings_.conservativeResize(base + static_cast<Eigen::Index>(docs.size()),
                                   embedder_.dim());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& doc = docs[i];
        if (doc.text.empty())
            throw Error(ErrorCode::empty_text,
                        "document '" + doc.id + "' has empty text");
        if (contains(doc.id))
            throw Error(ErrorCode::duplicate_id,
                        "duplicate document id '" + doc.id + "'");
        embeddings_.row(base + static_cast<Eigen::Index>(i)) =
            embedder_.embed(doc.text).transpose();
        docs_.push_back(doc);
    }
}

bool VectorIndex::contains(const std::string& doc_id) const {
    return std::any_of(docs_.begin(), docs_.end(),
                       [&](const Document& d) { return d.id == doc_id; });
}

const Document& VectorIndex::document(const std::string& doc_id) const {
    for (const auto& d : docs_)
        if (d.id == doc_id) return d;
    throw Error(ErrorCode::malformed_input, "no document with id '" + doc_id + "'");
}

std::vector<std::string> VectorIndex::doc_ids() const {
    std::vector<std::string> ids;
    ids.reserve(docs_.size());
    for (const auto& d : docs_) ids.push_back(d.id);
    return ids;
}

RetrievedContext VectorIndex::top_k(const Query& query, int k,
                                    const Document* extra_doc) const {
    const std::size_t pool = docs_.size() + (extra_doc ? 1 : 0);
    if (pool == 0) throw Error(ErrorCode::empty_index, "index is empty");
    if (k <= 0 || static_cast<std::size_t>(k) > pool)
        throw Error(ErrorCode::k_too_large,
                    "k=" + std::to_string(k) + " exceeds pool of " +
                        std::to_string(pool));

    const Eigen::VectorXd q = embedder_.embed(query.text);
    Eigen::VectorXd scores;
    if (!docs_.empty()) scores = embeddings_ * q;  // rows are unit vectors

    struct Row {
        double score;
        const Document* doc;
        bool injected;
    };
    std::vector<Row> rows;
    rows.reserve(pool);
    for (std::size_t i = 0; i < docs_.size(); ++i)
        rows.push_back({scores[static_cast<Eigen::Index>(i)], &docs_[i], false});
    if (extra_doc)
        rows.push_back({q.dot(embedder_.embed(extra_doc->text)), extra_doc, true});

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc->id < b.doc->id;
    });

    RetrievedContext ctx;
    ctx.query_id = query.id;
    ctx.k_used = k;
    for (int r = 0; r < k; ++r) {
        const Row& row = rows[static_cast<std::size_t>(r)];
        ctx.hits.push_back({row.doc->id, row.score});
        ctx.documents.push_back(*row.doc);
        if (row.injected) ctx.adv_rank = r + 1;
    }
    return ctx;
}

RetrievedContext VectorIndex::search(const Query& query, int k) const {
    return top_k(query, k, nullptr);
}

RetrievedContext VectorIndex::inject_and_retrieve(const AdversarialDocument& adv,
                                                  const Query& query, int k,
                                                  bool isolate) const {
    if (adv.assembled.empty())
        throw Error(ErrorCode::empty_text, "adversarial document is empty");
    Document doc;
    // "~" sorts after the benign ids, so an exact cosine tie resolves in the
    // corpus' favor rather than the attacker's.
    doc.id = "~adv";
    doc.text = adv.assembled;
    doc.provenance = Provenance::deja;
    const int k_used = isolate ? k + 1 : k;
    RetrievedContext ctx = top_k(query, k_used, &doc);
    ctx.isolation_applied = isolate;
    return ctx;
}

RetrievalStats compute_retrieval_metrics(
    const std::vector<RetrievedContext>& contexts, int cutoff) {
    if (contexts.empty())
        throw Error(ErrorCode::empty_input, "no retrieval contexts");
    RetrievalStats stats;
    stats.cutoff = cutoff;
    stats.n = contexts.size();
    std::size_t within = 0, first = 0;
    for (const auto& ctx : contexts) {
        if (ctx.adv_rank && *ctx.adv_rank <= cutoff) ++within;
        if (ctx.adv_rank && *ctx.adv_rank == 1) ++first;
    }
    stats.rsr = static_cast<double>(within) / static_cast<double>(contexts.size());
    stats.top1 = static_cast<double>(first) / static_cast<double>(contexts.size());
    return stats;
}

// --- Persistence -----------------------------------------------------------

void VectorIndex::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::write_failure, "cannot write " + path);
    out << json{{"dim", embedder_.dim()}, {"embedder_id", embedder_.id()}}.dump()
        << '\n';
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        const auto& d = docs_[i];
        std::vector<double> values(static_cast<std::size_t>(embedder_.dim()));
        for (int c = 0; c < embedder_.dim(); ++c)
            values[static_cast<std::size_t>(c)] =
                embeddings_(static_cast<Eigen::Index>(i), c);
        json j{{"id", d.id},
               {"text", d.text},
               {"provenance", provenance_name(d.provenance)},
               {"values", values}};
        out << j.dump() << '\n';
    }
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::empty_input, "index file is empty: " + path);
    json header = json::parse(line);
    VectorIndex index{HashEmbedder(header.at("dim").get<int>())};
    std::vector<Document> docs;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        Document d;
        d.id = j.at("id").get<std::string>();
        d.text = j.at("text").get<std::string>();
        d.provenance = provenance_from_name(j.value("provenance", "benign"));
        docs.push_back(std::move(d));
    }
    // Stored vectors equal what the embedder recomputes (the function is
    // deterministic), so rebuilding keeps load simple and self-validating.
    index.add_all(docs);
    return index;
}

// --- ContextBuilder ----------------------------------------------------------

ContextBuilder::ContextBuilder(const VectorIndex& index, ContextBuilderConfig config)
    : index_(index), config_(config) {}

RetrievedContext ContextBuilder::build(const Query& query) const {
    return index_.search(query, config_.k);
}

RetrievedContext ContextBuilder::build_with_adversary(
    const Query& query, const AdversarialDocument& adv) const {
    return index_.inject_and_retrieve(adv, query, config_.k, config_.isolate);
}

}  // namespace ragjam
