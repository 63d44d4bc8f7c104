#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"

namespace ragjam {

struct PerplexityRecord {
    std::string doc_id;
    Provenance provenance = Provenance::benign;
    double perplexity = 0.0;
};

struct RocResult {
    double auc = 0.0;
    // (false positive rate, true positive rate), threshold swept high→low.
    std::vector<std::pair<double, double>> points;
};

// exp(-mean token log-probability) under the given role's scoring backend.
double perplexity(Gateway& gateway, LlmRole role, const std::string& text);

// Probability that a random adversarial score exceeds a random clean score,
// ties counted half — the rank-statistic form of the ROC integral. Higher
// score flagged adversarial.
RocResult roc_auc(const std::vector<double>& clean,
                  const std::vector<double>& adversarial);

// Perplexity for every unique document (exact-text duplicates dropped),
// ready for the clean-vs-adversarial ROC.
std::vector<PerplexityRecord> perplexity_records(
    Gateway& gateway, LlmRole role, const std::vector<Document>& docs);

// n meaning-preserving query rewrites from the auxiliary model, one per
// line; ids derived from the source query. The attack document is NOT
// re-optimized against them — that asymmetry is the defense.
std::vector<Query> paraphrase_queries(Gateway& gateway, const Query& query, int n);

inline const std::vector<int> kDefaultSweepKs = {4, 6, 8, 10};

}  // namespace ragjam
