#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ragjam/config.hpp"
#include "ragjam/defenses.hpp"
#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"
#include "ragjam/judge.hpp"
#include "ragjam/metrics.hpp"
#include "ragjam/retrieval.hpp"

namespace ragjam {

// Long-lived services for one invocation, wired from a RunConfig: provider
// stack, corpus + index, judge. Owns the pieces the per-query engines borrow.
class Runner {
public:
    explicit Runner(RunConfig config);

    Gateway& gateway() { return *gateway_; }
    const VectorIndex& index() const { return *index_; }
    const RunConfig& config() const { return config_; }
    const std::vector<Query>& queries() const { return queries_; }
    const std::vector<Document>& corpus() const { return corpus_; }
    const Judge& judge() const { return *judge_; }

    // Scores every query's un-attacked answer and applies the utility gate.
    GateResult clean_gate();

    // Full attack evaluation: for each gated query and each of run_count
    // repeats, build/optimize the document, evaluate it, and collect a
    // RunRecord. kind selects the document builder; all kinds share the
    // inject/retrieve/generate/judge path.
    std::vector<RunRecord> run_attacks(Provenance kind);

    // Like run_attacks but with an explicit query list and context size —
    // the building block for the context-size sweep and paraphrase defense.
    std::vector<RunRecord> run_attacks_at_k(Provenance kind,
                                            const std::vector<Query>& queries,
                                            int k, int run_offset = 0);

    // --- Defenses ---------------------------------------------------------

    // Perplexity of every unique benign + attack document, plus the ROC of
    // flagging high perplexity as adversarial.
    struct PplDefenseResult {
        std::vector<PerplexityRecord> records;
        RocResult roc;
    };
    PplDefenseResult defend_perplexity(const std::vector<RunRecord>& attacks);

    // Re-evaluates each attack document against n paraphrased queries
    // without re-optimizing the document.
    struct ParaphraseResult {
        std::vector<RunRecord> records;  // one per (query, paraphrase)
        MetricsSummary summary;
    };
    ParaphraseResult defend_paraphrase(const std::vector<RunRecord>& attacks);

    // Repeats the attack evaluation across the configured context sizes.
    struct SweepRow {
        int k = 0;
        MetricsSummary summary;
    };
    std::vector<SweepRow> defend_ksweep(Provenance kind);

    // Per-(query,run) deterministic RNG seed.
    static std::uint64_t query_seed(std::uint64_t base, int run_index,
                                    const std::string& query_id);

private:
    RunRecord attack_one(const Query& query, Provenance kind, int run_index,
                         int k);

    RunConfig config_;
    std::unique_ptr<Gateway> gateway_;
    std::unique_ptr<VectorIndex> index_;
    std::unique_ptr<Judge> judge_;
    std::vector<Document> corpus_;
    std::vector<Query> queries_;
};

// Builds the provider stack described by the config (scripted transcripts
// or HTTP backends with env-var credentials).
std::unique_ptr<Gateway> make_gateway(const RunConfig& config);

}  // namespace ragjam
