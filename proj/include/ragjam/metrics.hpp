#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragjam/attack.hpp"
#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"

namespace ragjam {

// One attacked (query, run) pair — everything needed to re-derive the
// headline metrics and audit the run afterwards.
struct RunRecord {
    std::string query_id;
    int run_index = 0;
    Provenance kind = Provenance::deja;
    std::optional<StrategyTag> strategy;  // absent for baseline builders
    std::string hook;
    std::string best_payload;
    std::string document_text;
    std::string final_answer;
    double final_aus = 1.0;
    OutcomeClass outcome = OutcomeClass::other;
    std::optional<int> adv_rank;
    Trajectory trajectory;  // empty for single-shot baselines
    std::map<std::string, RoleUsage> tokens;  // role name -> usage
    std::int64_t judge_calls = 0;
    std::int64_t wall_ms = 0;
    std::string fingerprint;  // template set + embedder + seed provenance
};

nlohmann::json run_record_to_json(const RunRecord& rec);
RunRecord run_record_from_json(const nlohmann::json& j);

void save_run_records(const std::string& path,
                      const std::vector<RunRecord>& records);
std::vector<RunRecord> load_run_records(const std::string& path);

// --- Headline metrics ----------------------------------------------------

// Soft-failure share: AUS in [tau_lower, tau_upper].
double sasr(const std::vector<double>& aus, const FitnessConfig& cfg);
// Hard-failure share: AUS in [1.0, tau_lower).
double hasr(const std::vector<double>& aus, const FitnessConfig& cfg);
// Mean absolute deviation from the target utility.
double mad_tau(const std::vector<double>& aus, const FitnessConfig& cfg);

struct Stat {
    double mean = 0.0;
    double sd = 0.0;  // sample (n-1); 0 for a single run
};

struct MetricsSummary {
    Stat sasr;
    Stat hasr;
    Stat mad_tau;
    Stat rsr;
    Stat top1;
    std::size_t run_count = 1;
    std::size_t query_count = 0;
};

// Summary of a single run's records (SDs zero).
MetricsSummary summarize_run(const std::vector<RunRecord>& records,
                             const FitnessConfig& cfg, int rsr_cutoff = 5);

// Mean +- sample SD across per-run summaries.
MetricsSummary aggregate(const std::vector<MetricsSummary>& runs);

// --- Clean-response gate ---------------------------------------------------

struct GateResult {
    std::vector<Query> retained;
    std::vector<std::string> discarded_ids;
    double threshold = 4.0;
};

// Keeps queries whose un-attacked RAG answer scored at least `threshold`;
// attacking a query the system already fails tells us nothing.
GateResult gate_queries(const std::vector<std::pair<Query, double>>& clean_scores,
                        double threshold = 4.0);

// --- Reporting -------------------------------------------------------------

struct EfficiencyStats {
    double mean_generations = 0.0;
    double mean_total_tokens = 0.0;
    double tokens_per_generation = 0.0;
    double mean_wall_s = 0.0;
};

EfficiencyStats efficiency(const std::vector<RunRecord>& records);

// Markdown summary (rates as percentages, two decimals) plus full-precision
// CSVs: per-record AUS, per-generation trajectories, per-role token usage.
// Records are grouped by attack kind; each kind gets a summary row
// aggregated over its runs.
void emit_report(const std::string& out_dir,
                 const std::vector<RunRecord>& records,
                 const FitnessConfig& cfg, int rsr_cutoff = 5);

}  // namespace ragjam
