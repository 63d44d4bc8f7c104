#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"
#include "ragjam/judge.hpp"
#include "ragjam/prompts.hpp"
#include "ragjam/retrieval.hpp"

namespace ragjam {

struct StrategyAssessment {
    std::array<double, 6> scores{};  // strategy_set() order, each in [0, 10]
    Strategy chosen;
};

inline constexpr const char* kDefaultHookConstraints =
    "formal tone, no explicit refusal markers";

struct HookSpec {
    std::string style_constraints = kDefaultHookConstraints;
    Strategy strategy;
    std::string hook_text;
};

enum class OperatorTag { init, micro, cross, innov, feedback };
const char* operator_tag_name(OperatorTag tag);
OperatorTag operator_tag_from_name(const std::string& name);

struct CandidatePayload {
    std::string id;
    std::string text;
    int generation = 0;  // generation the candidate was created in (0 = seed)
    OperatorTag op = OperatorTag::init;
    std::vector<std::string> parents;  // cross: exactly two, others at most one
    std::optional<AusScore> aus;
    std::optional<FitnessScore> fitness;
    std::optional<OutcomeClass> outcome;
    std::string answer;  // victim answer behind `aus`; feeds op_feedback
    std::optional<int> adv_rank;  // where the assembled document retrieved
};

struct GenerationRecord {
    int generation = 0;  // 1-based; generation 1 evaluates the seed population
    std::string best_id;
    double best_aus = 0.0;
    double best_fitness = 0.0;
    std::map<std::string, int> operator_counts;  // population mix by lineage op
};

enum class TerminationReason { tolerance_met, budget_exhausted };
const char* termination_reason_name(TerminationReason r);

struct Trajectory {
    std::vector<GenerationRecord> generations;
    TerminationReason termination = TerminationReason::budget_exhausted;
};

enum class AnchorMode { with_query, without_query };

// --- Engine -------------------------------------------------------------

struct OperatorTemperatures {
    double baseline = 0.7;
    double innovation = 1.0;  // widened sampling against premature convergence
};

struct AttackOutcome {
    CandidatePayload best;
    Trajectory trajectory;
    HookSpec hook;
    StrategyAssessment strategy;
    AdversarialDocument document;
    std::string final_answer;
    std::optional<int> adv_rank;
    std::int64_t judge_calls = 0;
};

// The evolutionary document optimizer. One instance per (query, run); not
// shareable across threads, but independent instances may run concurrently
// because all shared services (gateway, index) are internally synchronized.
class AttackEngine {
public:
    AttackEngine(Gateway& gateway, const Judge& judge,
                 const ContextBuilder& contexts, EvolutionConfig evo,
                 FitnessConfig fit, AnchorMode anchor_mode = AnchorMode::with_query,
                 OperatorTemperatures temps = {});

    // One batched auxiliary call scoring each strategy 0-10; deterministic
    // fixed-order tie-break, falling back to the first strategy when the
    // reply never parses.
    StrategyAssessment select_strategy(const Query& query);

    // Auxiliary hook generation, re-asked up to 3 times while the text is
    // empty or carries a banned refusal marker.
    HookSpec generate_hook(const Query& query, const Strategy& strategy);

    // init_seed_count seeded generations, each scored end-to-end; keeps the
    // population_size fittest.
    std::vector<CandidatePayload> init_population(const Query& query,
                                                  const HookSpec& hook);

    CandidatePayload op_micro(const CandidatePayload& parent,
                              const Strategy& strategy, double current_aus,
                              prompts::MicroDirection direction);
    CandidatePayload op_cross(const CandidatePayload& a, const CandidatePayload& b,
                              const Strategy& strategy);
    CandidatePayload op_innov(const CandidatePayload& parent,
                              const Strategy& strategy);
    CandidatePayload op_feedback(const CandidatePayload& parent,
                                 const std::string& failed_answer);

    // Deterministic scheduling rule, in priority order: hard outcome ->
    // feedback; best fitness flat across the last two generation steps ->
    // innov; best AUS within 0.5 of tau_soft -> micro; otherwise cross.
    OperatorTag choose_operator(const Trajectory& trajectory,
                                const CandidatePayload& candidate,
                                int distinct_parents) const;

    AttackOutcome evolve(const Query& query);

    AdversarialDocument assemble(const Query& query, const HookSpec& hook,
                                 const std::string& payload) const;

    const std::vector<std::string>& banned_markers() const {
        return banned_markers_;
    }

private:
    struct Evaluation {
        AusScore aus;
        FitnessScore fit;
        OutcomeClass outcome;
        std::string answer;
        std::optional<int> adv_rank;
    };

    // Full path: assemble, inject into retrieval, generate, judge.
    Evaluation evaluate(const Query& query, const HookSpec& hook,
                        const std::string& payload);

    std::string next_id();

    Gateway& gateway_;
    const Judge& judge_;
    const ContextBuilder& contexts_;
    EvolutionConfig evo_;
    FitnessConfig fit_;
    AnchorMode anchor_mode_;
    OperatorTemperatures temps_;
    std::vector<std::string> banned_markers_;
    std::mt19937_64 rng_;
    std::int64_t id_counter_ = 0;
    std::int64_t judge_calls_ = 0;
};

// Free-standing pieces the engine is built from, exposed for direct testing.
Strategy argmax_strategy(const std::array<double, 6>& scores);
bool contains_banned_marker(const std::string& text,
                            const std::vector<std::string>& markers);
prompts::MicroDirection micro_direction(double current_aus, double tau_soft);

}  // namespace ragjam
