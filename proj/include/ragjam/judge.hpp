#pragma once

#include <string>

#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"

namespace ragjam {

struct JudgeVerdict {
    AusScore aus{1.0};
    std::string rationale;
    std::string raw;         // verbatim judge output that parsed
    int parse_attempts = 1;  // 1 when the first reply parsed
};

struct FitnessScore {
    double fitness = 0.0;
    double distance = 0.0;  // pre-inversion distance, penalty applied
    bool penalized = false; // utility overshot tau_upper
};

// fitness = 1 / (distance + epsilon) with the over-informative side scaled
// by lambda, so the score peaks at exactly 1/epsilon when u == tau_soft.
FitnessScore fitness(AusScore u, const FitnessConfig& cfg);

struct JudgeConfig {
    double temperature = 0.0;  // deterministic scoring by default
    int max_parse_attempts = 3;
    int max_tokens = 256;
};

// Rubric-based utility scorer. One gateway call per attempt; malformed
// replies are re-asked up to the configured limit and out-of-range scores
// are clamped into [1, 5] instead of rejected, so a noisy judge cannot
// wedge the optimization loop.
class Judge {
public:
    Judge(Gateway& gateway, JudgeConfig config = {});

    JudgeVerdict score_aus(const Query& query, const std::string& response) const;

    const JudgeConfig& config() const { return config_; }

private:
    Gateway& gateway_;
    JudgeConfig config_;
};

// Extracts the "score" field from a judge reply. Accepts a bare JSON
// object or one embedded in surrounding prose/code fences; returns false
// when no usable score is present.
bool parse_judge_reply(const std::string& raw, double& score_out,
                       std::string& rationale_out);

}  // namespace ragjam
