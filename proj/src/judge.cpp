#include "ragjam/judge.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "ragjam/error.hpp"
#include "ragjam/prompts.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

using nlohmann::json;

FitnessScore fitness(AusScore u, const FitnessConfig& cfg) {
    FitnessScore out;
    out.penalized = u.value > cfg.tau_upper;
    out.distance = std::abs(u.value - cfg.tau_soft) * (out.penalized ? cfg.lambda : 1.0);
    out.fitness = 1.0 / (out.distance + cfg.epsilon);
    return out;
}

bool parse_judge_reply(const std::string& raw, double& score_out,
                       std::string& rationale_out) {
    // Accept a bare object, or one wrapped in prose / a code fence.
    auto try_parse = [&](const std::string& candidate) -> bool {
        json j = json::parse(candidate, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("score")) return false;
        const auto& s = j["score"];
        if (s.is_number()) {
            score_out = s.get<double>();
        } else if (s.is_string()) {
            try {
                score_out = std::stod(s.get<std::string>());
            } catch (...) {
                return false;
            }
        } else {
            return false;
        }
        if (!std::isfinite(score_out)) return false;
        rationale_out = j.value("rationale", std::string{});
        return true;
    };

    if (try_parse(trim(raw))) return true;
    const auto open = raw.find('{');
    const auto close = raw.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close <= open)
        return false;
    return try_parse(raw.substr(open, close - open + 1));
}

Judge::Judge(Gateway& gateway, JudgeConfig config)
    : gateway_(gateway), config_(config) {}

JudgeVerdict Judge::score_aus(const Query& query, const std::string& response) const {
    if (response.empty())
        throw Error(ErrorCode::empty_input, "cannot judge an empty response");

    CompletionRequest req;
    req.role = LlmRole::judge;
    req.prompt = prompts::judge_rubric(query.text, response);
    req.temperature = config_.temperature;
    req.max_tokens = config_.max_tokens;

    std::string last_raw;
    for (int attempt = 1; attempt <= config_.max_parse_attempts; ++attempt) {
        // Distinct seed hint per attempt, so a re-ask is a genuinely new call
        // rather than a cache replay of the same malformed reply.
        req.seed_hint = attempt;
        const CompletionResult res = gateway_.complete(req);
        last_raw = res.text;
        double score = 0.0;
        std::string rationale;
        if (parse_judge_reply(res.text, score, rationale)) {
            JudgeVerdict verdict;
            verdict.aus = AusScore(std::clamp(score, kAusMin, kAusMax));
            verdict.rationale = rationale;
            verdict.raw = res.text;
            verdict.parse_attempts = attempt;
            return verdict;
        }
    }
    throw Error(ErrorCode::judge_parse_failure,
                "no usable score after " +
                    std::to_string(config_.max_parse_attempts) +
                    " attempts (last reply head: " + last_raw.substr(0, 80) + ")");
}

}  // namespace ragjam
