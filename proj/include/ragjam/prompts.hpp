#pragma once

#include <string>
#include <vector>

#include "ragjam/domain.hpp"

namespace ragjam::prompts {

// Every prompt this project sends is rendered here, from one versioned
// template set. The id is stamped into run records so replays can detect a
// template drift.
inline constexpr const char* kTemplateSetId = "tpl-v1";

// Victim-side QA prompt: instruction block, the retrieved documents in rank
// order (each prefixed with its rank), then the question.
std::string victim_rag(const std::string& query_text,
                       const std::vector<Document>& context);

// Judge rubric: three scored dimensions plus the utility bands; demands a
// JSON object {"score": <1.0-5.0>, "rationale": "<one sentence>"}.
std::string judge_rubric(const std::string& query_text,
                         const std::string& answer_text);

// One batched call scoring all six evasion strategies 0-10 for the query.
std::string strategy_compatibility(const std::string& query_text);

// Retrieval-hook generation under style constraints.
std::string hook(const std::string& query_text,
                 const std::string& style_constraints, const Strategy& strategy);

// Seed payload generation; seed_index only varies the seed_hint upstream but
// is echoed so scripted fixtures can address individual seeds.
std::string init_payload(const std::string& query_text, const Strategy& strategy,
                         int seed_index);

enum class MicroDirection { raise, lower };
const char* micro_direction_name(MicroDirection d);

std::string micro(const std::string& parent_payload, const Strategy& strategy,
                  double current_aus, MicroDirection direction);

std::string cross(const std::string& payload_a, double aus_a,
                  const std::string& payload_b, double aus_b,
                  const Strategy& strategy);

std::string innov(const std::string& parent_payload, const Strategy& strategy);

std::string feedback_diagnosis(const std::string& parent_payload,
                               const std::string& failed_answer,
                               double failed_aus, double tau_soft);

std::string feedback_revision(const std::string& parent_payload,
                              const std::string& diagnosis);

// Baseline builders.
std::string injection_template(const std::string& subject,
                               const std::string& controversy,
                               const std::string& harmful_purpose);

std::string heuristic_payload(const std::string& query_text);

// Defense-side paraphraser: n meaning-preserving rewrites, one per line.
std::string paraphrase(const std::string& query_text, int n);

}  // namespace ragjam::prompts
