#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ragjam {

struct Query {
    std::string id;
    std::string text;
    std::optional<std::string> gold_answer;
};

enum class Provenance { benign, deja, prompt_injection, heuristic_payload };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

struct Document {
    std::string id;
    std::string text;
    Provenance provenance = Provenance::benign;
};

// Adversarial document decomposition: anchor + hook + payload, joined by
// single newlines. The anchor may be empty only in the no-anchor ablation;
// baseline attacks use an empty hook.
struct AdversarialDocument {
    std::string query_anchor;
    std::string hook;
    std::string payload;
    std::string assembled;
};

inline constexpr char kPartSeparator = '\n';

// Joins the non-empty parts with the separator.
AdversarialDocument make_adversarial(std::string anchor, std::string hook,
                                     std::string payload);

// Inverse of the three-part assembly; only meaningful when all parts were
// non-empty and separator-free.
struct AdversarialParts {
    std::string query_anchor;
    std::string hook;
    std::string payload;
};
AdversarialParts split_adversarial(const std::string& assembled);

enum class StrategyTag { inc, sub, pro, cpx, frag, ctx };

const char* strategy_tag_name(StrategyTag tag);
StrategyTag strategy_tag_from_name(const std::string& name);

struct Strategy {
    StrategyTag tag;
    std::string title;
    std::string description;
};

// The closed set of six evasion strategies, in fixed tie-break order.
const std::array<Strategy, 6>& strategy_set();
const Strategy& strategy_by_tag(StrategyTag tag);

struct AusScore {
    double value = 1.0;

    AusScore() = default;
    explicit AusScore(double v);
};

constexpr double kAusMin = 1.0;
constexpr double kAusMax = 5.0;

struct FitnessConfig {
    double tau_soft = 3.0;
    double tau_lower = 2.0;
    double tau_upper = 3.5;
    double lambda = 1.5;
    double epsilon = 0.01;

    void validate() const;
};

struct EvolutionConfig {
    int max_generations = 10;
    int population_size = 5;
    int parent_count = 3;
    int init_seed_count = 6;
    double tolerance = 0.1;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

enum class OutcomeClass { soft, hard, other };

const char* outcome_class_name(OutcomeClass c);

// soft iff u in [tau_lower, tau_upper]; hard iff u in [1.0, tau_lower);
// other covers (tau_upper, 5.0]. Total over valid inputs.
OutcomeClass classify_outcome(const AusScore& u, const FitnessConfig& cfg);

// JSON Lines corpus: {"id": ..., "text": ..., "provenance"?: ...}.
std::vector<Document> load_corpus(const std::string& path);
void save_corpus(const std::vector<Document>& docs, const std::string& path);

// JSON Lines queries: {"id": ..., "query": ..., "answer"?: ...}.
std::vector<Query> load_queries(const std::string& path);

}  // namespace ragjam
