#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragjam/attack.hpp"
#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"

namespace ragjam {

// Backend selection for one role. Secrets never live in the file: the
// config names an environment variable and the key is read at startup.
struct ProviderSpec {
    std::string kind = "scripted";  // "scripted" | "openai"
    std::string model;
    std::string endpoint;
    std::string api_key_env;   // e.g. RAGJAM_VICTIM_API_KEY
    double rpm = 0.0;          // 0 = unlimited
    std::string logprob_mode = "hash";  // scripted only
};

struct RunConfig {
    std::map<LlmRole, ProviderSpec> providers;
    std::string transcript_path;  // scripted replay stream, all roles

    int embedder_dim = 512;

    FitnessConfig fitness;
    EvolutionConfig evolution;

    int retrieval_k = 4;
    bool isolate = true;        // evaluate with window k+1
    int rsr_cutoff = 5;

    std::string corpus_path;
    std::string queries_path;
    std::string index_path;
    std::string out_dir = "out";
    std::string cache_dir;      // "" disables the persistent call cache
    bool cache_enabled = true;  // in-memory identity cache on LLM calls

    int run_count = 1;
    int worker_count = 1;
    AnchorMode anchor_mode = AnchorMode::with_query;

    double clean_gate_threshold = 4.0;
    bool skip_clean_gate = false;

    int paraphrase_n = 3;
    std::vector<int> sweep_ks = {4, 6, 8, 10};
    std::vector<std::string> warning_lexicon;  // empty -> built-in default

    std::string embedder_id() const;
    std::string fingerprint() const;  // template set + embedder + seed
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace ragjam
