#include "ragjam/config.hpp"

#include <fstream>

#include "ragjam/error.hpp"
#include "ragjam/prompts.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

using nlohmann::json;

std::string RunConfig::embedder_id() const {
    return "fnv-bow-" + std::to_string(embedder_dim);
}

std::string RunConfig::fingerprint() const {
    // Everything that shapes results, nothing that merely locates files.
    json mat{{"templates", prompts::kTemplateSetId},
             {"embedder", embedder_id()},
             {"seed", evolution.rng_seed},
             {"tau_soft", fitness.tau_soft},
             {"tau_lower", fitness.tau_lower},
             {"tau_upper", fitness.tau_upper},
             {"lambda", fitness.lambda},
             {"epsilon", fitness.epsilon},
             {"T", evolution.max_generations},
             {"N", evolution.population_size},
             {"parents", evolution.parent_count},
             {"seeds", evolution.init_seed_count},
             {"delta", evolution.tolerance},
             {"k", retrieval_k},
             {"isolate", isolate},
             {"anchor", anchor_mode == AnchorMode::with_query ? "with_query"
                                                              : "without_query"}};
    return std::string(prompts::kTemplateSetId) + "+" + embedder_id() + "+" +
           to_hex(fnv1a64(mat.dump()));
}

namespace {

ProviderSpec provider_from_json(const json& j) {
    ProviderSpec spec;
    spec.kind = j.value("kind", std::string{"scripted"});
    if (spec.kind != "scripted" && spec.kind != "openai")
        throw Error(ErrorCode::config_invalid,
                    "provider kind must be 'scripted' or 'openai', got '" +
                        spec.kind + "'");
    spec.model = j.value("model", std::string{});
    spec.endpoint = j.value("endpoint", std::string{});
    spec.api_key_env = j.value("api_key_env", std::string{});
    spec.rpm = j.value("rpm", 0.0);
    spec.logprob_mode = j.value("logprob_mode", std::string{"hash"});
    return spec;
}

json provider_to_json(const ProviderSpec& spec) {
    return json{{"kind", spec.kind},         {"model", spec.model},
                {"endpoint", spec.endpoint}, {"api_key_env", spec.api_key_env},
                {"rpm", spec.rpm},           {"logprob_mode", spec.logprob_mode}};
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    if (j.contains("providers")) {
        for (const auto& [name, pj] : j["providers"].items())
            cfg.providers[role_from_name(name)] = provider_from_json(pj);
    }
    cfg.transcript_path = j.value("transcript_path", cfg.transcript_path);
    cfg.embedder_dim = j.value("embedder_dim", cfg.embedder_dim);

    if (j.contains("fitness")) {
        const auto& f = j["fitness"];
        cfg.fitness.tau_soft = f.value("tau_soft", cfg.fitness.tau_soft);
        cfg.fitness.tau_lower = f.value("tau_lower", cfg.fitness.tau_lower);
        cfg.fitness.tau_upper = f.value("tau_upper", cfg.fitness.tau_upper);
        cfg.fitness.lambda = f.value("lambda", cfg.fitness.lambda);
        cfg.fitness.epsilon = f.value("epsilon", cfg.fitness.epsilon);
    }
    if (j.contains("evolution")) {
        const auto& e = j["evolution"];
        cfg.evolution.max_generations =
            e.value("max_generations", cfg.evolution.max_generations);
        cfg.evolution.population_size =
            e.value("population_size", cfg.evolution.population_size);
        cfg.evolution.parent_count =
            e.value("parent_count", cfg.evolution.parent_count);
        cfg.evolution.init_seed_count =
            e.value("init_seed_count", cfg.evolution.init_seed_count);
        cfg.evolution.tolerance = e.value("tolerance", cfg.evolution.tolerance);
        cfg.evolution.rng_seed = e.value("rng_seed", cfg.evolution.rng_seed);
    }

    cfg.retrieval_k = j.value("retrieval_k", cfg.retrieval_k);
    cfg.isolate = j.value("isolate", cfg.isolate);
    cfg.rsr_cutoff = j.value("rsr_cutoff", cfg.rsr_cutoff);

    cfg.corpus_path = j.value("corpus_path", cfg.corpus_path);
    cfg.queries_path = j.value("queries_path", cfg.queries_path);
    cfg.index_path = j.value("index_path", cfg.index_path);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.cache_dir = j.value("cache_dir", cfg.cache_dir);
    cfg.cache_enabled = j.value("cache_enabled", cfg.cache_enabled);

    cfg.run_count = j.value("run_count", cfg.run_count);
    cfg.worker_count = j.value("worker_count", cfg.worker_count);
    if (j.contains("anchor_mode")) {
        const auto mode = j["anchor_mode"].get<std::string>();
        if (mode == "with_query") cfg.anchor_mode = AnchorMode::with_query;
        else if (mode == "without_query") cfg.anchor_mode = AnchorMode::without_query;
        else
            throw Error(ErrorCode::config_invalid,
                        "anchor_mode must be with_query or without_query");
    }

    cfg.clean_gate_threshold =
        j.value("clean_gate_threshold", cfg.clean_gate_threshold);
    cfg.skip_clean_gate = j.value("skip_clean_gate", cfg.skip_clean_gate);
    cfg.paraphrase_n = j.value("paraphrase_n", cfg.paraphrase_n);
    if (j.contains("sweep_ks")) cfg.sweep_ks = j["sweep_ks"].get<std::vector<int>>();
    if (j.contains("warning_lexicon"))
        cfg.warning_lexicon = j["warning_lexicon"].get<std::vector<std::string>>();

    cfg.fitness.validate();
    cfg.evolution.validate();
    if (cfg.retrieval_k <= 0)
        throw Error(ErrorCode::config_invalid, "retrieval_k must be positive");
    if (cfg.run_count <= 0)
        throw Error(ErrorCode::config_invalid, "run_count must be positive");
    if (cfg.worker_count <= 0)
        throw Error(ErrorCode::config_invalid, "worker_count must be positive");
    if (cfg.paraphrase_n <= 0)
        throw Error(ErrorCode::config_invalid, "paraphrase_n must be positive");
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json providers;
    for (const auto& [role, spec] : cfg.providers)
        providers[role_name(role)] = provider_to_json(spec);
    return json{
        {"providers", providers},
        {"transcript_path", cfg.transcript_path},
        {"embedder_dim", cfg.embedder_dim},
        {"fitness",
         {{"tau_soft", cfg.fitness.tau_soft},
          {"tau_lower", cfg.fitness.tau_lower},
          {"tau_upper", cfg.fitness.tau_upper},
          {"lambda", cfg.fitness.lambda},
          {"epsilon", cfg.fitness.epsilon}}},
        {"evolution",
         {{"max_generations", cfg.evolution.max_generations},
          {"population_size", cfg.evolution.population_size},
          {"parent_count", cfg.evolution.parent_count},
          {"init_seed_count", cfg.evolution.init_seed_count},
          {"tolerance", cfg.evolution.tolerance},
          {"rng_seed", cfg.evolution.rng_seed}}},
        {"retrieval_k", cfg.retrieval_k},
        {"isolate", cfg.isolate},
        {"rsr_cutoff", cfg.rsr_cutoff},
        {"corpus_path", cfg.corpus_path},
        {"queries_path", cfg.queries_path},
        {"index_path", cfg.index_path},
        {"out_dir", cfg.out_dir},
        {"cache_dir", cfg.cache_dir},
        {"cache_enabled", cfg.cache_enabled},
        {"run_count", cfg.run_count},
        {"worker_count", cfg.worker_count},
        {"anchor_mode",
         cfg.anchor_mode == AnchorMode::with_query ? "with_query" : "without_query"},
        {"clean_gate_threshold", cfg.clean_gate_threshold},
        {"skip_clean_gate", cfg.skip_clean_gate},
        {"paraphrase_n", cfg.paraphrase_n},
        {"sweep_ks", cfg.sweep_ks},
        {"warning_lexicon", cfg.warning_lexicon},
    };
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::config_invalid,
                    path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

}  // namespace ragjam
