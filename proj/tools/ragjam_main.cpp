// Command-line front end: index building, attack runs, defense evaluations
// and report generation over one JSON run configuration. Flags override
// config keys one-for-one; secrets come only from environment variables.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ragjam/error.hpp"
#include "ragjam/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Full-precision numeric formatting, matching the CSV emitters.
std::string num(double v) { return json(v).dump(); }

ragjam::Provenance parse_kind(const std::string& kind) {
    if (kind == "heuristic") return ragjam::Provenance::heuristic_payload;
    return ragjam::provenance_from_name(kind);
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty())
        throw ragjam::Error(ragjam::ErrorCode::config_invalid,
                            "out_dir must not be empty");
    fs::create_directories(dir);
}

int cmd_index(const ragjam::RunConfig& cfg) {
    if (cfg.index_path.empty())
        throw ragjam::Error(ragjam::ErrorCode::config_invalid,
                            "index_path is required for the index command");
    const auto corpus = ragjam::load_corpus(cfg.corpus_path);
    ragjam::VectorIndex index{ragjam::HashEmbedder(cfg.embedder_dim)};
    index.add_all(corpus);
    const fs::path parent = fs::path(cfg.index_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    index.save(cfg.index_path);
    std::cout << "indexed " << index.size() << " documents with "
              << cfg.embedder_id() << " -> " << cfg.index_path << "\n";
    return 0;
}

int cmd_attack(const ragjam::RunConfig& cfg, ragjam::Provenance kind) {
    ragjam::Runner runner(cfg);
    const auto records = runner.run_attacks(kind);
    ensure_out_dir(cfg.out_dir);
    const std::string path = cfg.out_dir + "/records_" +
                             ragjam::provenance_name(kind) + ".jsonl";
    ragjam::save_run_records(path, records);
    ragjam::emit_report(cfg.out_dir, records, cfg.fitness, cfg.rsr_cutoff);
    std::cout << records.size() << " attack records -> " << path << "\n"
              << "report -> " << cfg.out_dir << "/report.md\n";
    return 0;
}

int cmd_defend_ppl(const ragjam::RunConfig& cfg, const std::string& records_path) {
    ragjam::Runner runner(cfg);
    const auto attacks = ragjam::load_run_records(records_path);
    const auto result = runner.defend_perplexity(attacks);
    ensure_out_dir(cfg.out_dir);

    {
        std::ofstream out(cfg.out_dir + "/ppl_records.csv");
        out << "doc_id,provenance,perplexity\n";
        for (const auto& r : result.records)
            out << r.doc_id << "," << ragjam::provenance_name(r.provenance) << ","
                << num(r.perplexity) << "\n";
    }
    {
        std::ofstream out(cfg.out_dir + "/roc_points.csv");
        out << "fpr,tpr\n";
        for (const auto& [fpr, tpr] : result.roc.points)
            out << num(fpr) << "," << num(tpr) << "\n";
    }
    std::cout << result.records.size() << " perplexity records -> " << cfg.out_dir
              << "/ppl_records.csv\n"
              << "perplexity ROC AUC = " << num(result.roc.auc) << "\n";
    return 0;
}

int cmd_defend_paraphrase(const ragjam::RunConfig& cfg,
                          const std::string& records_path) {
    ragjam::Runner runner(cfg);
    const auto attacks = ragjam::load_run_records(records_path);
    const auto result = runner.defend_paraphrase(attacks);
    ensure_out_dir(cfg.out_dir);
    const std::string path = cfg.out_dir + "/paraphrase_records.jsonl";
    ragjam::save_run_records(path, result.records);
    std::cout << result.records.size() << " paraphrase evaluations -> " << path
              << "\n"
              << "paraphrased-query soft-failure rate = "
              << num(result.summary.sasr.mean) << " +- "
              << num(result.summary.sasr.sd) << "\n";
    return 0;
}

int cmd_defend_ksweep(const ragjam::RunConfig& cfg, ragjam::Provenance kind) {
    ragjam::Runner runner(cfg);
    const auto rows = runner.defend_ksweep(kind);
    ensure_out_dir(cfg.out_dir);
    const std::string path = cfg.out_dir + "/ksweep.csv";
    {
        std::ofstream out(path);
        out << "k,sasr_mean,sasr_sd,hasr_mean,hasr_sd,mad_mean,mad_sd,"
               "rsr_mean,top1_mean\n";
        for (const auto& row : rows)
            out << row.k << "," << num(row.summary.sasr.mean) << ","
                << num(row.summary.sasr.sd) << "," << num(row.summary.hasr.mean)
                << "," << num(row.summary.hasr.sd) << ","
                << num(row.summary.mad_tau.mean) << ","
                << num(row.summary.mad_tau.sd) << "," << num(row.summary.rsr.mean)
                << "," << num(row.summary.top1.mean) << "\n";
    }
    std::cout << "context-size sweep over " << rows.size() << " settings -> "
              << path << "\n";
    for (const auto& row : rows)
        std::cout << "  k=" << row.k << " soft-failure rate "
                  << num(row.summary.sasr.mean) << "\n";
    return 0;
}

int cmd_report(const ragjam::RunConfig& cfg,
               const std::vector<std::string>& record_paths) {
    std::vector<ragjam::RunRecord> records;
    for (const auto& path : record_paths) {
        auto batch = ragjam::load_run_records(path);
        records.insert(records.end(), std::make_move_iterator(batch.begin()),
                       std::make_move_iterator(batch.end()));
    }
    if (records.empty())
        throw ragjam::Error(ragjam::ErrorCode::no_records,
                            "no run records in the given files");
    ensure_out_dir(cfg.out_dir);
    ragjam::emit_report(cfg.out_dir, records, cfg.fitness, cfg.rsr_cutoff);
    std::cout << "report over " << records.size() << " records -> " << cfg.out_dir
              << "/report.md\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"black-box soft-failure red teaming for RAG pipelines"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration file");

    // One override flag per config key; applied only when given.
    std::string corpus_path, queries_path, index_path, out_dir, cache_dir,
        transcript_path, anchor_mode;
    int run_count = 0, worker_count = 0, retrieval_k = 0, rsr_cutoff = 0,
        embedder_dim = 0, paraphrase_n = 0;
    std::uint64_t rng_seed = 0;
    double clean_gate_threshold = 0.0;
    bool isolate = true, skip_clean_gate = false;

    auto* o_corpus = app.add_option("--corpus-path", corpus_path);
    auto* o_queries = app.add_option("--queries-path", queries_path);
    auto* o_index = app.add_option("--index-path", index_path);
    auto* o_out = app.add_option("--out-dir", out_dir);
    auto* o_cache = app.add_option("--cache-dir", cache_dir);
    auto* o_transcript = app.add_option("--transcript-path", transcript_path);
    auto* o_runs = app.add_option("--run-count", run_count);
    auto* o_workers = app.add_option("--worker-count", worker_count);
    auto* o_k = app.add_option("--retrieval-k", retrieval_k);
    auto* o_cutoff = app.add_option("--rsr-cutoff", rsr_cutoff);
    auto* o_dim = app.add_option("--embedder-dim", embedder_dim);
    auto* o_seed = app.add_option("--rng-seed", rng_seed);
    auto* o_anchor = app.add_option("--anchor-mode", anchor_mode)
                         ->check(CLI::IsMember({"with_query", "without_query"}));
    auto* o_gate = app.add_option("--clean-gate-threshold", clean_gate_threshold);
    auto* o_skip_gate = app.add_flag("--skip-clean-gate", skip_clean_gate);
    auto* o_isolate = app.add_flag("--isolate,!--no-isolate", isolate);
    auto* o_para_n = app.add_option("--paraphrase-n", paraphrase_n);

    const std::vector<std::string> kinds = {"deja", "prompt_injection",
                                            "heuristic", "heuristic_payload"};

    auto* c_index = app.add_subcommand("index", "embed the corpus and save the index");

    auto* c_attack =
        app.add_subcommand("attack", "optimize and evaluate attack documents");
    std::string attack_kind = "deja";
    c_attack->add_option("--kind", attack_kind, "document builder")
        ->check(CLI::IsMember(kinds));

    auto* c_baseline = app.add_subcommand(
        "baseline", "single-shot baseline attacks (alias for attack --kind)");
    std::string baseline_kind = "prompt_injection";
    c_baseline->add_option("--kind", baseline_kind, "baseline builder")
        ->check(CLI::IsMember({"prompt_injection", "heuristic",
                               "heuristic_payload"}));

    auto* c_defend = app.add_subcommand("defend", "evaluate a defense");
    std::string which;
    c_defend->add_option("which", which, "ppl | paraphrase | ksweep")
        ->required()
        ->check(CLI::IsMember({"ppl", "paraphrase", "ksweep"}));
    std::string defend_records;
    c_defend->add_option("--records", defend_records,
                         "run records to defend against (ppl, paraphrase)");
    std::string defend_kind = "deja";
    c_defend->add_option("--kind", defend_kind, "attack kind for ksweep")
        ->check(CLI::IsMember(kinds));

    auto* c_report = app.add_subcommand("report", "summarize saved run records");
    std::vector<std::string> report_records;
    c_report->add_option("--records", report_records, "run record files")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ragjam::RunConfig cfg = config_path.empty()
                                    ? ragjam::RunConfig{}
                                    : ragjam::load_config(config_path);
        if (o_corpus->count()) cfg.corpus_path = corpus_path;
        if (o_queries->count()) cfg.queries_path = queries_path;
        if (o_index->count()) cfg.index_path = index_path;
        if (o_out->count()) cfg.out_dir = out_dir;
        if (o_cache->count()) cfg.cache_dir = cache_dir;
        if (o_transcript->count()) cfg.transcript_path = transcript_path;
        if (o_runs->count()) cfg.run_count = run_count;
        if (o_workers->count()) cfg.worker_count = worker_count;
        if (o_k->count()) cfg.retrieval_k = retrieval_k;
        if (o_cutoff->count()) cfg.rsr_cutoff = rsr_cutoff;
        if (o_dim->count()) cfg.embedder_dim = embedder_dim;
        if (o_seed->count()) cfg.evolution.rng_seed = rng_seed;
        if (o_anchor->count())
            cfg.anchor_mode = anchor_mode == "with_query"
                                  ? ragjam::AnchorMode::with_query
                                  : ragjam::AnchorMode::without_query;
        if (o_gate->count()) cfg.clean_gate_threshold = clean_gate_threshold;
        if (o_skip_gate->count()) cfg.skip_clean_gate = skip_clean_gate;
        if (o_isolate->count()) cfg.isolate = isolate;
        if (o_para_n->count()) cfg.paraphrase_n = paraphrase_n;

        if (c_index->parsed()) return cmd_index(cfg);
        if (c_attack->parsed()) return cmd_attack(cfg, parse_kind(attack_kind));
        if (c_baseline->parsed())
            return cmd_attack(cfg, parse_kind(baseline_kind));
        if (c_defend->parsed()) {
            if (which == "ksweep") return cmd_defend_ksweep(cfg, parse_kind(defend_kind));
            if (defend_records.empty())
                defend_records = cfg.out_dir + "/records_deja.jsonl";
            if (which == "ppl") return cmd_defend_ppl(cfg, defend_records);
            return cmd_defend_paraphrase(cfg, defend_records);
        }
        if (c_report->parsed()) return cmd_report(cfg, report_records);
        throw ragjam::Error(ragjam::ErrorCode::config_invalid, "no command given");
    } catch (const ragjam::Error& e) {
        std::cerr << e.what() << "\n";  // "<code>: <message>"
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "io_failure: " << e.what() << "\n";
        return 1;
    }
}
