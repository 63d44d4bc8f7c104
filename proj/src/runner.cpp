#include "ragjam/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <thread>
#include <utility>

#include "ragjam/attack.hpp"
#include "ragjam/baselines.hpp"
#include "ragjam/error.hpp"
#include "ragjam/prompts.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

namespace {

std::string victim_answer(Gateway& gateway, const Query& query,
                          const RetrievedContext& ctx) {
    CompletionRequest req;
    req.role = LlmRole::victim;
    req.prompt = prompts::victim_rag(query.text, ctx.documents);
    req.temperature = 0.0;
    req.max_tokens = 1024;
    return gateway.complete(req).text;
}

// Per-run summaries folded into one mean +- SD row.
MetricsSummary summarize_by_run(const std::vector<RunRecord>& records,
                                const FitnessConfig& cfg, int cutoff) {
    std::map<int, std::vector<RunRecord>> by_run;
    for (const auto& rec : records) by_run[rec.run_index].push_back(rec);
    std::vector<MetricsSummary> per_run;
    per_run.reserve(by_run.size());
    for (const auto& [run, recs] : by_run)
        per_run.push_back(summarize_run(recs, cfg, cutoff));
    return aggregate(per_run);
}

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

std::unique_ptr<Gateway> make_gateway(const RunConfig& config) {
    GatewayConfig gc;
    gc.cache_dir = config.cache_dir;
    gc.cache_enabled = config.cache_enabled;
    for (const auto& [role, spec] : config.providers)
        if (spec.rpm > 0) gc.rpm[role] = spec.rpm;

    auto gateway = std::make_unique<Gateway>(std::move(gc));

    std::map<LlmRole, ScriptedTranscript> transcripts;
    bool transcripts_loaded = false;
    for (const auto& [role, spec] : config.providers) {
        if (spec.kind == "scripted") {
            if (!transcripts_loaded) {
                if (config.transcript_path.empty())
                    throw Error(ErrorCode::config_invalid,
                                "scripted providers need transcript_path");
                transcripts = load_transcripts(config.transcript_path);
                transcripts_loaded = true;
            }
            // Roles missing from the file get an empty stream, which errors
            // loudly on first use instead of silently fabricating text.
            ScriptedTranscript t;
            if (auto it = transcripts.find(role); it != transcripts.end())
                t = it->second;
            gateway->set_provider(role, std::make_shared<ScriptedProvider>(
                                            std::move(t), spec.logprob_mode));
        } else {
            HttpProviderConfig hc;
            hc.endpoint =
                spec.endpoint.empty() ? "https://api.openai.com" : spec.endpoint;
            hc.model = spec.model;
            if (!spec.api_key_env.empty()) {
                const char* key = std::getenv(spec.api_key_env.c_str());
                if (key == nullptr || *key == '\0')
                    throw Error(ErrorCode::config_invalid,
                                std::string(role_name(role)) +
                                    " provider: environment variable " +
                                    spec.api_key_env + " is not set");
                hc.api_key = key;
            }
            gateway->set_provider(
                role, std::make_shared<OpenAiHttpProvider>(std::move(hc)));
        }
    }
    return gateway;
}

Runner::Runner(RunConfig config) : config_(std::move(config)) {
    gateway_ = make_gateway(config_);
    corpus_ = load_corpus(config_.corpus_path);
    if (!config_.index_path.empty() &&
        std::filesystem::exists(config_.index_path)) {
        index_ = std::make_unique<VectorIndex>(VectorIndex::load(config_.index_path));
    } else {
        index_ = std::make_unique<VectorIndex>(HashEmbedder(config_.embedder_dim));
        index_->add_all(corpus_);
    }
    queries_ = load_queries(config_.queries_path);
    judge_ = std::make_unique<Judge>(*gateway_);
}

GateResult Runner::clean_gate() {
    if (config_.skip_clean_gate) {
        GateResult all;
        all.retained = queries_;
        all.threshold = config_.clean_gate_threshold;
        return all;
    }
    ContextBuilder cb(*index_,
                      ContextBuilderConfig{config_.retrieval_k, config_.isolate});
    std::vector<std::pair<Query, double>> scores;
    scores.reserve(queries_.size());
    for (const auto& query : queries_) {
        AttributionScope scope("gate:" + query.id);
        const RetrievedContext ctx = cb.build(query);
        const std::string answer = victim_answer(*gateway_, query, ctx);
        const JudgeVerdict verdict = judge_->score_aus(query, answer);
        scores.emplace_back(query, verdict.aus.value);
    }
    return gate_queries(scores, config_.clean_gate_threshold);
}

std::vector<RunRecord> Runner::run_attacks(Provenance kind) {
    const GateResult gate = clean_gate();
    return run_attacks_at_k(kind, gate.retained, config_.retrieval_k, 0);
}

std::vector<RunRecord> Runner::run_attacks_at_k(Provenance kind,
                                                const std::vector<Query>& queries,
                                                int k, int run_offset) {
    if (kind == Provenance::benign)
        throw Error(ErrorCode::precondition_violation,
                    "benign is not an attack kind");

    struct Task {
        const Query* query;
        int run_index;
    };
    std::vector<Task> tasks;
    tasks.reserve(queries.size() * static_cast<std::size_t>(config_.run_count));
    for (int run = 0; run < config_.run_count; ++run)
        for (const auto& query : queries)
            tasks.push_back({&query, run_offset + run});

    std::vector<RunRecord> records(tasks.size());
    const int workers =
        std::min<int>(config_.worker_count, static_cast<int>(tasks.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            records[i] =
                attack_one(*tasks[i].query, kind, tasks[i].run_index, k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (;;) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= tasks.size()) break;
                        records[i] = attack_one(*tasks[i].query, kind,
                                                tasks[i].run_index, k);
                    }
                } catch (...) {
                    failures[static_cast<std::size_t>(w)] = std::current_exception();
                    next.store(tasks.size());  // drain remaining work
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& failure : failures)
            if (failure) std::rethrow_exception(failure);
    }
    return records;
}

RunRecord Runner::attack_one(const Query& query, Provenance kind, int run_index,
                             int k) {
    const std::string tag = std::string(provenance_name(kind)) + ":" + query.id +
                            ":r" + std::to_string(run_index) + ":k" +
                            std::to_string(k);
    AttributionScope scope(tag);
    const auto start = std::chrono::steady_clock::now();

    RunRecord rec;
    rec.query_id = query.id;
    rec.run_index = run_index;
    rec.kind = kind;
    rec.fingerprint = config_.fingerprint();

    ContextBuilder cb(*index_, ContextBuilderConfig{k, config_.isolate});

    if (kind == Provenance::deja) {
        EvolutionConfig evo = config_.evolution;
        evo.rng_seed = query_seed(config_.evolution.rng_seed, run_index, query.id);
        AttackEngine engine(*gateway_, *judge_, cb, evo, config_.fitness,
                            config_.anchor_mode);
        AttackOutcome out = engine.evolve(query);
        rec.strategy = out.strategy.chosen.tag;
        rec.hook = out.hook.hook_text;
        rec.best_payload = out.best.text;
        rec.document_text = out.document.assembled;
        rec.final_answer = out.final_answer;
        rec.final_aus = out.best.aus ? out.best.aus->value : kAusMin;
        rec.outcome = out.best.outcome.value_or(OutcomeClass::other);
        rec.adv_rank = out.adv_rank;
        rec.trajectory = out.trajectory;
        rec.judge_calls = out.judge_calls;
    } else {
        const AdversarialDocument doc =
            kind == Provenance::prompt_injection
                ? build_prompt_injection_doc(
                      query, pick_slots(query, config_.warning_lexicon.empty()
                                                   ? default_warning_lexicon()
                                                   : config_.warning_lexicon))
                : build_heuristic_payload_doc(query, *gateway_);
        const RetrievedContext ctx = cb.build_with_adversary(query, doc);
        const std::string answer = victim_answer(*gateway_, query, ctx);
        const JudgeVerdict verdict = judge_->score_aus(query, answer);
        rec.hook = doc.hook;
        rec.best_payload = doc.payload;
        rec.document_text = doc.assembled;
        rec.final_answer = answer;
        rec.final_aus = verdict.aus.value;
        rec.outcome = classify_outcome(verdict.aus, config_.fitness);
        rec.adv_rank = ctx.adv_rank;
        rec.judge_calls = 1;
    }

    rec.tokens = gateway_->usage_for(tag);
    // Wall time is noise under replay and would break golden byte-identity.
    if (!gateway_->all_scripted()) rec.wall_ms = elapsed_ms(start);
    return rec;
}

Runner::PplDefenseResult Runner::defend_perplexity(
    const std::vector<RunRecord>& attacks) {
    if (attacks.empty())
        throw Error(ErrorCode::empty_input, "no attack records to score");
    std::vector<Document> docs = corpus_;
    docs.reserve(corpus_.size() + attacks.size());
    for (const auto& rec : attacks) {
        Document d;
        d.id = std::string("adv:") + provenance_name(rec.kind) + ":" +
               rec.query_id + ":r" + std::to_string(rec.run_index);
        d.text = rec.document_text;
        d.provenance = rec.kind;
        docs.push_back(std::move(d));
    }

    PplDefenseResult result;
    result.records = perplexity_records(*gateway_, LlmRole::victim, docs);
    std::vector<double> clean;
    std::vector<double> adversarial;
    for (const auto& r : result.records)
        (r.provenance == Provenance::benign ? clean : adversarial)
            .push_back(r.perplexity);
    result.roc = roc_auc(clean, adversarial);
    return result;
}

Runner::ParaphraseResult Runner::defend_paraphrase(
    const std::vector<RunRecord>& attacks) {
    if (attacks.empty())
        throw Error(ErrorCode::empty_input, "no attack records to re-evaluate");
    std::map<std::string, const Query*> by_id;
    for (const auto& q : queries_) by_id[q.id] = &q;

    ContextBuilder cb(*index_,
                      ContextBuilderConfig{config_.retrieval_k, config_.isolate});
    ParaphraseResult result;
    for (const auto& rec : attacks) {
        const auto it = by_id.find(rec.query_id);
        if (it == by_id.end())
            throw Error(ErrorCode::malformed_input,
                        "attack record for unknown query " + rec.query_id);
        const std::vector<Query> rewrites =
            paraphrase_queries(*gateway_, *it->second, config_.paraphrase_n);

        // The document is frozen exactly as the attack shipped it; the whole
        // defense is that it never saw these phrasings.
        AdversarialDocument adv;
        adv.assembled = rec.document_text;

        for (const auto& pq : rewrites) {
            const std::string tag =
                "para:" + pq.id + ":r" + std::to_string(rec.run_index);
            AttributionScope scope(tag);
            const auto start = std::chrono::steady_clock::now();

            const RetrievedContext ctx = cb.build_with_adversary(pq, adv);
            const std::string answer = victim_answer(*gateway_, pq, ctx);
            const JudgeVerdict verdict = judge_->score_aus(pq, answer);

            RunRecord out;
            out.query_id = pq.id;
            out.run_index = rec.run_index;
            out.kind = rec.kind;
            out.strategy = rec.strategy;
            out.hook = rec.hook;
            out.best_payload = rec.best_payload;
            out.document_text = rec.document_text;
            out.final_answer = answer;
            out.final_aus = verdict.aus.value;
            out.outcome = classify_outcome(verdict.aus, config_.fitness);
            out.adv_rank = ctx.adv_rank;
            out.judge_calls = 1;
            out.fingerprint = rec.fingerprint;
            out.tokens = gateway_->usage_for(tag);
            if (!gateway_->all_scripted()) out.wall_ms = elapsed_ms(start);
            result.records.push_back(std::move(out));
        }
    }
    result.summary =
        summarize_by_run(result.records, config_.fitness, config_.rsr_cutoff);
    return result;
}

std::vector<Runner::SweepRow> Runner::defend_ksweep(Provenance kind) {
    const GateResult gate = clean_gate();
    std::vector<SweepRow> rows;
    rows.reserve(config_.sweep_ks.size());
    for (const int k : config_.sweep_ks) {
        const std::vector<RunRecord> records =
            run_attacks_at_k(kind, gate.retained, k, 0);
        rows.push_back(
            {k, summarize_by_run(records, config_.fitness, config_.rsr_cutoff)});
    }
    return rows;
}

std::uint64_t Runner::query_seed(std::uint64_t base, int run_index,
                                 const std::string& query_id) {
    // Distinct per (query, run), stable across platforms and reorderings.
    return base + fnv1a64(query_id) +
           0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(run_index);
}

}  // namespace ragjam
