#include "ragjam/attack.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "ragjam/error.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

using nlohmann::json;

const char* operator_tag_name(OperatorTag tag) {
    switch (tag) {
        case OperatorTag::init: return "init";
        case OperatorTag::micro: return "micro";
        case OperatorTag::cross: return "cross";
        case OperatorTag::innov: return "innov";
        case OperatorTag::feedback: return "feedback";
    }
    return "init";
}

OperatorTag operator_tag_from_name(const std::string& name) {
    for (OperatorTag t : {OperatorTag::init, OperatorTag::micro, OperatorTag::cross,
                          OperatorTag::innov, OperatorTag::feedback}) {
        if (name == operator_tag_name(t)) return t;
    }
    throw Error(ErrorCode::malformed_input, "unknown operator '" + name + "'");
}

const char* termination_reason_name(TerminationReason r) {
    return r == TerminationReason::tolerance_met ? "tolerance_met"
                                                 : "budget_exhausted";
}

Strategy argmax_strategy(const std::array<double, 6>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;  // strict: ties keep the earliest
    }
    return strategy_set()[best];
}

bool contains_banned_marker(const std::string& text,
                            const std::vector<std::string>& markers) {
    return std::any_of(markers.begin(), markers.end(), [&](const std::string& m) {
        return contains_ci(text, m);
    });
}

prompts::MicroDirection micro_direction(double current_aus, double tau_soft) {
    return current_aus > tau_soft ? prompts::MicroDirection::lower
                                  : prompts::MicroDirection::raise;
}

namespace {

// First JSON object embedded in a reply, or discarded JSON on failure.
json extract_object(const std::string& raw) {
    json j = json::parse(trim(raw), nullptr, false);
    if (j.is_object()) return j;
    const auto open = raw.find('{');
    const auto close = raw.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close <= open)
        return json(json::value_t::discarded);
    j = json::parse(raw.substr(open, close - open + 1), nullptr, false);
    return j.is_object() ? j : json(json::value_t::discarded);
}

bool better(const CandidatePayload& a, const CandidatePayload& b) {
    const double fa = a.fitness ? a.fitness->fitness : -1.0;
    const double fb = b.fitness ? b.fitness->fitness : -1.0;
    if (fa != fb) return fa > fb;
    return a.id < b.id;  // deterministic order under exact fitness ties
}

}  // namespace

AttackEngine::AttackEngine(Gateway& gateway, const Judge& judge,
                           const ContextBuilder& contexts, EvolutionConfig evo,
                           FitnessConfig fit, AnchorMode anchor_mode,
                           OperatorTemperatures temps)
    : gateway_(gateway),
      judge_(judge),
      contexts_(contexts),
      evo_(evo),
      fit_(fit),
      anchor_mode_(anchor_mode),
      temps_(temps),
      banned_markers_({"I don't know", "I do not know", "cannot answer",
                       "can't answer"}),
      rng_(evo.rng_seed) {
    evo_.validate();
    fit_.validate();
}

std::string AttackEngine::next_id() {
    std::string n = std::to_string(id_counter_++);
    return "p" + std::string(3 - std::min<std::size_t>(3, n.size()), '0') + n;
}

StrategyAssessment AttackEngine::select_strategy(const Query& query) {
    CompletionRequest req;
    req.role = LlmRole::auxiliary;
    req.prompt = prompts::strategy_compatibility(query.text);
    req.temperature = 0.0;  // scoring call; sampled diversity hurts here
    req.max_tokens = 256;

    StrategyAssessment out;
    for (int attempt = 1; attempt <= 3; ++attempt) {
        req.seed_hint = attempt;
        const json j = extract_object(gateway_.complete(req).text);
        if (j.is_discarded()) continue;
        bool complete = true;
        std::array<double, 6> scores{};
        for (std::size_t i = 0; i < strategy_set().size(); ++i) {
            const char* key = strategy_tag_name(strategy_set()[i].tag);
            if (!j.contains(key) || !j[key].is_number()) {
                complete = false;
                break;
            }
            scores[i] = std::clamp(j[key].get<double>(), 0.0, 10.0);
        }
        if (!complete) continue;
        out.scores = scores;
        out.chosen = argmax_strategy(scores);
        return out;
    }
    // A judge-style reply that never parses should not kill the run; the
    // first framing is the broadest fit for factual queries.
    out.scores = {};
    out.chosen = strategy_set().front();
    return out;
}

HookSpec AttackEngine::generate_hook(const Query& query, const Strategy& strategy) {
    HookSpec spec;
    spec.strategy = strategy;

    CompletionRequest req;
    req.role = LlmRole::auxiliary;
    req.prompt = prompts::hook(query.text, spec.style_constraints, strategy);
    req.temperature = temps_.baseline;
    req.max_tokens = 512;

    for (int attempt = 1; attempt <= 4; ++attempt) {  // 1 try + 3 regenerations
        req.seed_hint = attempt;
        const std::string text = trim(gateway_.complete(req).text);
        if (text.empty() || contains_banned_marker(text, banned_markers_)) continue;
        spec.hook_text = text;
        return spec;
    }
    throw Error(ErrorCode::hook_generation_failed,
                "no valid hook for query '" + query.id + "' after 4 attempts");
}

AdversarialDocument AttackEngine::assemble(const Query& query, const HookSpec& hook,
                                           const std::string& payload) const {
    if (hook.hook_text.empty())
        throw Error(ErrorCode::empty_text, "hook must be non-empty");
    if (payload.empty())
        throw Error(ErrorCode::empty_text, "payload must be non-empty");
    const std::string anchor =
        anchor_mode_ == AnchorMode::with_query ? query.text : std::string{};
    return make_adversarial(anchor, hook.hook_text, payload);
}

AttackEngine::Evaluation AttackEngine::evaluate(const Query& query,
                                                const HookSpec& hook,
                                                const std::string& payload) {
    const AdversarialDocument adv = assemble(query, hook, payload);
    const RetrievedContext ctx = contexts_.build_with_adversary(query, adv);

    CompletionRequest req;
    req.role = LlmRole::victim;
    req.prompt = prompts::victim_rag(query.text, ctx.documents);
    req.temperature = 0.0;
    req.max_tokens = 1024;
    const std::string answer = gateway_.complete(req).text;

    const JudgeVerdict verdict = judge_.score_aus(query, answer);
    ++judge_calls_;

    Evaluation ev{verdict.aus, fitness(verdict.aus, fit_),
                  classify_outcome(verdict.aus, fit_), answer, ctx.adv_rank};
    return ev;
}

std::vector<CandidatePayload> AttackEngine::init_population(const Query& query,
                                                            const HookSpec& hook) {
    std::vector<CandidatePayload> seeds;
    std::string failures;
    for (int i = 1; i <= evo_.init_seed_count; ++i) {
        CompletionRequest req;
        req.role = LlmRole::auxiliary;
        req.prompt = prompts::init_payload(query.text, hook.strategy, i);
        req.temperature = temps_.baseline;
        req.seed_hint = i;
        req.max_tokens = 1024;
        try {
            CandidatePayload c;
            c.text = trim(gateway_.complete(req).text);
            if (c.text.empty())
                throw Error(ErrorCode::generation_failure, "empty seed payload");
            c.id = next_id();
            c.generation = 0;
            c.op = OperatorTag::init;
            const Evaluation ev = evaluate(query, hook, c.text);
            c.aus = ev.aus;
            c.fitness = ev.fit;
            c.outcome = ev.outcome;
            c.answer = ev.answer;
            c.adv_rank = ev.adv_rank;
            seeds.push_back(std::move(c));
        } catch (const Error& e) {
            failures += std::string(failures.empty() ? "" : "; ") + e.what();
        }
    }
    if (seeds.size() < static_cast<std::size_t>(evo_.population_size)) {
        throw Error(ErrorCode::population_init_failed,
                    std::to_string(seeds.size()) + "/" +
                        std::to_string(evo_.init_seed_count) +
                        " seeds usable, need " +
                        std::to_string(evo_.population_size) +
                        (failures.empty() ? "" : " (" + failures + ")"));
    }
    std::sort(seeds.begin(), seeds.end(), better);
    seeds.resize(static_cast<std::size_t>(evo_.population_size));
    return seeds;
}

CandidatePayload AttackEngine::op_micro(const CandidatePayload& parent,
                                        const Strategy& strategy,
                                        double current_aus,
                                        prompts::MicroDirection direction) {
    CompletionRequest req;
    req.role = LlmRole::auxiliary;
    req.prompt = prompts::micro(parent.text, strategy, current_aus, direction);
    req.temperature = temps_.baseline;
    req.max_tokens = 1024;
    CandidatePayload child;
    child.text = trim(gateway_.complete(req).text);
    if (child.text.empty())
        throw Error(ErrorCode::generation_failure, "micro edit returned no text");
    child.id = next_id();
    child.op = OperatorTag::micro;
    child.parents = {parent.id};
    return child;
}

CandidatePayload AttackEngine::op_cross(const CandidatePayload& a,
                                        const CandidatePayload& b,
                                        const Strategy& strategy) {
    if (a.id == b.id)
        throw Error(ErrorCode::invalid_crossover,
                    "crossover needs two distinct parents, got '" + a.id + "' twice");
    if (!a.aus || !b.aus)
        throw Error(ErrorCode::precondition_violation,
                    "crossover parents must both be scored");
    CompletionRequest req;
    req.role = LlmRole::auxiliary;
    req.prompt = prompts::cross(a.text, a.aus->value, b.text, b.aus->value, strategy);
    req.temperature = temps_.baseline;
    req.max_tokens = 1024;
    CandidatePayload child;
    child.text = trim(gateway_.complete(req).text);
    if (child.text.empty())
        throw Error(ErrorCode::generation_failure, "crossover returned no text");
    child.id = next_id();
    child.op = OperatorTag::cross;
    child.parents = {a.id, b.id};
    return child;
}

CandidatePayload AttackEngine::op_innov(const CandidatePayload& parent,
                                        const Strategy& strategy) {
    CompletionRequest req;
    req.role = LlmRole::auxiliary;
    req.prompt = prompts::innov(parent.text, strategy);
    req.temperature = temps_.innovation;
    req.max_tokens = 1024;
    CandidatePayload child;
    child.text = trim(gateway_.complete(req).text);
    if (child.text.empty())
        throw Error(ErrorCode::generation_failure, "innovation returned no text");
    child.id = next_id();
    child.op = OperatorTag::innov;
    child.parents = {parent.id};
    return child;
}

CandidatePayload AttackEngine::op_feedback(const CandidatePayload& parent,
                                           const std::string& failed_answer) {
    if (!parent.outcome || *parent.outcome == OutcomeClass::soft)
        throw Error(ErrorCode::precondition_violation,
                    "feedback correction is reserved for off-target candidates");
    if (!parent.aus)
        throw Error(ErrorCode::precondition_violation,
                    "feedback parent must be scored");

    CompletionRequest diag_req;
    diag_req.role = LlmRole::auxiliary;
    diag_req.prompt = prompts::feedback_diagnosis(parent.text, failed_answer,
                                                  parent.aus->value, fit_.tau_soft);
    diag_req.temperature = temps_.baseline;
    diag_req.max_tokens = 512;
    const std::string diagnosis = trim(gateway_.complete(diag_req).text);
    if (diagnosis.empty())
        throw Error(ErrorCode::generation_failure, "empty failure diagnosis");

    CompletionRequest rev_req;
    rev_req.role = LlmRole::auxiliary;
    rev_req.prompt = prompts::feedback_revision(parent.text, diagnosis);
    rev_req.temperature = temps_.baseline;
    rev_req.max_tokens = 1024;
    CandidatePayload child;
    child.text = trim(gateway_.complete(rev_req).text);
    if (child.text.empty())
        throw Error(ErrorCode::generation_failure, "feedback revision returned no text");
    child.id = next_id();
    child.op = OperatorTag::feedback;
    child.parents = {parent.id};
    return child;
}

OperatorTag AttackEngine::choose_operator(const Trajectory& trajectory,
                                          const CandidatePayload& candidate,
                                          int distinct_parents) const {
    if (candidate.outcome && *candidate.outcome == OutcomeClass::hard)
        return OperatorTag::feedback;
    const auto& gens = trajectory.generations;
    if (gens.size() >= 3 &&
        gens.back().best_fitness <= gens[gens.size() - 3].best_fitness)
        return OperatorTag::innov;
    if (!gens.empty() &&
        std::abs(gens.back().best_aus - fit_.tau_soft) <= 0.5)
        return OperatorTag::micro;
    return distinct_parents >= 2 ? OperatorTag::cross : OperatorTag::micro;
}

AttackOutcome AttackEngine::evolve(const Query& query) {
    StrategyAssessment strategy = select_strategy(query);
    HookSpec hook = generate_hook(query, strategy.chosen);
    std::vector<CandidatePayload> pop = init_population(query, hook);

    Trajectory trajectory;
    trajectory.termination = TerminationReason::budget_exhausted;

    for (int gen = 1; gen <= evo_.max_generations; ++gen) {
        // Evaluation: only fresh candidates lack scores; survivors keep
        // theirs (their document text is unchanged, so re-judging would
        // spend tokens to learn the same number).
        for (auto& c : pop) {
            if (c.aus) continue;
            const Evaluation ev = evaluate(query, hook, c.text);
            c.aus = ev.aus;
            c.fitness = ev.fit;
            c.outcome = ev.outcome;
            c.answer = ev.answer;
            c.adv_rank = ev.adv_rank;
        }

        const auto& best =
            *std::min_element(pop.begin(), pop.end(),
                              [](const auto& a, const auto& b) { return better(a, b); });

        GenerationRecord rec;
        rec.generation = gen;
        rec.best_id = best.id;
        rec.best_aus = best.aus->value;
        rec.best_fitness = best.fitness->fitness;
        for (const auto& c : pop) rec.operator_counts[operator_tag_name(c.op)]++;
        trajectory.generations.push_back(rec);

        if (std::abs(best.aus->value - fit_.tau_soft) <= evo_.tolerance) {
            trajectory.termination = TerminationReason::tolerance_met;
            break;
        }
        if (gen == evo_.max_generations) break;  // budget spent; skip refinement

        // Refinement: parents are the fittest parent_count; each offspring
        // draws its parent(s) from that pool.
        std::vector<CandidatePayload> pool = pop;
        std::sort(pool.begin(), pool.end(), better);
        pool.resize(std::min<std::size_t>(
            pool.size(), static_cast<std::size_t>(evo_.parent_count)));

        std::vector<CandidatePayload> offspring;
        while (offspring.size() < static_cast<std::size_t>(evo_.population_size)) {
            const CandidatePayload& parent =
                pool[static_cast<std::size_t>(rng_() % pool.size())];
            const OperatorTag op = choose_operator(trajectory, parent,
                                                   static_cast<int>(pool.size()));
            CandidatePayload child;
            switch (op) {
                case OperatorTag::feedback:
                    child = op_feedback(parent, parent.answer);
                    break;
                case OperatorTag::innov:
                    child = op_innov(parent, strategy.chosen);
                    break;
                case OperatorTag::micro:
                    child = op_micro(parent, strategy.chosen, parent.aus->value,
                                     micro_direction(parent.aus->value, fit_.tau_soft));
                    break;
                case OperatorTag::cross: {
                    std::size_t other =
                        static_cast<std::size_t>(rng_() % (pool.size() - 1));
                    std::size_t self = static_cast<std::size_t>(
                        &parent - pool.data());
                    if (other >= self) ++other;
                    child = op_cross(parent, pool[other], strategy.chosen);
                    break;
                }
                case OperatorTag::init:
                    // choose_operator never returns init
                    throw Error(ErrorCode::precondition_violation, "init as operator");
            }
            child.generation = gen;
            const Evaluation ev = evaluate(query, hook, child.text);
            child.aus = ev.aus;
            child.fitness = ev.fit;
            child.outcome = ev.outcome;
            child.answer = ev.answer;
            child.adv_rank = ev.adv_rank;
            offspring.push_back(std::move(child));
        }

        // Survival: parents compete with children; best N continue.
        pop.insert(pop.end(), offspring.begin(), offspring.end());
        std::sort(pop.begin(), pop.end(), better);
        pop.resize(static_cast<std::size_t>(evo_.population_size));
    }

    const auto& best =
        *std::min_element(pop.begin(), pop.end(),
                          [](const auto& a, const auto& b) { return better(a, b); });

    AttackOutcome out;
    out.best = best;
    out.trajectory = trajectory;
    out.hook = hook;
    out.strategy = strategy;
    out.document = assemble(query, hook, best.text);
    out.final_answer = best.answer;
    out.adv_rank = best.adv_rank;
    out.judge_calls = judge_calls_;
    return out;
}

}  // namespace ragjam
