#include "ragjam/baselines.hpp"

#include "ragjam/error.hpp"
#include "ragjam/prompts.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

const std::vector<std::string>& default_warning_lexicon() {
    static const std::vector<std::string> kLexicon = {
        "financial instability",
        "legal liability",
        "medical misinformation",
    };
    return kLexicon;
}

InjectionSlots pick_slots(const Query& query,
                          const std::vector<std::string>& lexicon) {
    if (lexicon.empty())
        throw Error(ErrorCode::config_invalid, "warning lexicon is empty");
    InjectionSlots slots;
    slots.subject = query.text;
    // Hash-picked, so a query keeps its slots across runs without any state.
    const std::uint64_t h = fnv1a64(query.id);
    slots.controversy = lexicon[h % lexicon.size()];
    slots.harmful_purpose = lexicon[(h / 7) % lexicon.size()];
    return slots;
}

AdversarialDocument build_prompt_injection_doc(const Query& query,
                                               const InjectionSlots& slots) {
    if (slots.subject.empty() || slots.controversy.empty() ||
        slots.harmful_purpose.empty())
        throw Error(ErrorCode::missing_slot, "injection slots must be non-empty");
    const std::string payload = prompts::injection_template(
        slots.subject, slots.controversy, slots.harmful_purpose);
    return make_adversarial(query.text, "", payload);
}

AdversarialDocument build_heuristic_payload_doc(const Query& query,
                                                Gateway& gateway) {
    CompletionRequest req;
    req.role = LlmRole::auxiliary;
    req.prompt = prompts::heuristic_payload(query.text);
    req.temperature = 0.7;
    req.max_tokens = 1024;
    const std::string payload = trim(gateway.complete(req).text);
    if (payload.empty())
        throw Error(ErrorCode::generation_failure,
                    "heuristic generator returned no payload");
    if (contains_ci(payload, "I don't know") || contains_ci(payload, "I do not know"))
        throw Error(ErrorCode::generation_failure,
                    "heuristic payload contains a hard refusal");
    return make_adversarial(query.text, "", payload);
}

}  // namespace ragjam
