#pragma once

#include <string>
#include <vector>

#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"

namespace ragjam {

struct InjectionSlots {
    std::string subject;
    std::string controversy;
    std::string harmful_purpose;
};

// Configurable high-stakes warning lexicon the slot values are drawn from.
const std::vector<std::string>& default_warning_lexicon();

// Deterministic slot assignment for a query: subject is the query text,
// the two warnings are picked from the lexicon by query-id hash.
InjectionSlots pick_slots(const Query& query,
                          const std::vector<std::string>& lexicon);

// Static constraint-heavy instruction block appended to the query. Purely
// template substitution; no model in the loop.
AdversarialDocument build_prompt_injection_doc(const Query& query,
                                               const InjectionSlots& slots);

// One-shot evasive payload from the auxiliary model, appended to the query.
// Rejects empty or refusal-marker output.
AdversarialDocument build_heuristic_payload_doc(const Query& query,
                                                Gateway& gateway);

}  // namespace ragjam
