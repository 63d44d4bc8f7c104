#include "ragjam/error.hpp"

namespace ragjam {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::config_invalid: return "config_invalid";
        case ErrorCode::io_failure: return "io_failure";
        case ErrorCode::malformed_input: return "malformed_input";
        case ErrorCode::duplicate_id: return "duplicate_id";
        case ErrorCode::empty_text: return "empty_text";
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::empty_index: return "empty_index";
        case ErrorCode::k_too_large: return "k_too_large";
        case ErrorCode::provider_unavailable: return "provider_unavailable";
        case ErrorCode::provider_rejected: return "provider_rejected";
        case ErrorCode::timeout: return "timeout";
        case ErrorCode::capability_missing: return "capability_missing";
        case ErrorCode::judge_parse_failure: return "judge_parse_failure";
        case ErrorCode::hook_generation_failed: return "hook_generation_failed";
        case ErrorCode::population_init_failed: return "population_init_failed";
        case ErrorCode::invalid_crossover: return "invalid_crossover";
        case ErrorCode::precondition_violation: return "precondition_violation";
        case ErrorCode::generation_failure: return "generation_failure";
        case ErrorCode::missing_slot: return "missing_slot";
        case ErrorCode::no_records: return "no_records";
        case ErrorCode::write_failure: return "write_failure";
    }
    return "unknown";
}

}  // namespace ragjam
