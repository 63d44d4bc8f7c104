#pragma once

#include <stdexcept>
#include <string>

namespace ragjam {

// Machine-parsable error codes surfaced on every failure path.
enum class ErrorCode {
    config_invalid,
    io_failure,
    malformed_input,
    duplicate_id,
    empty_text,
    empty_input,
    empty_index,
    k_too_large,
    provider_unavailable,
    provider_rejected,
    timeout,
    capability_missing,
    judge_parse_failure,
    hook_generation_failed,
    population_init_failed,
    invalid_crossover,
    precondition_violation,
    generation_failure,
    missing_slot,
    no_records,
    write_failure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Transient provider failures are retried by the gateway; everything else is not.
class TransientError : public Error {
public:
    using Error::Error;
};

}  // namespace ragjam
