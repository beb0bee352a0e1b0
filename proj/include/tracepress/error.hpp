#pragma once

#include <stdexcept>
#include <string>

namespace tracepress {

enum class ErrorCode {
    // metrics
    empty_gold_list,
    // trace
    missing_think_block,
    empty_think_block,
    invalid_budget,
    invalid_input,
    division_by_zero,
    backend_count_unavailable,
    // rewards
    out_of_range,
    // grpo
    group_too_small,
    non_finite_reward,
    length_mismatch,
    non_finite_logprob,
    non_finite_gradient,
    // backend
    timeout,
    http_status,
    malformed_response,
    auth_missing,
    unscripted_request,
    script_exhausted,
    // pipeline
    empty_ratio_set,
    // data
    file_not_found,
    schema_error,
    duplicate_id,
    empty_dataset,
    sample_too_large,
    // harness
    io_error,
    config_error,
};

// Single exception type for the whole library; the code tells callers what
// went wrong without a taxonomy of exception classes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &msg) : std::runtime_error(msg), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string &msg) {
    throw Error(code, msg);
}

}  // namespace tracepress
