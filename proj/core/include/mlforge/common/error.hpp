#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlforge {

/// Error categories shared by every module. The snake_case name of each
/// value is what the gateway puts in the `code` field of an error body.
enum class Errc {
    invalid_argument,
    not_found,
    unknown_node,
    unknown_job,
    unknown_session,
    unknown_dataset,
    unknown_run,
    duplicate_node_conflict,
    not_master,
    invalid_spec,
    no_candidates,
    corrupt_log,
    storage_full,
    empty_dataset,
    duplicate_path,
    non_monotonic_step,
    no_checkpoint,
    build_failed,
    missing_code_bundle,
    resource_lost,
    illegal_transition,
    illegal_state,
    unknown_hyperparam,
    empty_code,
    empty_sweep,
    no_board_config,
    config_locked,
    duplicate_point,
    out_of_order_step,
    empty_directory,
    master_unavailable,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return to_string(code_); }

private:
    Errc code_;
};

} // namespace mlforge
