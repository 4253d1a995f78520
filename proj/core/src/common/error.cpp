#include <mlforge/common/error.hpp>

namespace mlforge {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::not_found: return "not_found";
    case Errc::unknown_node: return "unknown_node";
    case Errc::unknown_job: return "unknown_job";
    case Errc::unknown_session: return "unknown_session";
    case Errc::unknown_dataset: return "unknown_dataset";
    case Errc::unknown_run: return "unknown_run";
    case Errc::duplicate_node_conflict: return "duplicate_node_conflict";
    case Errc::not_master: return "not_master";
    case Errc::invalid_spec: return "invalid_spec";
    case Errc::no_candidates: return "no_candidates";
    case Errc::corrupt_log: return "corrupt_log";
    case Errc::storage_full: return "storage_full";
    case Errc::empty_dataset: return "empty_dataset";
    case Errc::duplicate_path: return "duplicate_path";
    case Errc::non_monotonic_step: return "non_monotonic_step";
    case Errc::no_checkpoint: return "no_checkpoint";
    case Errc::build_failed: return "build_failed";
    case Errc::missing_code_bundle: return "missing_code_bundle";
    case Errc::resource_lost: return "resource_lost";
    case Errc::illegal_transition: return "illegal_transition";
    case Errc::illegal_state: return "illegal_state";
    case Errc::unknown_hyperparam: return "unknown_hyperparam";
    case Errc::empty_code: return "empty_code";
    case Errc::empty_sweep: return "empty_sweep";
    case Errc::no_board_config: return "no_board_config";
    case Errc::config_locked: return "config_locked";
    case Errc::duplicate_point: return "duplicate_point";
    case Errc::out_of_order_step: return "out_of_order_step";
    case Errc::empty_directory: return "empty_directory";
    case Errc::master_unavailable: return "master_unavailable";
    }
    return "unknown";
}

} // namespace mlforge
