#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <mlforge/agent/environment.hpp>
#include <mlforge/agent/sim_trainer.hpp>
#include <mlforge/blobstore/dataset_catalog.hpp>
#include <mlforge/blobstore/digest.hpp>
#include <mlforge/common/clock.hpp>
#include <mlforge/common/hyperparams.hpp>
#include <mlforge/scheduler/types.hpp>

namespace mlforge::session {

enum class SessionState { created, queued, scheduled, running, paused, done, failed, stopped };

std::string_view to_string(SessionState s) noexcept;
/// Upper-case names as printed ("RUNNING"). Throws Error(invalid_argument).
SessionState parse_state(std::string_view text);

bool is_terminal(SessionState s) noexcept;
bool legal_transition(SessionState from, SessionState to) noexcept;

struct HistoryEntry {
    Timestamp at;
    std::string transition;  // a state name, or "TUNED"
    std::string detail;

    bool operator==(const HistoryEntry&) const = default;
};

struct ParentLink {
    std::string session_id;
    std::int64_t step = 0;

    bool operator==(const ParentLink&) const = default;
};

struct Session {
    std::string session_id;
    std::string user;
    store::DatasetRef dataset;
    store::Digest code_digest;
    std::string entrypoint;
    Hyperparams hyperparams;
    Hyperparams initial_hyperparams;
    int priority = 0;
    SessionState state = SessionState::created;
    std::vector<HistoryEntry> history;
    std::optional<ParentLink> parent;
    std::optional<std::string> sweep_id;

    sched::Resources resources;
    std::int64_t max_steps = 100;
    std::int64_t checkpoint_interval = 5;
    agent::EnvironmentSpec environment;
    std::uint64_t seed = 0;
    std::optional<agent::SimTrainerState> start_state;

    std::optional<std::string> node_id;
    std::int64_t step = 0;
    std::optional<double> best_value;
    std::optional<std::int64_t> best_checkpoint_step;
    Timestamp created_at;
};

nlohmann::json to_json(const HistoryEntry& h);
nlohmann::json to_json(const Session& s);
/// One history entry per line.
std::string history_jsonl(const Session& s);

} // namespace mlforge::session
