#include <mlforge/session/session.hpp>

#include <array>

#include <mlforge/common/error.hpp>

namespace mlforge::session {

namespace {
constexpr std::array kNames{"CREATED", "QUEUED", "SCHEDULED", "RUNNING", "PAUSED", "DONE", "FAILED", "STOPPED"};
}

std::string_view to_string(SessionState s) noexcept { return kNames[static_cast<std::size_t>(s)]; }

SessionState parse_state(std::string_view text) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (text == kNames[i]) {
            return static_cast<SessionState>(i);
        }
    }
    throw Error(Errc::invalid_argument, "unknown session state '" + std::string(text) + "'");
}

bool is_terminal(SessionState s) noexcept {
    return s == SessionState::done || s == SessionState::failed || s == SessionState::stopped;
}

bool legal_transition(SessionState from, SessionState to) noexcept {
    using S = SessionState;
    switch (from) {
    case S::created: return to == S::queued || to == S::scheduled;
    case S::queued: return to == S::scheduled || to == S::stopped;
    case S::scheduled: return to == S::running || to == S::failed;
    case S::running: return to == S::paused || to == S::done || to == S::failed || to == S::stopped;
    case S::paused: return to == S::running || to == S::stopped;
    default: return false;
    }
}

nlohmann::json to_json(const HistoryEntry& h) {
    return nlohmann::json{{"at", format_timestamp(h.at)}, {"transition", h.transition}, {"detail", h.detail}};
}

nlohmann::json to_json(const Session& s) {
    auto history = nlohmann::json::array();
    for (const auto& h : s.history) {
        history.push_back(to_json(h));
    }
    nlohmann::json j{{"session_id", s.session_id},
                     {"user", s.user},
                     {"dataset", s.dataset.to_string()},
                     {"code_digest", s.code_digest.hex()},
                     {"entrypoint", s.entrypoint},
                     {"hyperparams", hyperparams_to_json(s.hyperparams)},
                     {"initial_hyperparams", hyperparams_to_json(s.initial_hyperparams)},
                     {"priority", s.priority},
                     {"state", to_string(s.state)},
                     {"history", std::move(history)},
                     {"resources", sched::to_json(s.resources)},
                     {"max_steps", s.max_steps},
                     {"checkpoint_interval", s.checkpoint_interval},
                     {"step", s.step},
                     {"created_at", format_timestamp(s.created_at)}};
    j["parent"] = s.parent ? nlohmann::json{{"session_id", s.parent->session_id}, {"step", s.parent->step}}
                           : nlohmann::json(nullptr);
    j["sweep_id"] = s.sweep_id ? nlohmann::json(*s.sweep_id) : nlohmann::json(nullptr);
    j["node_id"] = s.node_id ? nlohmann::json(*s.node_id) : nlohmann::json(nullptr);
    j["best_value"] = s.best_value ? nlohmann::json(*s.best_value) : nlohmann::json(nullptr);
    j["best_checkpoint_step"] =
        s.best_checkpoint_step ? nlohmann::json(*s.best_checkpoint_step) : nlohmann::json(nullptr);
    return j;
}

std::string history_jsonl(const Session& s) {
    std::string out;
    for (const auto& h : s.history) {
        out += to_json(h).dump();
        out += '\n';
    }
    return out;
}

} // namespace mlforge::session
