#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <mlforge/agent/node_agent.hpp>
#include <mlforge/blobstore/blob_store.hpp>
#include <mlforge/blobstore/checkpoint_index.hpp>
#include <mlforge/blobstore/dataset_catalog.hpp>
#include <mlforge/common/broadcaster.hpp>
#include <mlforge/leaderboard/leaderboard.hpp>
#include <mlforge/metrics/metrics_store.hpp>
#include <mlforge/scheduler/types.hpp>
#include <mlforge/session/session.hpp>

namespace mlforge::session {

/// What the session manager needs from the cluster: the current master and
/// the agents. Calls throw Error(master_unavailable) while there is no master.
class ClusterPort {
public:
    virtual ~ClusterPort() = default;
    virtual sched::PlacementDecision submit(const sched::JobSpec& spec) = 0;
    /// Releases the job and returns placements the release unblocked.
    virtual std::vector<sched::PlacementDecision> complete(const std::string& job_id) = 0;
    /// Drops a queued job and returns placements that unblocked.
    virtual std::vector<sched::PlacementDecision> cancel(const std::string& job_id) = 0;
    /// nullptr for an unknown node.
    virtual agent::NodeAgent* agent(const std::string& node_id) = 0;
};

/// Live feed of one session: metric points and state transitions.
struct SessionEvent {
    std::string kind;  // "metric" or "transition"
    nlohmann::json data;
    bool terminal = false;
};

using EventSubscription = Broadcaster<SessionEvent>::Subscription;

struct CreateRequest {
    std::string user;
    store::DatasetRef dataset;
    Bytes code_archive;  // deterministic tar of the code directory
    std::string entrypoint;
    Hyperparams hyperparams;
    int priority = 0;
    sched::Resources resources{1, 1, 1024};
    std::int64_t max_steps = 100;
    std::int64_t checkpoint_interval = 5;
    agent::EnvironmentSpec environment;
    std::uint64_t seed = 0;
};

struct RandomRange {
    double low = 0.0;
    double high = 0.0;
};

/// Either a grid (cartesian product) or `samples` seeded uniform draws.
struct SweepRequest {
    CreateRequest base;
    std::map<std::string, std::vector<HyperValue>> grid;
    std::map<std::string, RandomRange> ranges;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

struct SweepResult {
    std::string sweep_id;
    std::vector<Session> sessions;
};

struct ScoreEntry {
    std::int64_t step = 0;
    double value = 0.0;
    Timestamp at;
};

struct ScoreResult {
    bool improved = false;
    std::optional<double> best_value;
    std::optional<std::int64_t> best_checkpoint_step;
};

struct ListFilter {
    std::optional<std::string> user;
    std::optional<std::string> dataset;  // dataset name
    std::optional<SessionState> state;
};

/// Blob ref under which a finished session's metric points are archived as JSON lines.
inline std::string metrics_archive_ref(const std::string& session_id) { return "metrics/" + session_id; }

/// Hyperparameters every simulated run needs; filled in when absent.
Hyperparams default_hyperparams();

/// Expands a sweep into per-session hyperparameter sets, in submission order.
/// Throws Error(empty_sweep).
std::vector<Hyperparams> expand_sweep(const SweepRequest& request);

/// Owns session records and drives them through the scheduler and agents.
/// Not internally synchronized; callers serialize access.
class SessionManager final : public agent::RunListener {
public:
    SessionManager(ClusterPort& cluster, store::BlobStore& blobs, store::DatasetCatalog& catalog,
                   store::CheckpointIndex& checkpoints, metrics::MetricsStore& metrics, board::Leaderboard& board,
                   const Clock& clock, std::size_t event_replay = 50);

    /// Throws Error(unknown_dataset), Error(empty_code), Error(invalid_argument).
    Session create(const CreateRequest& request);

    /// Partial merge into the running session. Throws Error(illegal_state)
    /// unless RUNNING and Error(unknown_hyperparam) for keys not already set.
    Session pause_and_tune(const std::string& session_id, const Hyperparams& changes);

    /// New session for `user` starting from the parent's checkpoint.
    /// Throws Error(no_checkpoint).
    Session fork(const std::string& parent_id, const store::CheckpointSelector& selector, const Hyperparams& changes,
                 const std::string& user, std::optional<std::int64_t> max_steps = std::nullopt);

    /// Fresh run with the original code and pre-tune hyperparameters.
    Session reproduce(const std::string& session_id, const std::string& user);

    SweepResult run_sweep(const SweepRequest& request);

    /// Scores the session at its current step. Throws Error(no_board_config).
    ScoreResult report_score(const std::string& session_id, double value);
    ScoreResult report_score(const std::string& session_id, double value, std::int64_t step);
    const std::vector<ScoreEntry>& score_history(const std::string& session_id) const;

    /// Throws Error(illegal_state) for a session that cannot stop.
    Session stop(const std::string& session_id);

    /// Throws Error(unknown_session).
    const Session& get(const std::string& session_id) const;
    /// In creation order.
    std::vector<Session> list(const ListFilter& filter = {}) const;

    std::shared_ptr<EventSubscription> subscribe(const std::string& session_id, std::size_t replay);
    std::shared_ptr<EventSubscription> subscribe(const std::string& session_id) {
        return subscribe(session_id, event_replay_);
    }

    /// Sessions whose jobs the master requeued after their node died: they
    /// fail, and the requeued jobs are withdrawn.
    void on_jobs_requeued(const std::vector<std::string>& job_ids);

    /// Launches sessions for placements the master made outside a session call.
    void on_placements(const std::vector<sched::PlacementDecision>& decisions);

    /// Releases jobs of finished runs and launches what that unblocks. Work
    /// left over while the master is unavailable is retried on the next call.
    void process_pending();
    bool has_pending() const noexcept { return !pending_.empty(); }

    // RunListener
    void on_metric(const metrics::MetricPoint& point) override;
    void on_checkpoint(const store::CheckpointRecord& record) override;
    void on_transition(const std::string& session_id, agent::RunState state, const std::string& detail) override;

private:
    struct Entry {
        Session session;
        std::unique_ptr<Broadcaster<SessionEvent>> events;
        std::vector<ScoreEntry> scores;
        bool holds_allocation = false;
    };

    Entry& find(const std::string& session_id);
    const Entry& find(const std::string& session_id) const;
    Session start(Session session);
    void transition(Entry& entry, SessionState to, const std::string& detail);
    void note(Entry& entry, const std::string& what, const std::string& detail);
    void launch(Entry& entry, const std::string& node_id);
    void fail(Entry& entry, const std::string& detail);
    agent::NodeAgent& agent_for(const Entry& entry);
    Session create_impl(const CreateRequest& request, const std::optional<std::string>& sweep_id);

    ClusterPort& cluster_;
    store::BlobStore& blobs_;
    store::DatasetCatalog& catalog_;
    store::CheckpointIndex& checkpoints_;
    metrics::MetricsStore& metrics_;
    board::Leaderboard& board_;
    const Clock& clock_;
    std::size_t event_replay_;

    std::map<std::string, Entry> sessions_;
    std::vector<std::string> order_;
    std::map<std::string, int> session_counters_;  // "user/dataset"
    std::map<std::string, int> sweep_counters_;
    std::vector<std::string> pending_;  // jobs to release
    std::vector<std::string> pending_cancels_;
};

} // namespace mlforge::session
