#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <mlforge/agent/node_agent.hpp>
#include <mlforge/blobstore/blob_store.hpp>
#include <mlforge/blobstore/checkpoint_index.hpp>
#include <mlforge/blobstore/dataset_catalog.hpp>
#include <mlforge/common/clock.hpp>
#include <mlforge/leaderboard/leaderboard.hpp>
#include <mlforge/metrics/metrics_store.hpp>
#include <mlforge/scheduler/event_log.hpp>
#include <mlforge/scheduler/scheduler.hpp>
#include <mlforge/session/session_manager.hpp>

namespace mlforge::platform {

struct PlatformConfig {
    std::vector<sched::NodeDescriptor> nodes;
    Timestamp start_time = from_millis(0);
    /// Simulated time per training step.
    Duration step_period{1000};
    sched::SchedulerConfig scheduler;
    std::size_t metric_replay = 50;
    /// Elect a new master on the next tick after a master crash.
    bool auto_failover = true;
};

/// `count` nodes named node-0.. with identical capacity.
std::vector<sched::NodeDescriptor> uniform_nodes(int count, sched::Resources each);

/// A whole simulated cluster in one process: store, master, agents, and the
/// session layer, advanced by explicit ticks of a manual clock.
/// Not internally synchronized; hold `mutex()` across calls from several threads.
class Platform final : public session::ClusterPort {
public:
    explicit Platform(PlatformConfig config);
    ~Platform() override;

    std::mutex& mutex() noexcept { return mutex_; }

    /// Advances the clock one step period: agents step, heartbeats flow on
    /// their interval, dead nodes are detected, and queued work is placed.
    void tick();
    void run_ticks(int n);
    /// Ticks until no session is active or `max_ticks` pass. Returns ticks run.
    int run_until_idle(int max_ticks = 100000);

    /// Simulated node loss and return.
    void kill_node(const std::string& node_id);
    void revive_node(const std::string& node_id);
    /// The master process dies; its node keeps running workloads.
    void crash_master();
    /// Elects a leader among live agents and rebuilds the master from the log.
    sched::ElectionResult failover();
    bool master_available() const noexcept { return scheduler_ != nullptr; }

    /// Throws Error(master_unavailable) during an election.
    sched::Scheduler& scheduler();
    const std::vector<std::unique_ptr<agent::NodeAgent>>& agents() const noexcept { return agents_; }
    agent::NodeAgent& node(const std::string& node_id);

    ManualClock& clock() noexcept { return clock_; }
    store::BlobStore& blobs() noexcept { return blobs_; }
    store::DatasetCatalog& catalog() noexcept { return catalog_; }
    store::CheckpointIndex& checkpoints() noexcept { return checkpoints_; }
    metrics::MetricsStore& metrics() noexcept { return metrics_; }
    board::Leaderboard& leaderboard() noexcept { return board_; }
    session::SessionManager& sessions() noexcept { return sessions_; }
    sched::EventLog& event_log() noexcept { return log_; }
    const PlatformConfig& config() const noexcept { return config_; }

    // ClusterPort
    sched::PlacementDecision submit(const sched::JobSpec& spec) override;
    std::vector<sched::PlacementDecision> complete(const std::string& job_id) override;
    std::vector<sched::PlacementDecision> cancel(const std::string& job_id) override;
    agent::NodeAgent* agent(const std::string& node_id) override;

private:
    void send_heartbeats();

    PlatformConfig config_;
    std::mutex mutex_;
    ManualClock clock_;
    store::BlobStore blobs_;
    store::DatasetCatalog catalog_;
    store::CheckpointIndex checkpoints_;
    metrics::MetricsStore metrics_;
    board::Leaderboard board_;
    sched::EventLog log_;
    session::SessionManager sessions_;
    std::vector<std::unique_ptr<agent::NodeAgent>> agents_;
    std::unique_ptr<sched::Scheduler> scheduler_;
    std::uint64_t last_term_ = 0;
    Timestamp next_heartbeat_;
};

} // namespace mlforge::platform
