#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <mlforge/common/clock.hpp>
#include <mlforge/scheduler/election.hpp>
#include <mlforge/scheduler/event_log.hpp>
#include <mlforge/scheduler/master_state.hpp>
#include <mlforge/scheduler/placement.hpp>

namespace mlforge::sched {

struct SchedulerConfig {
    Duration heartbeat_interval{2000};
    /// A node that misses this many consecutive heartbeat deadlines is dead.
    int missed_beats_for_death = 3;
};

struct LivenessReport {
    std::vector<std::string> dead_nodes;
    std::vector<std::string> requeued_jobs;
};

/// The master. Every mutation is decided against the current state, written
/// to the event log, and only then applied, so a crash loses at most the
/// command in flight. Not internally synchronized: callers funnel commands
/// through one writer.
class Scheduler {
public:
    /// Rebuilds state from `log` and opens `leadership.term`. Throws
    /// Error(not_master) if the log already carries that term or a later one.
    Scheduler(EventLog& log, const Clock& clock, ElectionResult leadership, SchedulerConfig config = {},
              std::unique_ptr<PlacementPolicy> policy = nullptr);

    /// Idempotent for an identical descriptor. Throws
    /// Error(duplicate_node_conflict) if the id is taken with other capacities.
    std::string register_node(const NodeDescriptor& descriptor);

    /// Marks the node alive and keeps the report iff its seq is newer.
    /// Throws Error(unknown_node).
    HeartbeatAck heartbeat(const ResourceReport& report);

    /// Fast path: with an empty queue and a fitting node the job is placed
    /// without touching the queue. Otherwise it is queued, or rejected if no
    /// registered node could ever hold it. Throws Error(invalid_spec).
    PlacementDecision submit_job(const JobSpec& spec);

    /// Releases the job's resources and drains the queue. Throws Error(unknown_job).
    std::vector<PlacementDecision> complete_job(const std::string& job_id);

    /// Removes a queued job. Throws Error(unknown_job) if it is not queued.
    void cancel_job(const std::string& job_id);

    /// Places jobs from the head of the queue until the head does not fit.
    std::vector<PlacementDecision> drain_queue();

    /// Declares nodes dead after too many missed deadlines and requeues their jobs.
    LivenessReport check_liveness();

    const MasterState& state() const noexcept { return state_; }
    std::uint64_t term() const noexcept { return term_; }
    const std::string& leader_id() const noexcept { return leader_id_; }
    const PlacementPolicy& policy() const noexcept { return *policy_; }
    const SchedulerConfig& config() const noexcept { return config_; }

    /// Queue insertions plus removals so far.
    std::uint64_t queue_ops() const noexcept { return queue_ops_; }

private:
    void require_master() const;
    void commit(EventBody body);

    EventLog& log_;
    const Clock& clock_;
    SchedulerConfig config_;
    std::unique_ptr<PlacementPolicy> policy_;
    MasterState state_;
    std::uint64_t term_;
    std::string leader_id_;
    std::uint64_t queue_ops_ = 0;
};

/// State as of the last durable event.
MasterState recover_state(const EventLog& log);

} // namespace mlforge::sched
