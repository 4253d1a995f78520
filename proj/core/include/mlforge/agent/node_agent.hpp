#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <mlforge/agent/environment.hpp>
#include <mlforge/agent/mount_table.hpp>
#include <mlforge/agent/sim_trainer.hpp>
#include <mlforge/blobstore/blob_store.hpp>
#include <mlforge/blobstore/checkpoint_index.hpp>
#include <mlforge/blobstore/dataset_catalog.hpp>
#include <mlforge/common/clock.hpp>
#include <mlforge/metrics/metric_point.hpp>
#include <mlforge/scheduler/types.hpp>

namespace mlforge::agent {

enum class RunState { running, paused, finished, finished_by_user, failed };

/// "RUNNING", "PAUSED", "FINISHED", "FINISHED_BY_USER", "FAILED"
std::string_view to_string(RunState s) noexcept;

inline bool is_terminal(RunState s) noexcept {
    return s == RunState::finished || s == RunState::finished_by_user || s == RunState::failed;
}

enum class ControlCommand { pause, resume, stop };

struct RunHandle {
    std::uint64_t id = 0;
    auto operator<=>(const RunHandle&) const = default;
};

struct LaunchRequest {
    std::string session_id;
    store::Digest code_digest;
    EnvHandle env;
    store::DatasetRef dataset;
    std::string dataset_path;
    std::map<std::string, double> hyperparams;
    std::optional<SimTrainerState> checkpoint;
    std::int64_t max_steps = 100;
    std::int64_t checkpoint_interval = 5;
    sched::Resources resources;
    std::uint64_t seed = 0;
};

/// Receives everything a run produces. Called synchronously from the agent.
class RunListener {
public:
    virtual ~RunListener() = default;
    virtual void on_metric(const metrics::MetricPoint& point) = 0;
    virtual void on_checkpoint(const store::CheckpointRecord& record) = 0;
    virtual void on_transition(const std::string& session_id, RunState state, const std::string& detail) = 0;
};

/// Worker-node daemon: reports resources, builds and caches environments,
/// shares dataset mounts, and steps session workloads.
class NodeAgent {
public:
    NodeAgent(sched::NodeDescriptor descriptor, store::BlobStore& blobs, const store::DatasetCatalog& catalog,
              store::CheckpointIndex& checkpoints, const Clock& clock, RunListener& listener,
              std::unique_ptr<Executor> executor = nullptr);

    const sched::NodeDescriptor& descriptor() const noexcept { return descriptor_; }
    const std::string& node_id() const noexcept { return descriptor_.node_id; }

    /// Free = totals minus live local runs. Increments the report sequence.
    sched::ResourceReport report_resources();

    EnvHandle prepare_environment(const EnvironmentSpec& spec);
    std::string mount_dataset(const store::DatasetRef& dataset, const std::string& session_id);

    /// Throws Error(missing_code_bundle) if the code blob is absent and
    /// Error(resource_lost) if this node is down.
    RunHandle launch(LaunchRequest request);

    /// Pause checkpoints and halts; resume reloads the latest checkpoint from
    /// the store and applies `overrides`; stop writes a final checkpoint.
    /// Throws Error(unknown_run) or Error(illegal_transition).
    RunState control(RunHandle run, ControlCommand command, const std::map<std::string, double>& overrides = {});

    /// Advances every running workload by one step, in launch order.
    void step_all();

    std::optional<RunHandle> find_run(const std::string& session_id) const;
    RunState run_state(RunHandle run) const;
    std::int64_t run_step(RunHandle run) const;
    std::size_t live_runs() const;

    /// Node loss: live runs vanish without notifications, mounts are dropped.
    void shutdown();
    void restart();
    bool alive() const noexcept { return alive_; }

    /// Highest master log sequence seen in a heartbeat ack.
    void observe_log_seq(std::uint64_t seq) { last_event_seq_ = std::max(last_event_seq_, seq); }
    std::uint64_t last_event_seq() const noexcept { return last_event_seq_; }

    EnvironmentCache& environments() noexcept { return environments_; }
    MountTable& mounts() noexcept { return mounts_; }
    const MountTable& mounts() const noexcept { return mounts_; }

private:
    struct Run {
        RunHandle handle;
        LaunchRequest request;
        std::unique_ptr<Workload> workload;
        RunState state = RunState::running;
        std::optional<std::int64_t> last_checkpoint_step;
    };

    Run& find(RunHandle handle);
    const Run& find(RunHandle handle) const;
    void checkpoint(Run& run, bool is_final);
    void finish(Run& run, RunState terminal, const std::string& detail);

    sched::NodeDescriptor descriptor_;
    store::BlobStore& blobs_;
    store::CheckpointIndex& checkpoints_;
    const Clock& clock_;
    RunListener& listener_;
    std::unique_ptr<Executor> executor_;
    EnvironmentCache environments_;
    MountTable mounts_;
    std::map<RunHandle, Run> runs_;
    std::uint64_t next_handle_ = 1;
    std::uint64_t report_seq_ = 0;
    std::uint64_t last_event_seq_ = 0;
    bool alive_ = true;
};

} // namespace mlforge::agent
