#include <mlforge/agent/node_agent.hpp>

#include <algorithm>

#include <mlforge/common/error.hpp>

namespace mlforge::agent {

std::string_view to_string(RunState s) noexcept {
    switch (s) {
    case RunState::running: return "RUNNING";
    case RunState::paused: return "PAUSED";
    case RunState::finished: return "FINISHED";
    case RunState::finished_by_user: return "FINISHED_BY_USER";
    case RunState::failed: return "FAILED";
    }
    return "UNKNOWN";
}

NodeAgent::NodeAgent(sched::NodeDescriptor descriptor, store::BlobStore& blobs,
                     const store::DatasetCatalog& catalog, store::CheckpointIndex& checkpoints,
                     const Clock& clock, RunListener& listener, std::unique_ptr<Executor> executor)
    : descriptor_(std::move(descriptor)),
      blobs_(blobs),
      checkpoints_(checkpoints),
      clock_(clock),
      listener_(listener),
      executor_(executor ? std::move(executor) : std::make_unique<SimulatedExecutor>()),
      mounts_(catalog, "/mnt/" + descriptor_.node_id + "/datasets") {}

sched::ResourceReport NodeAgent::report_resources() {
    sched::Resources used;
    for (const auto& [handle, run] : runs_) {
        if (!is_terminal(run.state)) {
            used += run.request.resources;
        }
    }
    return sched::ResourceReport{descriptor_.node_id, descriptor_.total - used, ++report_seq_, clock_.now()};
}

EnvHandle NodeAgent::prepare_environment(const EnvironmentSpec& spec) { return environments_.prepare(spec); }

std::string NodeAgent::mount_dataset(const store::DatasetRef& dataset, const std::string& session_id) {
    return mounts_.mount(dataset, session_id);
}

NodeAgent::Run& NodeAgent::find(RunHandle handle) {
    auto it = runs_.find(handle);
    if (it == runs_.end()) {
        throw Error(Errc::unknown_run, "no run " + std::to_string(handle.id) + " on " + descriptor_.node_id);
    }
    return it->second;
}

const NodeAgent::Run& NodeAgent::find(RunHandle handle) const {
    return const_cast<NodeAgent*>(this)->find(handle);
}

RunHandle NodeAgent::launch(LaunchRequest request) {
    if (!alive_) {
        throw Error(Errc::resource_lost, "node " + descriptor_.node_id + " is down");
    }
    if (!blobs_.contains(request.code_digest)) {
        throw Error(Errc::missing_code_bundle, "code bundle " + request.code_digest.hex() + " not in store");
    }
    std::optional<Bytes> start_state;
    if (request.checkpoint) {
        start_state = encode_checkpoint(*request.checkpoint);
    }
    auto workload = executor_->start(request.hyperparams, request.seed, start_state);

    const RunHandle handle{next_handle_++};
    Run run{handle, std::move(request), std::move(workload), RunState::running, std::nullopt};
    auto& stored = runs_.emplace(handle, std::move(run)).first->second;
    listener_.on_transition(stored.request.session_id, RunState::running, "launched on " + descriptor_.node_id);
    if (stored.workload->current_step() >= stored.request.max_steps) {
        checkpoint(stored, true);
        finish(stored, RunState::finished, "reached step " + std::to_string(stored.workload->current_step()));
    }
    return handle;
}

void NodeAgent::checkpoint(Run& run, bool is_final) {
    const auto step = run.workload->current_step();
    const auto& session = run.request.session_id;
    if (run.last_checkpoint_step == step) {
        if (is_final) {
            checkpoints_.finalize(session, step);
        }
        return;
    }
    // A resumed or forked run may start at a step its session already has.
    if (auto existing = checkpoints_.at_or_before(session, step); existing && existing->step == step) {
        run.last_checkpoint_step = step;
        if (is_final) {
            checkpoints_.finalize(session, step);
        }
        return;
    }
    const auto record = checkpoints_.put(session, step, run.workload->checkpoint(), is_final);
    run.last_checkpoint_step = step;
    listener_.on_checkpoint(record);
}

void NodeAgent::finish(Run& run, RunState terminal, const std::string& detail) {
    run.state = terminal;
    mounts_.release(run.request.session_id);
    listener_.on_transition(run.request.session_id, terminal, detail);
}

RunState NodeAgent::control(RunHandle handle, ControlCommand command,
                            const std::map<std::string, double>& overrides) {
    auto& run = find(handle);
    auto illegal = [&](std::string_view what) {
        return Error(Errc::illegal_transition, std::string("cannot ") + std::string(what) + " a run in state " +
                                                   std::string(to_string(run.state)));
    };
    switch (command) {
    case ControlCommand::pause:
        if (run.state != RunState::running) throw illegal("pause");
        checkpoint(run, false);
        run.state = RunState::paused;
        listener_.on_transition(run.request.session_id, RunState::paused,
                                "paused at step " + std::to_string(run.workload->current_step()));
        break;
    case ControlCommand::resume: {
        if (run.state != RunState::paused) throw illegal("resume");
        const auto record = checkpoints_.get(run.request.session_id, store::CheckpointSelector::latest());
        run.workload->restore(checkpoints_.load_state(record));
        if (!overrides.empty()) {
            run.workload->retune(overrides);
        }
        run.state = RunState::running;
        listener_.on_transition(run.request.session_id, RunState::running,
                                "resumed from step " + std::to_string(record.step));
        break;
    }
    case ControlCommand::stop:
        if (is_terminal(run.state)) throw illegal("stop");
        checkpoint(run, true);
        finish(run, RunState::finished_by_user, "stopped at step " + std::to_string(run.workload->current_step()));
        break;
    }
    return run.state;
}

void NodeAgent::step_all() {
    if (!alive_) {
        return;
    }
    for (auto& [handle, run] : runs_) {
        if (run.state != RunState::running) {
            continue;
        }
        const auto metrics = run.workload->step();
        const auto step = run.workload->current_step();
        const auto now = clock_.now();
        for (const auto& [name, value] : metrics) {
            listener_.on_metric(metrics::MetricPoint{run.request.session_id, step, name, value, now});
        }
        if (step >= run.request.max_steps) {
            checkpoint(run, true);
            finish(run, RunState::finished, "reached step " + std::to_string(step));
        } else if (run.request.checkpoint_interval > 0 && step % run.request.checkpoint_interval == 0) {
            checkpoint(run, false);
        }
    }
}

std::optional<RunHandle> NodeAgent::find_run(const std::string& session_id) const {
    // Latest run for the session wins.
    for (auto it = runs_.rbegin(); it != runs_.rend(); ++it) {
        if (it->second.request.session_id == session_id) {
            return it->first;
        }
    }
    return std::nullopt;
}

RunState NodeAgent::run_state(RunHandle handle) const { return find(handle).state; }

std::int64_t NodeAgent::run_step(RunHandle handle) const { return find(handle).workload->current_step(); }

std::size_t NodeAgent::live_runs() const {
    return static_cast<std::size_t>(
        std::count_if(runs_.begin(), runs_.end(), [](const auto& kv) { return !is_terminal(kv.second.state); }));
}

void NodeAgent::shutdown() {
    alive_ = false;
    for (auto& [handle, run] : runs_) {
        if (!is_terminal(run.state)) {
            run.state = RunState::failed;
        }
    }
    mounts_.clear();
}

void NodeAgent::restart() { alive_ = true; }

} // namespace mlforge::agent
