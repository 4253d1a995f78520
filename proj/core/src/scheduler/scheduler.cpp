#include <mlforge/scheduler/scheduler.hpp>

#include <algorithm>

#include <mlforge/common/error.hpp>

namespace mlforge::sched {

MasterState recover_state(const EventLog& log) {
    const auto events = log.read_all();
    return replay(events);
}

Scheduler::Scheduler(EventLog& log, const Clock& clock, ElectionResult leadership, SchedulerConfig config,
                     std::unique_ptr<PlacementPolicy> policy)
    : log_(log),
      clock_(clock),
      config_(config),
      policy_(policy ? std::move(policy) : std::make_unique<BestFitPolicy>()),
      state_(recover_state(log)),
      term_(leadership.term),
      leader_id_(std::move(leadership.leader_id)) {
    if (term_ <= state_.term) {
        throw Error(Errc::not_master, "term " + std::to_string(term_) + " is not newer than log term " +
                                          std::to_string(state_.term));
    }
    commit(TermStarted{term_, leader_id_});
}

void Scheduler::require_master() const {
    if (log_.term() > term_) {
        throw Error(Errc::not_master, "master " + leader_id_ + " (term " + std::to_string(term_) +
                                          ") has been deposed");
    }
}

void Scheduler::commit(EventBody body) {
    const auto seq = log_.append(body, term_);
    apply(state_, Event{seq, std::move(body)});
}

std::string Scheduler::register_node(const NodeDescriptor& descriptor) {
    require_master();
    if (descriptor.node_id.empty() || !descriptor.total.non_negative()) {
        throw Error(Errc::invalid_argument, "node needs an id and non-negative capacities");
    }
    if (auto it = state_.registry.find(descriptor.node_id); it != state_.registry.end()) {
        if (it->second.descriptor != descriptor) {
            throw Error(Errc::duplicate_node_conflict,
                        "node " + descriptor.node_id + " already registered with different capacities");
        }
        return descriptor.node_id;
    }
    commit(NodeRegistered{descriptor, clock_.now()});
    return descriptor.node_id;
}

HeartbeatAck Scheduler::heartbeat(const ResourceReport& report) {
    require_master();
    auto it = state_.registry.find(report.node_id);
    if (it == state_.registry.end()) {
        throw Error(Errc::unknown_node, "unknown node " + report.node_id);
    }
    if (!report.free.non_negative() || !report.free.fits_within(it->second.descriptor.total)) {
        throw Error(Errc::invalid_argument, "report from " + report.node_id + " exceeds node totals");
    }
    const auto now = clock_.now();
    commit(HeartbeatReceived{report, now});
    return HeartbeatAck{now + config_.heartbeat_interval, state_.event_log_seq, term_};
}

PlacementDecision Scheduler::submit_job(const JobSpec& spec) {
    require_master();
    if (spec.job_id.empty()) {
        throw Error(Errc::invalid_spec, "job id must not be empty");
    }
    if (!spec.request.non_negative()) {
        throw Error(Errc::invalid_spec, "job " + spec.job_id + " requests negative resources");
    }
    if (state_.knows_job(spec.job_id)) {
        throw Error(Errc::invalid_spec, "job " + spec.job_id + " already submitted");
    }
    const bool satisfiable = std::any_of(state_.registry.begin(), state_.registry.end(), [&](const auto& kv) {
        return spec.request.fits_within(kv.second.descriptor.total);
    });
    if (!satisfiable) {
        return PlacementDecision{spec.job_id, Rejected{"unsatisfiable"}};
    }
    if (state_.queue.empty()) {
        if (auto node = policy_->choose(state_, spec.request)) {
            commit(JobPlaced{spec, *node});
            return PlacementDecision{spec.job_id, Placed{*node}};
        }
    }
    commit(JobQueued{spec});
    ++queue_ops_;
    return PlacementDecision{spec.job_id, Queued{*state_.queue_position(spec.job_id)}};
}

std::vector<PlacementDecision> Scheduler::complete_job(const std::string& job_id) {
    require_master();
    if (!state_.allocations.contains(job_id)) {
        throw Error(Errc::unknown_job, "job " + job_id + " is not allocated");
    }
    commit(JobCompleted{job_id});
    return drain_queue();
}

void Scheduler::cancel_job(const std::string& job_id) {
    require_master();
    if (!state_.queue_position(job_id)) {
        throw Error(Errc::unknown_job, "job " + job_id + " is not queued");
    }
    commit(JobCancelled{job_id});
    ++queue_ops_;
}

std::vector<PlacementDecision> Scheduler::drain_queue() {
    require_master();
    std::vector<PlacementDecision> placed;
    while (!state_.queue.empty()) {
        const JobSpec head = state_.queue.front().spec;
        auto node = policy_->choose(state_, head.request);
        if (!node) {
            break;  // head-of-line blocking: never skip past the head
        }
        commit(JobPlaced{head, *node});
        ++queue_ops_;
        placed.push_back(PlacementDecision{head.job_id, Placed{*node}});
    }
    return placed;
}

LivenessReport Scheduler::check_liveness() {
    require_master();
    LivenessReport report;
    const auto now = clock_.now();
    const auto limit = config_.heartbeat_interval * config_.missed_beats_for_death;
    std::vector<std::string> expired;
    for (const auto& [id, node] : state_.registry) {
        if (node.alive && now - node.last_heard > limit) {
            expired.push_back(id);
        }
    }
    for (const auto& id : expired) {
        for (const auto& [job_id, alloc] : state_.allocations) {
            if (alloc.node_id == id) {
                report.requeued_jobs.push_back(job_id);
            }
        }
        commit(NodeDead{id});
        report.dead_nodes.push_back(id);
    }
    queue_ops_ += report.requeued_jobs.size();
    return report;
}

} // namespace mlforge::sched
