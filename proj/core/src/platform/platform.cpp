#include <mlforge/platform/platform.hpp>

#include <algorithm>

#include <mlforge/common/error.hpp>

namespace mlforge::platform {

std::vector<sched::NodeDescriptor> uniform_nodes(int count, sched::Resources each) {
    std::vector<sched::NodeDescriptor> out;
    for (int i = 0; i < count; ++i) {
        out.push_back(sched::NodeDescriptor{"node-" + std::to_string(i), each});
    }
    return out;
}

Platform::Platform(PlatformConfig config)
    : config_(std::move(config)),
      clock_(config_.start_time),
      catalog_(blobs_, clock_),
      checkpoints_(blobs_, clock_),
      metrics_(config_.metric_replay),
      board_(catalog_),
      log_(blobs_),
      sessions_(*this, blobs_, catalog_, checkpoints_, metrics_, board_, clock_, config_.metric_replay) {
    if (config_.nodes.empty()) {
        throw Error(Errc::invalid_argument, "a cluster needs at least one node");
    }
    for (const auto& d : config_.nodes) {
        agents_.push_back(std::make_unique<agent::NodeAgent>(d, blobs_, catalog_, checkpoints_, clock_, sessions_));
    }
    failover();
    for (const auto& d : config_.nodes) {
        scheduler_->register_node(d);
    }
    send_heartbeats();
}

Platform::~Platform() = default;

sched::Scheduler& Platform::scheduler() {
    if (!scheduler_) {
        throw Error(Errc::master_unavailable, "master unavailable: election in progress");
    }
    return *scheduler_;
}

agent::NodeAgent& Platform::node(const std::string& node_id) {
    if (auto* a = agent(node_id)) {
        return *a;
    }
    throw Error(Errc::unknown_node, "unknown node " + node_id);
}

agent::NodeAgent* Platform::agent(const std::string& node_id) {
    for (auto& a : agents_) {
        if (a->node_id() == node_id) {
            return a.get();
        }
    }
    return nullptr;
}

sched::PlacementDecision Platform::submit(const sched::JobSpec& spec) { return scheduler().submit_job(spec); }

std::vector<sched::PlacementDecision> Platform::complete(const std::string& job_id) {
    return scheduler().complete_job(job_id);
}

std::vector<sched::PlacementDecision> Platform::cancel(const std::string& job_id) {
    auto& s = scheduler();
    s.cancel_job(job_id);
    return s.drain_queue();
}

void Platform::send_heartbeats() {
    for (auto& a : agents_) {
        if (!a->alive() || !scheduler_->state().registry.contains(a->node_id())) {
            continue;
        }
        // Round-trip through the wire encoding, as a remote agent would.
        const auto report = sched::decode_heartbeat(sched::encode_heartbeat(a->report_resources()));
        const auto ack = scheduler_->heartbeat(report);
        a->observe_log_seq(ack.event_log_seq);
    }
    next_heartbeat_ = clock_.now() + config_.scheduler.heartbeat_interval;
}

void Platform::tick() {
    clock_.advance(config_.step_period);
    for (auto& a : agents_) {
        a->step_all();
    }
    if (!scheduler_ && config_.auto_failover) {
        failover();
    }
    if (!scheduler_) {
        return;
    }
    if (clock_.now() >= next_heartbeat_) {
        send_heartbeats();
    }
    const auto liveness = scheduler_->check_liveness();
    if (!liveness.requeued_jobs.empty()) {
        sessions_.on_jobs_requeued(liveness.requeued_jobs);
    }
    sessions_.process_pending();
    sessions_.on_placements(scheduler_->drain_queue());
    sessions_.process_pending();
}

void Platform::run_ticks(int n) {
    for (int i = 0; i < n; ++i) {
        tick();
    }
}

int Platform::run_until_idle(int max_ticks) {
    auto busy = [&] {
        for (const auto& s : sessions_.list()) {
            if (!session::is_terminal(s.state)) {
                return true;
            }
        }
        return sessions_.has_pending();
    };
    int n = 0;
    while (n < max_ticks && busy()) {
        tick();
        ++n;
    }
    return n;
}

void Platform::kill_node(const std::string& node_id) {
    node(node_id).shutdown();
    if (scheduler_ && scheduler_->leader_id() == node_id) {
        crash_master();
    }
}

void Platform::revive_node(const std::string& node_id) {
    auto& a = node(node_id);
    a.restart();
    if (scheduler_) {
        a.observe_log_seq(scheduler_->heartbeat(a.report_resources()).event_log_seq);
    }
}

void Platform::crash_master() {
    if (scheduler_) {
        last_term_ = scheduler_->term();
    }
    scheduler_.reset();
}

sched::ElectionResult Platform::failover() {
    std::vector<sched::Candidate> candidates;
    for (const auto& a : agents_) {
        if (a->alive()) {
            candidates.push_back(sched::Candidate{a->node_id(), a->last_event_seq()});
        }
    }
    if (scheduler_) {
        last_term_ = scheduler_->term();
        scheduler_.reset();
    }
    last_term_ = std::max(last_term_, log_.term());
    const auto result = sched::elect_leader(candidates, last_term_);
    scheduler_ = std::make_unique<sched::Scheduler>(log_, clock_, result, config_.scheduler);
    last_term_ = result.term;
    // Survivors learn the new master's position right away.
    send_heartbeats();
    return result;
}

} // namespace mlforge::platform
