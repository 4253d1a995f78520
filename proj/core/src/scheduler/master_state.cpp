#include <mlforge/scheduler/master_state.hpp>

#include <algorithm>

#include <mlforge/common/error.hpp>

namespace mlforge::sched {

namespace {

void insert_sorted(std::vector<QueuedJob>& queue, QueuedJob job) {
    auto pos = std::upper_bound(queue.begin(), queue.end(), job, queue_before);
    queue.insert(pos, std::move(job));
}

void erase_queued(std::vector<QueuedJob>& queue, const std::string& job_id) {
    std::erase_if(queue, [&](const QueuedJob& q) { return q.spec.job_id == job_id; });
}

void release(MasterState& state, const std::string& job_id) {
    auto it = state.allocations.find(job_id);
    if (it == state.allocations.end()) {
        return;
    }
    if (auto node = state.registry.find(it->second.node_id); node != state.registry.end()) {
        node->second.allocated -= it->second.spec.request;
    }
    state.allocations.erase(it);
}

} // namespace

bool queue_before(const QueuedJob& a, const QueuedJob& b) noexcept {
    if (a.spec.priority != b.spec.priority) return a.spec.priority > b.spec.priority;
    if (a.requeued != b.requeued) return a.requeued;
    if (a.spec.submitted_at != b.spec.submitted_at) return a.spec.submitted_at < b.spec.submitted_at;
    return a.order < b.order;
}

std::optional<std::size_t> MasterState::queue_position(const std::string& job_id) const {
    for (std::size_t i = 0; i < queue.size(); ++i) {
        if (queue[i].spec.job_id == job_id) {
            return i;
        }
    }
    return std::nullopt;
}

bool MasterState::knows_job(const std::string& job_id) const {
    return allocations.contains(job_id) || queue_position(job_id).has_value();
}

void apply(MasterState& state, const Event& event) {
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, NodeRegistered>) {
                auto [it, inserted] = state.registry.try_emplace(e.node.node_id);
                if (inserted) {
                    it->second.descriptor = e.node;
                }
                it->second.last_heard = e.at;
            } else if constexpr (std::is_same_v<T, HeartbeatReceived>) {
                auto& node = state.registry.at(e.report.node_id);
                node.alive = true;
                node.last_heard = e.at;
                if (!node.latest_report || e.report.seq > node.latest_report->seq) {
                    node.latest_report = e.report;
                }
            } else if constexpr (std::is_same_v<T, JobQueued>) {
                insert_sorted(state.queue, QueuedJob{e.spec, false, state.next_order++});
            } else if constexpr (std::is_same_v<T, JobPlaced>) {
                erase_queued(state.queue, e.spec.job_id);
                state.registry.at(e.node_id).allocated += e.spec.request;
                state.allocations.insert_or_assign(e.spec.job_id, Allocation{e.node_id, e.spec});
            } else if constexpr (std::is_same_v<T, JobCompleted>) {
                release(state, e.job_id);
            } else if constexpr (std::is_same_v<T, JobCancelled>) {
                erase_queued(state.queue, e.job_id);
            } else if constexpr (std::is_same_v<T, NodeDead>) {
                auto& node = state.registry.at(e.node_id);
                node.alive = false;
                // Allocation map is keyed by job id, so requeue order is deterministic.
                std::vector<JobSpec> lost;
                for (const auto& [job_id, alloc] : state.allocations) {
                    if (alloc.node_id == e.node_id) {
                        lost.push_back(alloc.spec);
                    }
                }
                for (const auto& spec : lost) {
                    release(state, spec.job_id);
                    insert_sorted(state.queue, QueuedJob{spec, true, state.next_order++});
                }
            } else if constexpr (std::is_same_v<T, TermStarted>) {
                state.term = e.term;
                state.leader_id = e.leader_id;
            }
        },
        event.body);
    state.event_log_seq = event.seq;
}

MasterState replay(std::span<const Event> events) {
    MasterState state;
    std::uint64_t expected = 1;
    for (const auto& event : events) {
        if (event.seq != expected) {
            throw Error(Errc::corrupt_log, "corrupt event log at seq " + std::to_string(expected) +
                                               ": sequence gap (found " + std::to_string(event.seq) + ")");
        }
        apply(state, event);
        ++expected;
    }
    return state;
}

nlohmann::json to_json(const MasterState& state) {
    nlohmann::json j;
    j["term"] = state.term;
    j["leader_id"] = state.leader_id;
    j["event_log_seq"] = state.event_log_seq;
    auto nodes = nlohmann::json::array();
    for (const auto& [id, node] : state.registry) {
        nlohmann::json n{{"node_id", id},
                         {"alive", node.alive},
                         {"total", to_json(node.descriptor.total)},
                         {"allocated", to_json(node.allocated)},
                         {"free", to_json(node.free())},
                         {"last_heard", format_timestamp(node.last_heard)}};
        n["latest_report"] = node.latest_report ? to_json(*node.latest_report) : nlohmann::json(nullptr);
        nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);
    auto queue = nlohmann::json::array();
    for (std::size_t i = 0; i < state.queue.size(); ++i) {
        auto q = to_json(state.queue[i].spec);
        q["position"] = i;
        q["requeued"] = state.queue[i].requeued;
        queue.push_back(std::move(q));
    }
    j["queue"] = std::move(queue);
    auto allocations = nlohmann::json::array();
    for (const auto& [job_id, alloc] : state.allocations) {
        allocations.push_back({{"job_id", job_id}, {"node_id", alloc.node_id}, {"request", to_json(alloc.spec.request)}});
    }
    j["allocations"] = std::move(allocations);
    return j;
}

} // namespace mlforge::sched
