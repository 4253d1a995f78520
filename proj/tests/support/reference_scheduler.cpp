#include "support/reference_scheduler.hpp"

#include <algorithm>

namespace mlforge::fixture {

namespace {
bool fits(const sched::Resources& req, const sched::Resources& avail) {
    return req.gpus <= avail.gpus && req.cpus <= avail.cpus && req.mem_mb <= avail.mem_mb;
}
} // namespace

void ReferenceScheduler::add_node(const std::string& id, sched::Resources total) {
    nodes_.push_back(Node{id, total, true});
}

sched::Resources ReferenceScheduler::free_of(const std::string& node) const {
    sched::Resources free{};
    for (const auto& n : nodes_) {
        if (n.id == node) {
            free = n.total;
        }
    }
    for (const auto& [job, where] : job_node_) {
        if (where == node) {
            const auto& r = job_request_.at(job);
            free.gpus -= r.gpus;
            free.cpus -= r.cpus;
            free.mem_mb -= r.mem_mb;
        }
    }
    return free;
}

std::optional<std::string> ReferenceScheduler::best_fit(const sched::Resources& req) const {
    std::vector<std::pair<std::int64_t, std::string>> options;
    for (const auto& n : nodes_) {
        if (n.alive && fits(req, free_of(n.id))) {
            options.emplace_back(free_of(n.id).gpus - req.gpus, n.id);
        }
    }
    if (options.empty()) {
        return std::nullopt;
    }
    std::sort(options.begin(), options.end());
    return options.front().second;
}

std::vector<ReferenceScheduler::Job> ReferenceScheduler::sorted_queue() const {
    auto q = queue_;
    std::sort(q.begin(), q.end(), [](const Job& a, const Job& b) {
        if (a.spec.priority != b.spec.priority) return a.spec.priority > b.spec.priority;
        if (a.requeued != b.requeued) return a.requeued;
        if (a.spec.submitted_at != b.spec.submitted_at) return a.spec.submitted_at < b.spec.submitted_at;
        return a.arrival < b.arrival;
    });
    return q;
}

std::vector<std::string> ReferenceScheduler::queue_order() const {
    std::vector<std::string> out;
    for (const auto& j : sorted_queue()) {
        out.push_back(j.spec.job_id);
    }
    return out;
}

std::string ReferenceScheduler::submit(const sched::JobSpec& spec) {
    bool possible = false;
    for (const auto& n : nodes_) {
        possible = possible || fits(spec.request, n.total);
    }
    if (!possible) {
        return "rejected";
    }
    job_spec_[spec.job_id] = spec;
    job_request_[spec.job_id] = spec.request;
    if (queue_.empty()) {
        if (auto node = best_fit(spec.request)) {
            job_node_[spec.job_id] = *node;
            return "placed:" + *node;
        }
    }
    queue_.push_back(Job{spec, false, arrivals_++});
    const auto order = queue_order();
    const auto pos = std::find(order.begin(), order.end(), spec.job_id) - order.begin();
    return "queued:" + std::to_string(pos);
}

std::vector<std::pair<std::string, std::string>> ReferenceScheduler::drain() {
    std::vector<std::pair<std::string, std::string>> placed;
    while (!queue_.empty()) {
        const auto head = sorted_queue().front();
        auto node = best_fit(head.spec.request);
        if (!node) {
            break;
        }
        std::erase_if(queue_, [&](const Job& j) { return j.spec.job_id == head.spec.job_id; });
        job_node_[head.spec.job_id] = *node;
        placed.emplace_back(head.spec.job_id, *node);
    }
    return placed;
}

std::vector<std::pair<std::string, std::string>> ReferenceScheduler::complete(const std::string& job_id) {
    job_node_.erase(job_id);
    return drain();
}

std::vector<std::pair<std::string, std::string>> ReferenceScheduler::cancel(const std::string& job_id) {
    std::erase_if(queue_, [&](const Job& j) { return j.spec.job_id == job_id; });
    return drain();
}

void ReferenceScheduler::node_dead(const std::string& id) {
    for (auto& n : nodes_) {
        if (n.id == id) {
            n.alive = false;
        }
    }
    std::vector<std::string> lost;
    for (const auto& [job, where] : job_node_) {
        if (where == id) {
            lost.push_back(job);
        }
    }
    for (const auto& job : lost) {
        job_node_.erase(job);
        queue_.push_back(Job{job_spec_.at(job), true, arrivals_++});
    }
}

void ReferenceScheduler::node_alive(const std::string& id) {
    for (auto& n : nodes_) {
        if (n.id == id) {
            n.alive = true;
        }
    }
}

} // namespace mlforge::fixture
