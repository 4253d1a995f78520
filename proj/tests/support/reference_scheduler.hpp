#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <mlforge/scheduler/types.hpp>

namespace mlforge::fixture {

/// Deliberately naive model of the master's placement rules, used as an
/// oracle. Free capacity is recomputed from the allocation list on every
/// query and the queue is re-sorted from scratch before every drain.
class ReferenceScheduler {
public:
    struct Job {
        sched::JobSpec spec;
        bool requeued = false;
        std::uint64_t arrival = 0;
    };

    void add_node(const std::string& id, sched::Resources total);
    /// "placed:<node>", "queued:<position>" or "rejected".
    std::string submit(const sched::JobSpec& spec);
    /// New placements as (job, node), in order.
    std::vector<std::pair<std::string, std::string>> complete(const std::string& job_id);
    std::vector<std::pair<std::string, std::string>> cancel(const std::string& job_id);
    void node_dead(const std::string& id);
    void node_alive(const std::string& id);
    std::vector<std::pair<std::string, std::string>> drain();

    std::vector<std::string> queue_order() const;
    const std::map<std::string, std::string>& allocations() const { return job_node_; }
    sched::Resources free_of(const std::string& node) const;

private:
    std::optional<std::string> best_fit(const sched::Resources& req) const;
    std::vector<Job> sorted_queue() const;

    struct Node {
        std::string id;
        sched::Resources total;
        bool alive = true;
    };
    std::vector<Node> nodes_;
    std::vector<Job> queue_;
    std::map<std::string, std::string> job_node_;
    std::map<std::string, sched::Resources> job_request_;
    std::map<std::string, sched::JobSpec> job_spec_;
    std::uint64_t arrivals_ = 0;
};

} // namespace mlforge::fixture
