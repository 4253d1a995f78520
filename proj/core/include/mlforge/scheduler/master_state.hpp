#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <mlforge/scheduler/events.hpp>
#include <mlforge/scheduler/types.hpp>

namespace mlforge::sched {

struct NodeEntry {
    NodeDescriptor descriptor;
    std::optional<ResourceReport> latest_report;
    Resources allocated;
    bool alive = true;
    Timestamp last_heard;

    Resources free() const { return descriptor.total - allocated; }
    bool operator==(const NodeEntry&) const = default;
};

struct QueuedJob {
    JobSpec spec;
    /// Returned from a dead node; sorts ahead of fresh jobs of equal priority.
    bool requeued = false;
    /// Arrival counter, final tiebreak.
    std::uint64_t order = 0;

    bool operator==(const QueuedJob&) const = default;
};

/// Queue order: priority desc, requeued first, submitted_at asc, arrival asc.
bool queue_before(const QueuedJob& a, const QueuedJob& b) noexcept;

struct Allocation {
    std::string node_id;
    JobSpec spec;
    bool operator==(const Allocation&) const = default;
};

/// Everything the master knows. Mutated only by `apply`, which is shared by
/// the live scheduler and log replay, so both paths agree by construction.
struct MasterState {
    std::uint64_t term = 0;
    std::string leader_id;
    std::map<std::string, NodeEntry> registry;
    std::vector<QueuedJob> queue;
    std::map<std::string, Allocation> allocations;
    std::uint64_t event_log_seq = 0;
    std::uint64_t next_order = 0;

    std::optional<std::size_t> queue_position(const std::string& job_id) const;
    bool knows_job(const std::string& job_id) const;

    bool operator==(const MasterState&) const = default;
};

void apply(MasterState& state, const Event& event);

/// Rebuilds state from a complete event sequence starting at seq 1. Throws
/// Error(corrupt_log) on a gap.
MasterState replay(std::span<const Event> events);

nlohmann::json to_json(const MasterState& state);

} // namespace mlforge::sched
