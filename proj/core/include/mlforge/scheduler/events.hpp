#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <mlforge/common/text.hpp>
#include <mlforge/scheduler/types.hpp>

namespace mlforge::sched {

struct NodeRegistered {
    NodeDescriptor node;
    Timestamp at;
    bool operator==(const NodeRegistered&) const = default;
};

/// Every heartbeat is logged, stale ones included: they still refresh liveness.
struct HeartbeatReceived {
    ResourceReport report;
    Timestamp at;
    bool operator==(const HeartbeatReceived&) const = default;
};

struct JobQueued {
    JobSpec spec;
    bool operator==(const JobQueued&) const = default;
};

/// Covers both fast-path placement and placement out of the queue.
struct JobPlaced {
    JobSpec spec;
    std::string node_id;
    bool operator==(const JobPlaced&) const = default;
};

struct JobCompleted {
    std::string job_id;
    bool operator==(const JobCompleted&) const = default;
};

struct JobCancelled {
    std::string job_id;
    bool operator==(const JobCancelled&) const = default;
};

/// The node's allocations go back to the head of their priority band.
struct NodeDead {
    std::string node_id;
    bool operator==(const NodeDead&) const = default;
};

struct TermStarted {
    std::uint64_t term = 0;
    std::string leader_id;
    bool operator==(const TermStarted&) const = default;
};

using EventBody = std::variant<NodeRegistered, HeartbeatReceived, JobQueued, JobPlaced, JobCompleted,
                               JobCancelled, NodeDead, TermStarted>;

enum class EventKind : std::uint8_t {
    node_registered = 1,
    heartbeat = 2,
    job_queued = 3,
    job_placed = 4,
    job_completed = 5,
    job_cancelled = 6,
    node_dead = 7,
    term_started = 8,
};

struct Event {
    std::uint64_t seq = 0;
    EventBody body;

    EventKind kind() const noexcept { return static_cast<EventKind>(body.index() + 1); }
    bool operator==(const Event&) const = default;
};

/// Canonical payload: key-sorted compact JSON of the event body.
std::string encode_payload(const EventBody& body);
EventBody decode_payload(EventKind kind, std::string_view payload);

/// One record: u32 length of what follows | u64 seq | u8 kind | payload |
/// u32 crc32(payload), integers big-endian.
Bytes encode_record(const Event& event);

/// Decodes a run of records. Throws Error(corrupt_log) naming the first bad
/// sequence number on truncation, checksum mismatch, or a gap in `seq`
/// (the first record must carry `expected_first_seq`).
std::vector<Event> decode_records(std::span<const std::uint8_t> bytes, std::uint64_t expected_first_seq);

} // namespace mlforge::sched
