#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include <mlforge/common/clock.hpp>

namespace mlforge::sched {

/// Amounts along every enforced dimension. GPUs drive placement choice; CPUs
/// and memory are hard constraints.
struct Resources {
    std::int64_t gpus = 0;
    std::int64_t cpus = 0;
    std::int64_t mem_mb = 0;

    bool fits_within(const Resources& capacity) const noexcept {
        return gpus <= capacity.gpus && cpus <= capacity.cpus && mem_mb <= capacity.mem_mb;
    }
    bool non_negative() const noexcept { return gpus >= 0 && cpus >= 0 && mem_mb >= 0; }

    Resources& operator+=(const Resources& o) noexcept {
        gpus += o.gpus;
        cpus += o.cpus;
        mem_mb += o.mem_mb;
        return *this;
    }
    Resources& operator-=(const Resources& o) noexcept {
        gpus -= o.gpus;
        cpus -= o.cpus;
        mem_mb -= o.mem_mb;
        return *this;
    }
    friend Resources operator+(Resources a, const Resources& b) noexcept { return a += b; }
    friend Resources operator-(Resources a, const Resources& b) noexcept { return a -= b; }

    auto operator<=>(const Resources&) const = default;
};

struct NodeDescriptor {
    std::string node_id;
    Resources total;

    bool operator==(const NodeDescriptor&) const = default;
};

struct ResourceReport {
    std::string node_id;
    Resources free;
    std::uint64_t seq = 0;
    Timestamp sent_at;

    bool operator==(const ResourceReport&) const = default;
};

struct JobSpec {
    std::string job_id;
    std::string session_ref;
    Resources request;
    int priority = 0;
    Timestamp submitted_at;

    bool operator==(const JobSpec&) const = default;
};

struct Placed {
    std::string node_id;
    bool operator==(const Placed&) const = default;
};
struct Queued {
    std::size_t position = 0;
    bool operator==(const Queued&) const = default;
};
struct Rejected {
    std::string reason;
    bool operator==(const Rejected&) const = default;
};

struct PlacementDecision {
    std::string job_id;
    std::variant<Placed, Queued, Rejected> outcome;

    bool placed() const noexcept { return std::holds_alternative<Placed>(outcome); }
    bool queued() const noexcept { return std::holds_alternative<Queued>(outcome); }
    bool rejected() const noexcept { return std::holds_alternative<Rejected>(outcome); }
    const std::string& node_id() const { return std::get<Placed>(outcome).node_id; }

    bool operator==(const PlacementDecision&) const = default;
};

struct HeartbeatAck {
    Timestamp next_deadline;
    std::uint64_t event_log_seq = 0;
    std::uint64_t term = 0;
};

nlohmann::json to_json(const Resources& r);
Resources resources_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NodeDescriptor& d);
NodeDescriptor node_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ResourceReport& r);
ResourceReport report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JobSpec& s);
JobSpec job_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlacementDecision& d);

/// Heartbeat wire message: the ResourceReport fields as JSON with keys in
/// lexicographic order and no insignificant whitespace.
std::string encode_heartbeat(const ResourceReport& report);
/// Throws Error(invalid_argument) on a malformed message.
ResourceReport decode_heartbeat(std::string_view wire);

} // namespace mlforge::sched
