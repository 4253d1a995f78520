#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

namespace mlforge {

using Duration = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Duration>;

inline std::int64_t to_millis(Timestamp t) noexcept { return t.time_since_epoch().count(); }
inline Timestamp from_millis(std::int64_t ms) noexcept { return Timestamp{Duration{ms}}; }

/// RFC 3339 UTC with millisecond precision, e.g. "2026-01-01T00:00:05.000Z".
std::string format_timestamp(Timestamp t);

/// Every component reads time through this interface so that tests and the
/// simulated cluster can drive it explicitly.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start = from_millis(0)) : now_ms_(to_millis(start)) {}

    Timestamp now() const override { return from_millis(now_ms_.load()); }
    void set(Timestamp t) { now_ms_.store(to_millis(t)); }
    void advance(Duration d) { now_ms_.fetch_add(d.count()); }

private:
    std::atomic<std::int64_t> now_ms_;
};

class SystemClock final : public Clock {
public:
    Timestamp now() const override {
        return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());
    }
};

} // namespace mlforge
