#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <mlforge/common/broadcaster.hpp>
#include <mlforge/metrics/metric_point.hpp>

namespace mlforge::metrics {

struct QueryOptions {
    std::optional<std::string> name;
    std::optional<std::int64_t> from_step;
    std::optional<std::int64_t> to_step;
    std::optional<std::size_t> tail;
};

using MetricSubscription = Broadcaster<MetricPoint>::Subscription;

/// Per-session metric series with live fan-out.
class MetricsStore {
public:
    /// `replay` is how many recent points a new subscriber receives first.
    explicit MetricsStore(std::size_t replay = 50, std::size_t subscriber_buffer = 4096);

    /// Makes the session known and accepting points.
    void open_session(const std::string& session_id);
    /// A closed session rejects further points with Error(illegal_state).
    void set_accepting(const std::string& session_id, bool accepting);
    /// Ends live streams for the session; its data stays queryable.
    void close_streams(const std::string& session_id);
    bool has_session(const std::string& session_id) const;

    /// Throws Error(unknown_session), Error(duplicate_point) for a repeated
    /// (name, step), Error(out_of_order_step) for a step below the series'
    /// last, Error(illegal_state) if the session is not accepting.
    void log(const MetricPoint& point);

    /// Ordered by step, then name.
    std::vector<MetricPoint> query(const std::string& session_id, const QueryOptions& options = {}) const;

    /// CSV: "step,<id1>,<id2>,..." then one row per step in the union of
    /// steps; a session without a point at that step gets an empty cell.
    std::string export_csv(const std::vector<std::string>& session_ids, const std::string& name) const;

    std::shared_ptr<MetricSubscription> subscribe(const std::string& session_id,
                                                  std::optional<std::string> name = std::nullopt);

    /// All points of the session as JSON lines, in query order.
    std::string archive_jsonl(const std::string& session_id) const;

    std::size_t replay_size() const noexcept { return replay_; }

private:
    struct Series {
        std::vector<MetricPoint> points;  // strictly increasing step
    };
    struct SessionData {
        std::map<std::string, Series> series;
        bool accepting = true;
        std::unique_ptr<Broadcaster<MetricPoint>> stream;
    };

    const SessionData& find(const std::string& session_id) const;

    std::size_t replay_;
    std::size_t buffer_;
    mutable std::mutex mutex_;
    std::map<std::string, SessionData> sessions_;
};

} // namespace mlforge::metrics
