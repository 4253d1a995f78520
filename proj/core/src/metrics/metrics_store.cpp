#include <mlforge/metrics/metrics_store.hpp>

#include <algorithm>
#include <set>

#include <mlforge/common/error.hpp>
#include <mlforge/common/text.hpp>

namespace mlforge::metrics {

MetricsStore::MetricsStore(std::size_t replay, std::size_t subscriber_buffer)
    : replay_(replay), buffer_(subscriber_buffer) {}

void MetricsStore::open_session(const std::string& session_id) {
    std::lock_guard lock(mutex_);
    auto& data = sessions_[session_id];
    data.accepting = true;
    if (!data.stream) {
        data.stream = std::make_unique<Broadcaster<MetricPoint>>(buffer_);
    }
}

const MetricsStore::SessionData& MetricsStore::find(const std::string& session_id) const {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw Error(Errc::unknown_session, "unknown session " + session_id);
    }
    return it->second;
}

void MetricsStore::set_accepting(const std::string& session_id, bool accepting) {
    std::lock_guard lock(mutex_);
    const_cast<SessionData&>(find(session_id)).accepting = accepting;
}

void MetricsStore::close_streams(const std::string& session_id) {
    std::lock_guard lock(mutex_);
    find(session_id).stream->close();
}

bool MetricsStore::has_session(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    return sessions_.contains(session_id);
}

void MetricsStore::log(const MetricPoint& point) {
    std::lock_guard lock(mutex_);
    auto& data = const_cast<SessionData&>(find(point.session_id));
    if (!data.accepting) {
        throw Error(Errc::illegal_state, "session " + point.session_id + " is not accepting metrics");
    }
    auto& series = data.series[point.name];
    if (!series.points.empty()) {
        const auto last = series.points.back().step;
        if (point.step == last) {
            throw Error(Errc::duplicate_point, "duplicate point " + point.name + "@" + std::to_string(point.step) +
                                                   " for " + point.session_id);
        }
        if (point.step < last) {
            throw Error(Errc::out_of_order_step, "step " + std::to_string(point.step) + " of " + point.name +
                                                     " is before " + std::to_string(last));
        }
    }
    series.points.push_back(point);
    data.stream->publish(point);
}

std::vector<MetricPoint> MetricsStore::query(const std::string& session_id, const QueryOptions& options) const {
    std::lock_guard lock(mutex_);
    const auto& data = find(session_id);
    std::vector<MetricPoint> out;
    for (const auto& [name, series] : data.series) {
        if (options.name && *options.name != name) {
            continue;
        }
        auto first = series.points.begin();
        auto last = series.points.end();
        if (options.from_step) {
            first = std::lower_bound(first, last, *options.from_step,
                                     [](const MetricPoint& p, std::int64_t s) { return p.step < s; });
        }
        if (options.to_step) {
            last = std::upper_bound(first, last, *options.to_step,
                                    [](std::int64_t s, const MetricPoint& p) { return s < p.step; });
        }
        // Only a series' last k points can make the overall last k.
        if (options.tail && static_cast<std::size_t>(last - first) > *options.tail) {
            first = last - static_cast<std::ptrdiff_t>(*options.tail);
        }
        out.insert(out.end(), first, last);
    }
    std::stable_sort(out.begin(), out.end(), [](const MetricPoint& a, const MetricPoint& b) {
        return std::tie(a.step, a.name) < std::tie(b.step, b.name);
    });
    if (options.tail && *options.tail < out.size()) {
        out.erase(out.begin(), out.end() - static_cast<std::ptrdiff_t>(*options.tail));
    }
    return out;
}

std::string MetricsStore::export_csv(const std::vector<std::string>& session_ids, const std::string& name) const {
    if (session_ids.empty()) {
        throw Error(Errc::invalid_argument, "export needs at least one session");
    }
    std::lock_guard lock(mutex_);
    std::vector<std::map<std::int64_t, double>> columns;
    std::set<std::int64_t> steps;
    for (const auto& id : session_ids) {
        const auto& data = find(id);
        auto& column = columns.emplace_back();
        if (auto it = data.series.find(name); it != data.series.end()) {
            for (const auto& p : it->second.points) {
                column.emplace(p.step, p.value);
                steps.insert(p.step);
            }
        }
    }
    std::string out = "step";
    for (const auto& id : session_ids) {
        out += ',';
        out += id;
    }
    out += '\n';
    for (auto step : steps) {
        out += std::to_string(step);
        for (const auto& column : columns) {
            out += ',';
            if (auto it = column.find(step); it != column.end()) {
                out += format_real(it->second);
            }
        }
        out += '\n';
    }
    return out;
}

std::shared_ptr<MetricSubscription> MetricsStore::subscribe(const std::string& session_id,
                                                            std::optional<std::string> name) {
    std::lock_guard lock(mutex_);
    const auto& data = find(session_id);
    std::function<bool(const MetricPoint&)> filter;
    if (name) {
        filter = [n = std::move(*name)](const MetricPoint& p) { return p.name == n; };
    }
    return data.stream->subscribe(replay_, std::move(filter));
}

std::string MetricsStore::archive_jsonl(const std::string& session_id) const {
    std::string out;
    for (const auto& p : query(session_id)) {
        out += to_jsonl(p);
    }
    return out;
}

} // namespace mlforge::metrics
