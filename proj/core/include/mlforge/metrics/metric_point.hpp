#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include <mlforge/common/clock.hpp>

namespace mlforge::metrics {

struct MetricPoint {
    std::string session_id;
    std::int64_t step = 0;
    std::string name;
    double value = 0.0;
    Timestamp at;

    bool operator==(const MetricPoint&) const = default;
};

nlohmann::json to_json(const MetricPoint& p);
MetricPoint point_from_json(const nlohmann::json& j);

/// One JSON object per line with keys in fixed (lexicographic) order.
std::string to_jsonl(const MetricPoint& p);

} // namespace mlforge::metrics
