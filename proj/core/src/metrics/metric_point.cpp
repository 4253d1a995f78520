#include <mlforge/metrics/metric_point.hpp>

#include <mlforge/common/error.hpp>

namespace mlforge::metrics {

nlohmann::json to_json(const MetricPoint& p) {
    return nlohmann::json{{"session_id", p.session_id},
                          {"step", p.step},
                          {"name", p.name},
                          {"value", p.value},
                          {"at", format_timestamp(p.at)},
                          {"at_ms", to_millis(p.at)}};
}

MetricPoint point_from_json(const nlohmann::json& j) {
    try {
        MetricPoint p;
        p.session_id = j.at("session_id").get<std::string>();
        p.step = j.at("step").get<std::int64_t>();
        p.name = j.at("name").get<std::string>();
        p.value = j.at("value").get<double>();
        p.at = from_millis(j.value("at_ms", std::int64_t{0}));
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("bad metric point: ") + e.what());
    }
}

std::string to_jsonl(const MetricPoint& p) { return to_json(p).dump() + "\n"; }

} // namespace mlforge::metrics
