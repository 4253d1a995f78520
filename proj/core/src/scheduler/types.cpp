#include <mlforge/scheduler/types.hpp>

#include <mlforge/common/error.hpp>

namespace mlforge::sched {

nlohmann::json to_json(const Resources& r) {
    return {{"cpus", r.cpus}, {"gpus", r.gpus}, {"mem_mb", r.mem_mb}};
}

Resources resources_from_json(const nlohmann::json& j) {
    return Resources{j.value("gpus", std::int64_t{0}), j.value("cpus", std::int64_t{0}),
                     j.value("mem_mb", std::int64_t{0})};
}

nlohmann::json to_json(const NodeDescriptor& d) {
    return {{"node_id", d.node_id}, {"total", to_json(d.total)}};
}

NodeDescriptor node_from_json(const nlohmann::json& j) {
    return NodeDescriptor{j.at("node_id").get<std::string>(), resources_from_json(j.at("total"))};
}

nlohmann::json to_json(const ResourceReport& r) {
    return {{"node_id", r.node_id},
            {"free_gpus", r.free.gpus},
            {"free_cpus", r.free.cpus},
            {"free_mem_mb", r.free.mem_mb},
            {"seq", r.seq},
            {"sent_at_ms", to_millis(r.sent_at)}};
}

ResourceReport report_from_json(const nlohmann::json& j) {
    return ResourceReport{j.at("node_id").get<std::string>(),
                          Resources{j.at("free_gpus").get<std::int64_t>(),
                                    j.at("free_cpus").get<std::int64_t>(),
                                    j.at("free_mem_mb").get<std::int64_t>()},
                          j.at("seq").get<std::uint64_t>(),
                          from_millis(j.at("sent_at_ms").get<std::int64_t>())};
}

nlohmann::json to_json(const JobSpec& s) {
    return {{"job_id", s.job_id},
            {"session_ref", s.session_ref},
            {"request", to_json(s.request)},
            {"priority", s.priority},
            {"submitted_at_ms", to_millis(s.submitted_at)}};
}

JobSpec job_from_json(const nlohmann::json& j) {
    return JobSpec{j.at("job_id").get<std::string>(), j.at("session_ref").get<std::string>(),
                   resources_from_json(j.at("request")), j.at("priority").get<int>(),
                   from_millis(j.at("submitted_at_ms").get<std::int64_t>())};
}

nlohmann::json to_json(const PlacementDecision& d) {
    nlohmann::json j{{"job_id", d.job_id}};
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Placed>) {
                j["outcome"] = "placed";
                j["node_id"] = o.node_id;
            } else if constexpr (std::is_same_v<T, Queued>) {
                j["outcome"] = "queued";
                j["position"] = o.position;
            } else {
                j["outcome"] = "rejected";
                j["reason"] = o.reason;
            }
        },
        d.outcome);
    return j;
}

std::string encode_heartbeat(const ResourceReport& report) {
    // nlohmann::json objects are key-sorted, which gives the canonical order.
    return to_json(report).dump();
}

ResourceReport decode_heartbeat(std::string_view wire) {
    try {
        return report_from_json(nlohmann::json::parse(wire));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("malformed heartbeat: ") + e.what());
    }
}

} // namespace mlforge::sched
