#include <mlforge/scheduler/events.hpp>

#include <zlib.h>

#include <mlforge/common/error.hpp>

namespace mlforge::sched {

namespace {

nlohmann::json body_to_json(const EventBody& body) {
    return std::visit(
        [](const auto& e) -> nlohmann::json {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, NodeRegistered>) {
                return {{"node", to_json(e.node)}, {"at_ms", to_millis(e.at)}};
            } else if constexpr (std::is_same_v<T, HeartbeatReceived>) {
                return {{"report", to_json(e.report)}, {"at_ms", to_millis(e.at)}};
            } else if constexpr (std::is_same_v<T, JobQueued>) {
                return {{"spec", to_json(e.spec)}};
            } else if constexpr (std::is_same_v<T, JobPlaced>) {
                return {{"spec", to_json(e.spec)}, {"node_id", e.node_id}};
            } else if constexpr (std::is_same_v<T, JobCompleted> || std::is_same_v<T, JobCancelled>) {
                return {{"job_id", e.job_id}};
            } else if constexpr (std::is_same_v<T, NodeDead>) {
                return {{"node_id", e.node_id}};
            } else {
                return {{"term", e.term}, {"leader_id", e.leader_id}};
            }
        },
        body);
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), data.data(), static_cast<uInt>(data.size())));
}

void put_be(Bytes& out, std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t offset, int width) {
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
        v = (v << 8) | in[offset + static_cast<std::size_t>(i)];
    }
    return v;
}

} // namespace

std::string encode_payload(const EventBody& body) { return body_to_json(body).dump(); }

EventBody decode_payload(EventKind kind, std::string_view payload) {
    const auto j = nlohmann::json::parse(payload);
    switch (kind) {
    case EventKind::node_registered:
        return NodeRegistered{node_from_json(j.at("node")), from_millis(j.at("at_ms").get<std::int64_t>())};
    case EventKind::heartbeat:
        return HeartbeatReceived{report_from_json(j.at("report")),
                                 from_millis(j.at("at_ms").get<std::int64_t>())};
    case EventKind::job_queued:
        return JobQueued{job_from_json(j.at("spec"))};
    case EventKind::job_placed:
        return JobPlaced{job_from_json(j.at("spec")), j.at("node_id").get<std::string>()};
    case EventKind::job_completed:
        return JobCompleted{j.at("job_id").get<std::string>()};
    case EventKind::job_cancelled:
        return JobCancelled{j.at("job_id").get<std::string>()};
    case EventKind::node_dead:
        return NodeDead{j.at("node_id").get<std::string>()};
    case EventKind::term_started:
        return TermStarted{j.at("term").get<std::uint64_t>(), j.at("leader_id").get<std::string>()};
    }
    throw Error(Errc::invalid_argument, "unknown event kind");
}

Bytes encode_record(const Event& event) {
    const std::string payload = encode_payload(event.body);
    const auto payload_bytes =
        std::span(reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size());
    Bytes out;
    out.reserve(4 + 8 + 1 + payload.size() + 4);
    put_be(out, 8 + 1 + payload.size() + 4, 4);
    put_be(out, event.seq, 8);
    out.push_back(static_cast<std::uint8_t>(event.kind()));
    out.insert(out.end(), payload_bytes.begin(), payload_bytes.end());
    put_be(out, crc_of(payload_bytes), 4);
    return out;
}

std::vector<Event> decode_records(std::span<const std::uint8_t> bytes, std::uint64_t expected_first_seq) {
    std::vector<Event> events;
    std::uint64_t expected = expected_first_seq;
    std::size_t offset = 0;
    auto corrupt = [&](const std::string& why) {
        return Error(Errc::corrupt_log, "corrupt event log at seq " + std::to_string(expected) + ": " + why);
    };
    while (offset < bytes.size()) {
        if (bytes.size() - offset < 4) {
            throw corrupt("truncated length prefix");
        }
        const auto len = static_cast<std::size_t>(get_be(bytes, offset, 4));
        if (len < 13 || bytes.size() - offset - 4 < len) {
            throw corrupt("truncated record");
        }
        const std::size_t body = offset + 4;
        const std::uint64_t seq = get_be(bytes, body, 8);
        if (seq != expected) {
            throw corrupt("sequence gap (found " + std::to_string(seq) + ")");
        }
        const auto kind_byte = bytes[body + 8];
        const std::size_t payload_len = len - 13;
        const auto payload = bytes.subspan(body + 9, payload_len);
        const auto stored_crc = static_cast<std::uint32_t>(get_be(bytes, body + 9 + payload_len, 4));
        if (stored_crc != crc_of(payload)) {
            throw corrupt("checksum mismatch");
        }
        if (kind_byte < 1 || kind_byte > static_cast<std::uint8_t>(EventKind::term_started)) {
            throw corrupt("unknown kind " + std::to_string(kind_byte));
        }
        try {
            events.push_back(Event{seq, decode_payload(static_cast<EventKind>(kind_byte),
                                                       std::string_view(reinterpret_cast<const char*>(
                                                                            payload.data()),
                                                                        payload.size()))});
        } catch (const nlohmann::json::exception& e) {
            throw corrupt(e.what());
        }
        ++expected;
        offset = body + len;
    }
    return events;
}

} // namespace mlforge::sched
