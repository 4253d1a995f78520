#include <mlforge/blobstore/checkpoint_index.hpp>

#include <charconv>
#include <cstdio>

#include <mlforge/common/error.hpp>

namespace mlforge::store {

namespace {

constexpr std::string_view kRecordPrefix = "checkpoint/";
constexpr std::string_view kBestPrefix = "checkpoint-best/";

std::string record_ref(const std::string& session_id, std::int64_t step) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%012lld", static_cast<long long>(step));
    return std::string(kRecordPrefix) + session_id + "#" + buf;
}

CheckpointRecord record_from_json(const nlohmann::json& j) {
    return CheckpointRecord{j.at("session_id").get<std::string>(), j.at("step").get<std::int64_t>(),
                            Digest::from_hex(j.at("digest").get<std::string>()),
                            from_millis(j.at("created_at_ms").get<std::int64_t>()),
                            j.at("is_final").get<bool>()};
}

} // namespace

nlohmann::json to_json(const CheckpointRecord& r) {
    return {{"session_id", r.session_id},
            {"step", r.step},
            {"digest", r.digest.hex()},
            {"created_at", format_timestamp(r.created_at)},
            {"created_at_ms", to_millis(r.created_at)},
            {"is_final", r.is_final}};
}

CheckpointSelector CheckpointSelector::parse(std::string_view text) {
    if (text == "latest") return latest();
    if (text == "best") return best();
    std::int64_t step = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), step);
    if (ec != std::errc{} || ptr != text.data() + text.size() || step < 0) {
        throw Error(Errc::invalid_argument,
                    "checkpoint selector must be latest, best, or a step: " + std::string(text));
    }
    return at(step);
}

std::string CheckpointSelector::to_string() const {
    switch (kind) {
    case Kind::latest: return "latest";
    case Kind::best: return "best";
    case Kind::step: return std::to_string(step);
    }
    return "latest";
}

CheckpointIndex::CheckpointIndex(BlobStore& blobs, const Clock& clock) : blobs_(blobs), clock_(clock) {
    for (const auto& [name, digest] : blobs_.refs_with_prefix(std::string(kRecordPrefix))) {
        const auto bytes = blobs_.get_blob(digest);
        auto r = record_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
        records_[r.session_id].emplace(r.step, std::move(r));
    }
    for (const auto& [name, digest] : blobs_.refs_with_prefix(std::string(kBestPrefix))) {
        const auto bytes = blobs_.get_blob(digest);
        auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
        best_[j.at("session_id").get<std::string>()] = j.at("step").get<std::int64_t>();
    }
}

void CheckpointIndex::persist(const CheckpointRecord& r) {
    blobs_.set_ref(record_ref(r.session_id, r.step), blobs_.put_blob(to_json(r).dump()));
}

CheckpointRecord CheckpointIndex::put(const std::string& session_id, std::int64_t step,
                                      std::span<const std::uint8_t> state_bytes, bool is_final) {
    std::lock_guard lock(mutex_);
    auto& per_session = records_[session_id];
    if (!per_session.empty() && step <= per_session.rbegin()->first) {
        throw Error(Errc::non_monotonic_step,
                    "checkpoint step " + std::to_string(step) + " for " + session_id +
                        " is not after step " + std::to_string(per_session.rbegin()->first));
    }
    CheckpointRecord r{session_id, step, blobs_.put_blob(state_bytes), clock_.now(), is_final};
    persist(r);
    per_session.emplace(step, r);
    return r;
}

CheckpointRecord CheckpointIndex::finalize(const std::string& session_id, std::int64_t step) {
    std::lock_guard lock(mutex_);
    auto it = records_.find(session_id);
    if (it == records_.end() || !it->second.contains(step)) {
        throw Error(Errc::no_checkpoint,
                    "no checkpoint at step " + std::to_string(step) + " for " + session_id);
    }
    auto& r = it->second.at(step);
    if (!r.is_final) {
        r.is_final = true;
        persist(r);
    }
    return r;
}

CheckpointRecord CheckpointIndex::get(const std::string& session_id,
                                      const CheckpointSelector& selector) const {
    std::lock_guard lock(mutex_);
    auto it = records_.find(session_id);
    if (it == records_.end() || it->second.empty()) {
        throw Error(Errc::no_checkpoint, "session " + session_id + " has no checkpoints");
    }
    const auto& per_session = it->second;
    switch (selector.kind) {
    case CheckpointSelector::Kind::latest:
        return per_session.rbegin()->second;
    case CheckpointSelector::Kind::best: {
        auto b = best_.find(session_id);
        if (b == best_.end()) {
            throw Error(Errc::no_checkpoint, "session " + session_id + " has no best checkpoint");
        }
        return per_session.at(b->second);
    }
    case CheckpointSelector::Kind::step: {
        auto r = per_session.find(selector.step);
        if (r == per_session.end()) {
            throw Error(Errc::no_checkpoint, "session " + session_id + " has no checkpoint at step " +
                                                 std::to_string(selector.step));
        }
        return r->second;
    }
    }
    throw Error(Errc::no_checkpoint, "bad selector");
}

void CheckpointIndex::set_best(const std::string& session_id, std::int64_t step) {
    std::lock_guard lock(mutex_);
    auto it = records_.find(session_id);
    if (it == records_.end() || !it->second.contains(step)) {
        throw Error(Errc::no_checkpoint,
                    "no checkpoint at step " + std::to_string(step) + " for " + session_id);
    }
    best_[session_id] = step;
    nlohmann::json j{{"session_id", session_id}, {"step", step}};
    blobs_.set_ref(std::string(kBestPrefix) + session_id, blobs_.put_blob(j.dump()));
}

std::optional<std::int64_t> CheckpointIndex::best_step(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    auto it = best_.find(session_id);
    if (it == best_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<CheckpointRecord> CheckpointIndex::at_or_before(const std::string& session_id,
                                                              std::int64_t step) const {
    std::lock_guard lock(mutex_);
    auto it = records_.find(session_id);
    if (it == records_.end()) {
        return std::nullopt;
    }
    auto r = it->second.upper_bound(step);
    if (r == it->second.begin()) {
        return std::nullopt;
    }
    return std::prev(r)->second;
}

std::vector<CheckpointRecord> CheckpointIndex::list(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    std::vector<CheckpointRecord> out;
    if (auto it = records_.find(session_id); it != records_.end()) {
        for (const auto& [step, r] : it->second) {
            out.push_back(r);
        }
    }
    return out;
}

} // namespace mlforge::store
