#include <mlforge/scheduler/event_log.hpp>

#include <algorithm>

#include <nlohmann/json.hpp>

#include <mlforge/common/error.hpp>

namespace mlforge::sched {

namespace {

constexpr std::size_t kPrevDigestSize = 32;

std::optional<store::Digest> optional_digest(const nlohmann::json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    return store::Digest::from_hex(j.get<std::string>());
}

nlohmann::json digest_json(const std::optional<store::Digest>& d) {
    return d ? nlohmann::json(d->hex()) : nlohmann::json(nullptr);
}

// Splits a segment body into its raw records without decoding payloads.
std::vector<Bytes> split_records(std::span<const std::uint8_t> bytes) {
    std::vector<Bytes> out;
    std::size_t offset = 0;
    while (offset + 4 <= bytes.size()) {
        std::size_t len = (std::size_t{bytes[offset]} << 24) | (std::size_t{bytes[offset + 1]} << 16) |
                          (std::size_t{bytes[offset + 2]} << 8) | std::size_t{bytes[offset + 3]};
        if (offset + 4 + len > bytes.size()) {
            break;
        }
        out.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                         bytes.begin() + static_cast<std::ptrdiff_t>(offset + 4 + len));
        offset += 4 + len;
    }
    return out;
}

} // namespace

EventLog::EventLog(store::BlobStore& blobs, std::string name, std::size_t segment_records)
    : blobs_(blobs), ref_name_("eventlog/" + std::move(name)), segment_records_(std::max<std::size_t>(1, segment_records)) {
    std::lock_guard lock(mutex_);
    refresh_locked();
}

void EventLog::refresh_locked() const {
    auto digest = blobs_.get_ref(ref_name_);
    if (digest == manifest_digest_) {
        return;
    }
    manifest_digest_ = digest;
    manifest_ = Manifest{};
    open_records_.clear();
    if (!digest) {
        return;
    }
    const auto raw = blobs_.get_blob(*digest);
    const auto j = nlohmann::json::parse(raw.begin(), raw.end());
    manifest_.term = j.at("term").get<std::uint64_t>();
    manifest_.last_seq = j.at("last_seq").get<std::uint64_t>();
    manifest_.sealed_count = j.at("sealed_count").get<std::uint64_t>();
    manifest_.sealed_tip = optional_digest(j.at("sealed_tip"));
    manifest_.open_segment = optional_digest(j.at("open_segment"));
    if (manifest_.open_segment) {
        const auto seg = blobs_.get_blob(*manifest_.open_segment);
        open_records_ = split_records(std::span(seg).subspan(kPrevDigestSize));
    }
}

Bytes EventLog::segment_bytes(const std::vector<Bytes>& records) const {
    Bytes out(kPrevDigestSize, 0);
    if (manifest_.sealed_tip) {
        std::copy(manifest_.sealed_tip->bytes.begin(), manifest_.sealed_tip->bytes.end(), out.begin());
    }
    for (const auto& r : records) {
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::uint64_t EventLog::append(const EventBody& body, std::uint64_t writer_term) {
    std::unique_lock lock(mutex_);
    refresh_locked();
    if (writer_term < manifest_.term) {
        throw Error(Errc::not_master, "writer term " + std::to_string(writer_term) +
                                          " is behind log term " + std::to_string(manifest_.term));
    }
    Event event{manifest_.last_seq + 1, body};
    auto records = open_records_;
    records.push_back(encode_record(event));

    Manifest next = manifest_;
    next.last_seq = event.seq;
    if (const auto* t = std::get_if<TermStarted>(&body)) {
        next.term = std::max(next.term, t->term);
    }
    const auto segment_digest = blobs_.put_blob(segment_bytes(records));
    if (records.size() >= segment_records_) {
        next.sealed_tip = segment_digest;
        next.sealed_count += records.size();
        next.open_segment.reset();
        records.clear();
    } else {
        next.open_segment = segment_digest;
    }

    const nlohmann::json mj{{"term", next.term},
                            {"last_seq", next.last_seq},
                            {"sealed_count", next.sealed_count},
                            {"sealed_tip", digest_json(next.sealed_tip)},
                            {"open_segment", digest_json(next.open_segment)}};
    const auto manifest_digest = blobs_.put_blob(mj.dump());
    blobs_.set_ref(ref_name_, manifest_digest);
    manifest_ = next;
    manifest_digest_ = manifest_digest;
    open_records_ = std::move(records);

    auto hook = after_append_;
    lock.unlock();
    if (hook) {
        hook(event);
    }
    return event.seq;
}

std::vector<Event> EventLog::read_all() const {
    std::lock_guard lock(mutex_);
    refresh_locked();

    // Walk the sealed chain from the tip back to the first segment.
    std::vector<Bytes> segments;
    auto cursor = manifest_.sealed_tip;
    while (cursor) {
        auto seg = blobs_.get_blob(*cursor);
        if (seg.size() < kPrevDigestSize) {
            throw Error(Errc::corrupt_log, "corrupt event log: short segment " + cursor->hex());
        }
        store::Digest prev;
        std::copy_n(seg.begin(), kPrevDigestSize, prev.bytes.begin());
        segments.push_back(std::move(seg));
        if (std::all_of(prev.bytes.begin(), prev.bytes.end(), [](auto b) { return b == 0; })) {
            cursor.reset();
        } else {
            cursor = prev;
        }
    }
    std::reverse(segments.begin(), segments.end());

    Bytes stream;
    for (const auto& seg : segments) {
        stream.insert(stream.end(), seg.begin() + kPrevDigestSize, seg.end());
    }
    for (const auto& r : open_records_) {
        stream.insert(stream.end(), r.begin(), r.end());
    }
    auto events = decode_records(stream, 1);
    if (events.size() != manifest_.last_seq) {
        throw Error(Errc::corrupt_log, "corrupt event log at seq " + std::to_string(events.size() + 1) +
                                           ": manifest expects " + std::to_string(manifest_.last_seq) +
                                           " events");
    }
    return events;
}

std::uint64_t EventLog::last_seq() const {
    std::lock_guard lock(mutex_);
    refresh_locked();
    return manifest_.last_seq;
}

std::uint64_t EventLog::term() const {
    std::lock_guard lock(mutex_);
    refresh_locked();
    return manifest_.term;
}

void EventLog::set_after_append_hook(std::function<void(const Event&)> hook) {
    std::lock_guard lock(mutex_);
    after_append_ = std::move(hook);
}

} // namespace mlforge::sched
