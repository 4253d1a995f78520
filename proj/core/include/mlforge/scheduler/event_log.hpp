#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <mlforge/blobstore/blob_store.hpp>
#include <mlforge/scheduler/events.hpp>

namespace mlforge::sched {

/// Durable, sequence-numbered master log kept in the blob store.
///
/// Records are grouped into segments of at most `segment_records`. A segment
/// blob is the digest of the previous sealed segment (32 zero bytes for the
/// first) followed by its records, so sealed segments form a hash chain. A
/// small manifest naming the chain tip, the open segment, the last sequence
/// number, and the current term is stored under ref `eventlog/<name>`.
///
/// The manifest term fences writers: an append whose writer term is below the
/// persisted term fails with Error(not_master). Any number of EventLog
/// objects may point at the same name; each re-reads the manifest when it has
/// moved.
class EventLog {
public:
    explicit EventLog(store::BlobStore& blobs, std::string name = "master",
                      std::size_t segment_records = 64);

    /// Persists the event and returns its sequence number.
    std::uint64_t append(const EventBody& body, std::uint64_t writer_term);

    /// All events in order. Throws Error(corrupt_log) on gaps or bad checksums.
    std::vector<Event> read_all() const;

    std::uint64_t last_seq() const;
    std::uint64_t term() const;

    /// Test failpoint, called after an event is durable but before append returns.
    void set_after_append_hook(std::function<void(const Event&)> hook);

private:
    struct Manifest {
        std::uint64_t term = 0;
        std::uint64_t last_seq = 0;
        std::uint64_t sealed_count = 0;   // records in sealed segments
        std::optional<store::Digest> sealed_tip;
        std::optional<store::Digest> open_segment;
    };

    void refresh_locked() const;
    Bytes segment_bytes(const std::vector<Bytes>& records) const;

    store::BlobStore& blobs_;
    std::string ref_name_;
    std::size_t segment_records_;
    mutable std::mutex mutex_;
    mutable std::optional<store::Digest> manifest_digest_;
    mutable Manifest manifest_;
    mutable std::vector<Bytes> open_records_;
    std::function<void(const Event&)> after_append_;
};

} // namespace mlforge::sched
