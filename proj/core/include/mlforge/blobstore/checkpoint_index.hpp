#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <mlforge/blobstore/blob_store.hpp>
#include <mlforge/common/clock.hpp>

namespace mlforge::store {

struct CheckpointRecord {
    std::string session_id;
    std::int64_t step = 0;
    Digest digest;
    Timestamp created_at;
    bool is_final = false;

    bool operator==(const CheckpointRecord&) const = default;
};

nlohmann::json to_json(const CheckpointRecord& r);

/// Which checkpoint of a session to resolve: a specific step, the most
/// recent one, or the one the session manager marked as best-scoring.
struct CheckpointSelector {
    enum class Kind { step, latest, best };

    Kind kind = Kind::latest;
    std::int64_t step = 0;

    static CheckpointSelector latest() { return {Kind::latest, 0}; }
    static CheckpointSelector best() { return {Kind::best, 0}; }
    static CheckpointSelector at(std::int64_t step) { return {Kind::step, step}; }
    /// "latest", "best", or a non-negative step number.
    static CheckpointSelector parse(std::string_view text);

    std::string to_string() const;
};

/// Per-session checkpoint records. State bytes live in the blob store; the
/// records themselves are persisted as refs so they survive a restart.
class CheckpointIndex {
public:
    CheckpointIndex(BlobStore& blobs, const Clock& clock);

    /// Throws Error(non_monotonic_step) unless `step` exceeds the session's
    /// last checkpoint step.
    CheckpointRecord put(const std::string& session_id, std::int64_t step,
                         std::span<const std::uint8_t> state_bytes, bool is_final);

    /// Marks an existing checkpoint as the session's final one.
    CheckpointRecord finalize(const std::string& session_id, std::int64_t step);

    /// Throws Error(no_checkpoint) when nothing matches.
    CheckpointRecord get(const std::string& session_id, const CheckpointSelector& selector) const;

    /// Records which checkpoint is the best-scoring one. The step must exist.
    void set_best(const std::string& session_id, std::int64_t step);
    std::optional<std::int64_t> best_step(const std::string& session_id) const;

    /// Latest checkpoint at or before `step`, if any.
    std::optional<CheckpointRecord> at_or_before(const std::string& session_id, std::int64_t step) const;

    std::vector<CheckpointRecord> list(const std::string& session_id) const;

    Bytes load_state(const CheckpointRecord& record) const { return blobs_.get_blob(record.digest); }

private:
    void persist(const CheckpointRecord& r);

    BlobStore& blobs_;
    const Clock& clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::map<std::int64_t, CheckpointRecord>> records_;
    std::map<std::string, std::int64_t> best_;
};

} // namespace mlforge::store
