#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>

#include <mlforge/blobstore/backend.hpp>
#include <mlforge/blobstore/digest.hpp>

namespace mlforge::store {

struct BlobStoreStats {
    std::uint64_t puts = 0;
    std::uint64_t dedup_hits = 0;
    std::uint64_t gets = 0;
    std::size_t objects = 0;
    std::uint64_t stored_bytes = 0;
};

/// Content-addressed object store. Equal bytes are stored exactly once and
/// are named by their SHA-256 digest. Safe for concurrent use.
class BlobStore {
public:
    static constexpr std::uint64_t kUnlimited = std::numeric_limits<std::uint64_t>::max();

    explicit BlobStore(std::unique_ptr<BlobBackend> backend = std::make_unique<MemoryBackend>(),
                       std::uint64_t capacity_bytes = kUnlimited);

    /// Idempotent. Throws Error(storage_full) if new bytes would exceed capacity.
    Digest put_blob(std::span<const std::uint8_t> bytes);
    Digest put_blob(std::string_view text);

    /// Throws Error(not_found) for an unknown digest.
    Bytes get_blob(const Digest& digest) const;
    bool contains(const Digest& digest) const;

    void set_ref(const std::string& name, const Digest& digest);
    std::optional<Digest> get_ref(const std::string& name) const;
    /// All refs whose name starts with `prefix`, ordered by name.
    std::map<std::string, Digest> refs_with_prefix(const std::string& prefix) const;

    BlobStoreStats stats() const;

private:
    mutable std::shared_mutex mutex_;
    std::unique_ptr<BlobBackend> backend_;
    std::uint64_t capacity_bytes_;
    std::map<std::string, Digest> refs_;
    std::uint64_t puts_ = 0;
    std::uint64_t dedup_hits_ = 0;
    mutable std::atomic<std::uint64_t> gets_ = 0;
};

} // namespace mlforge::store
