#include <mlforge/blobstore/blob_store.hpp>

#include <mutex>

#include <mlforge/common/error.hpp>

namespace mlforge::store {

BlobStore::BlobStore(std::unique_ptr<BlobBackend> backend, std::uint64_t capacity_bytes)
    : backend_(std::move(backend)), capacity_bytes_(capacity_bytes) {
    for (const auto& [name, hex] : backend_->load_refs()) {
        refs_.emplace(name, Digest::from_hex(hex));
    }
}

Digest BlobStore::put_blob(std::span<const std::uint8_t> bytes) {
    const Digest digest = sha256(bytes);
    std::unique_lock lock(mutex_);
    ++puts_;
    if (backend_->contains(digest)) {
        ++dedup_hits_;
        return digest;
    }
    if (capacity_bytes_ != kUnlimited &&
        backend_->stored_bytes() + bytes.size() > capacity_bytes_) {
        throw Error(Errc::storage_full, "blob of " + std::to_string(bytes.size()) +
                                            " bytes exceeds remaining capacity");
    }
    backend_->write(digest, bytes);
    return digest;
}

Digest BlobStore::put_blob(std::string_view text) {
    return put_blob(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Bytes BlobStore::get_blob(const Digest& digest) const {
    std::shared_lock lock(mutex_);
    ++gets_;
    auto bytes = backend_->read(digest);
    if (!bytes) {
        throw Error(Errc::not_found, "no blob " + digest.hex());
    }
    return std::move(*bytes);
}

bool BlobStore::contains(const Digest& digest) const {
    std::shared_lock lock(mutex_);
    return backend_->contains(digest);
}

void BlobStore::set_ref(const std::string& name, const Digest& digest) {
    std::unique_lock lock(mutex_);
    backend_->put_ref(name, digest.hex());
    refs_[name] = digest;
}

std::optional<Digest> BlobStore::get_ref(const std::string& name) const {
    std::shared_lock lock(mutex_);
    auto it = refs_.find(name);
    if (it == refs_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::map<std::string, Digest> BlobStore::refs_with_prefix(const std::string& prefix) const {
    std::shared_lock lock(mutex_);
    std::map<std::string, Digest> out;
    for (auto it = refs_.lower_bound(prefix); it != refs_.end() && it->first.starts_with(prefix);
         ++it) {
        out.emplace(it->first, it->second);
    }
    return out;
}

BlobStoreStats BlobStore::stats() const {
    std::shared_lock lock(mutex_);
    return BlobStoreStats{puts_, dedup_hits_, gets_.load(), backend_->object_count(),
                          backend_->stored_bytes()};
}

} // namespace mlforge::store
