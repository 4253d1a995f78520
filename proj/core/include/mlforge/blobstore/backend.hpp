#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <mlforge/blobstore/digest.hpp>
#include <mlforge/common/text.hpp>

namespace mlforge::store {

/// Storage medium behind a BlobStore. Implementations need not be thread-safe;
/// the store serializes access.
class BlobBackend {
public:
    virtual ~BlobBackend() = default;

    virtual bool contains(const Digest& digest) const = 0;
    /// Must be atomic: a reader never observes a partially written object.
    virtual void write(const Digest& digest, std::span<const std::uint8_t> bytes) = 0;
    virtual std::optional<Bytes> read(const Digest& digest) const = 0;
    virtual std::size_t object_count() const = 0;
    virtual std::uint64_t stored_bytes() const = 0;

    /// Named references (mutable pointers to digests), persisted alongside objects.
    virtual std::map<std::string, std::string> load_refs() const = 0;
    virtual void put_ref(const std::string& name, const std::string& value) = 0;
};

class MemoryBackend final : public BlobBackend {
public:
    bool contains(const Digest& digest) const override;
    void write(const Digest& digest, std::span<const std::uint8_t> bytes) override;
    std::optional<Bytes> read(const Digest& digest) const override;
    std::size_t object_count() const override { return objects_.size(); }
    std::uint64_t stored_bytes() const override { return stored_bytes_; }
    std::map<std::string, std::string> load_refs() const override { return refs_; }
    void put_ref(const std::string& name, const std::string& value) override { refs_[name] = value; }

private:
    std::map<Digest, Bytes> objects_;
    std::map<std::string, std::string> refs_;
    std::uint64_t stored_bytes_ = 0;
};

/// Objects at `<root>/objects/<first two hex chars>/<hex digest>`, refs in
/// `<root>/index.json`. Both are written to a temporary file and renamed.
class DirectoryBackend final : public BlobBackend {
public:
    explicit DirectoryBackend(std::filesystem::path root);

    bool contains(const Digest& digest) const override;
    void write(const Digest& digest, std::span<const std::uint8_t> bytes) override;
    std::optional<Bytes> read(const Digest& digest) const override;
    std::size_t object_count() const override { return object_count_; }
    std::uint64_t stored_bytes() const override { return stored_bytes_; }
    std::map<std::string, std::string> load_refs() const override { return refs_; }
    void put_ref(const std::string& name, const std::string& value) override;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path object_path(const Digest& digest) const;

    std::filesystem::path root_;
    std::map<std::string, std::string> refs_;
    std::size_t object_count_ = 0;
    std::uint64_t stored_bytes_ = 0;
};

} // namespace mlforge::store
