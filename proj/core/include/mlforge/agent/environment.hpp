#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <mlforge/blobstore/digest.hpp>

namespace mlforge::agent {

/// An execution environment: a base image tag plus pinned packages.
struct EnvironmentSpec {
    std::string base_image = "python:3.6";
    std::vector<std::pair<std::string, std::string>> packages;

    /// Packages sorted and deduplicated.
    EnvironmentSpec canonical() const;
    /// Digest of the canonical serialization; equal specs, equal digests.
    store::Digest digest() const;
    std::string canonical_json() const;

    bool operator==(const EnvironmentSpec&) const = default;
};

struct EnvHandle {
    store::Digest env_digest;
    std::uint64_t build_count_at_creation = 0;
    bool cache_hit = false;
};

/// Per-host cache of built environments. A spec is built once per digest.
class EnvironmentCache {
public:
    /// Throws Error(build_failed) if the base image is configured to fail.
    EnvHandle prepare(const EnvironmentSpec& spec);

    /// Simulates a broken image: later builds of this tag fail.
    void fail_builds_for(const std::string& base_image);

    std::uint64_t build_count() const;
    bool cached(const store::Digest& digest) const;

private:
    mutable std::mutex mutex_;
    std::map<store::Digest, std::uint64_t> built_;  // digest -> build number
    std::set<std::string> failing_images_;
    std::uint64_t builds_ = 0;
};

} // namespace mlforge::agent
