#include <mlforge/agent/environment.hpp>

#include <algorithm>

#include <nlohmann/json.hpp>

#include <mlforge/common/error.hpp>

namespace mlforge::agent {

EnvironmentSpec EnvironmentSpec::canonical() const {
    EnvironmentSpec out{base_image, packages};
    std::sort(out.packages.begin(), out.packages.end());
    out.packages.erase(std::unique(out.packages.begin(), out.packages.end()), out.packages.end());
    return out;
}

std::string EnvironmentSpec::canonical_json() const {
    const auto c = canonical();
    auto pkgs = nlohmann::json::array();
    for (const auto& [name, version] : c.packages) {
        pkgs.push_back({name, version});
    }
    return nlohmann::json{{"base_image", c.base_image}, {"packages", pkgs}}.dump();
}

store::Digest EnvironmentSpec::digest() const { return store::sha256(canonical_json()); }

EnvHandle EnvironmentCache::prepare(const EnvironmentSpec& spec) {
    if (spec.base_image.empty()) {
        throw Error(Errc::invalid_argument, "environment needs a base image");
    }
    const auto digest = spec.digest();
    std::lock_guard lock(mutex_);
    if (built_.contains(digest)) {
        return EnvHandle{digest, builds_, true};
    }
    if (failing_images_.contains(spec.base_image)) {
        throw Error(Errc::build_failed, "environment build failed for " + spec.base_image);
    }
    ++builds_;
    built_.emplace(digest, builds_);
    return EnvHandle{digest, builds_, false};
}

void EnvironmentCache::fail_builds_for(const std::string& base_image) {
    std::lock_guard lock(mutex_);
    failing_images_.insert(base_image);
}

std::uint64_t EnvironmentCache::build_count() const {
    std::lock_guard lock(mutex_);
    return builds_;
}

bool EnvironmentCache::cached(const store::Digest& digest) const {
    std::lock_guard lock(mutex_);
    return built_.contains(digest);
}

} // namespace mlforge::agent
