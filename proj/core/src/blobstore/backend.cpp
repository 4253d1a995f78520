#include <mlforge/blobstore/backend.hpp>

#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include <mlforge/common/error.hpp>

namespace mlforge::store {

namespace fs = std::filesystem;

namespace {

void write_file_atomically(const fs::path& target, std::span<const std::uint8_t> bytes) {
    fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::storage_full, "cannot open " + tmp.string() + " for writing");
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error(Errc::storage_full, "short write to " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

std::optional<Bytes> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

bool MemoryBackend::contains(const Digest& digest) const { return objects_.contains(digest); }

void MemoryBackend::write(const Digest& digest, std::span<const std::uint8_t> bytes) {
    auto [it, inserted] = objects_.try_emplace(digest, bytes.begin(), bytes.end());
    if (inserted) {
        stored_bytes_ += bytes.size();
    }
}

std::optional<Bytes> MemoryBackend::read(const Digest& digest) const {
    auto it = objects_.find(digest);
    if (it == objects_.end()) {
        return std::nullopt;
    }
    return it->second;
}

DirectoryBackend::DirectoryBackend(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "objects");
    for (const auto& entry : fs::recursive_directory_iterator(root_ / "objects")) {
        if (entry.is_regular_file() && entry.path().extension() != ".tmp") {
            ++object_count_;
            stored_bytes_ += entry.file_size();
        }
    }
    if (auto raw = read_file(root_ / "index.json")) {
        auto j = nlohmann::json::parse(raw->begin(), raw->end());
        refs_ = j.at("refs").get<std::map<std::string, std::string>>();
    }
}

fs::path DirectoryBackend::object_path(const Digest& digest) const {
    const std::string hex = digest.hex();
    return root_ / "objects" / hex.substr(0, 2) / hex;
}

bool DirectoryBackend::contains(const Digest& digest) const {
    return fs::exists(object_path(digest));
}

void DirectoryBackend::write(const Digest& digest, std::span<const std::uint8_t> bytes) {
    const auto path = object_path(digest);
    if (fs::exists(path)) {
        return;
    }
    write_file_atomically(path, bytes);
    ++object_count_;
    stored_bytes_ += bytes.size();
}

std::optional<Bytes> DirectoryBackend::read(const Digest& digest) const {
    return read_file(object_path(digest));
}

void DirectoryBackend::put_ref(const std::string& name, const std::string& value) {
    refs_[name] = value;
    nlohmann::json j;
    j["refs"] = refs_;
    const std::string text = j.dump();
    write_file_atomically(root_ / "index.json", to_bytes(text));
}

} // namespace mlforge::store
