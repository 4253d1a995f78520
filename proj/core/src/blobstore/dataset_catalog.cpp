#include <mlforge/blobstore/dataset_catalog.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <utility>

#include <mlforge/blobstore/archive.hpp>
#include <mlforge/common/error.hpp>

namespace mlforge::store {

namespace {

constexpr std::string_view kRefPrefix = "dataset/";

void validate_name(const std::string& name) {
    if (name.empty() || name.size() > 128) {
        throw Error(Errc::invalid_argument, "dataset name must be 1-128 characters");
    }
    for (char c : name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
            throw Error(Errc::invalid_argument, "invalid character in dataset name '" + name + "'");
        }
    }
}

std::string version_ref(const std::string& name, int version) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08d", version);
    return std::string(kRefPrefix) + name + "/" + buf;
}

DatasetVersion from_json(const nlohmann::json& j) {
    DatasetVersion v;
    v.name = j.at("name").get<std::string>();
    v.version = j.at("version").get<int>();
    v.created_at = from_millis(j.at("created_at_ms").get<std::int64_t>());
    for (const auto& e : j.at("manifest")) {
        v.manifest.push_back(ManifestEntry{e.at("path").get<std::string>(),
                                           Digest::from_hex(e.at("digest").get<std::string>()),
                                           e.at("size").get<std::uint64_t>()});
    }
    if (j.contains("board") && !j.at("board").is_null()) {
        v.board_config = BoardConfig{j.at("board").at("metric").get<std::string>(),
                                     parse_direction(j.at("board").at("direction").get<std::string>())};
    }
    return v;
}

} // namespace

std::string_view to_string(Direction d) noexcept {
    return d == Direction::maximize ? "maximize" : "minimize";
}

Direction parse_direction(std::string_view text) {
    if (text == "maximize" || text == "max") return Direction::maximize;
    if (text == "minimize" || text == "min") return Direction::minimize;
    throw Error(Errc::invalid_argument, "direction must be maximize or minimize");
}

std::string DatasetRef::to_string() const { return name + "@" + std::to_string(version); }

DatasetRef DatasetRef::parse(std::string_view text) {
    auto at = text.rfind('@');
    if (at == std::string_view::npos) {
        return DatasetRef{std::string(text), 0};
    }
    int version = 0;
    auto digits = text.substr(at + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), version);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || version < 1) {
        throw Error(Errc::invalid_argument, "bad dataset version in '" + std::string(text) + "'");
    }
    return DatasetRef{std::string(text.substr(0, at)), version};
}

std::uint64_t DatasetVersion::total_bytes() const {
    std::uint64_t total = 0;
    for (const auto& e : manifest) total += e.size;
    return total;
}

nlohmann::json to_json(const DatasetVersion& v) {
    nlohmann::json j;
    j["name"] = v.name;
    j["version"] = v.version;
    j["created_at"] = format_timestamp(v.created_at);
    j["created_at_ms"] = to_millis(v.created_at);
    auto manifest = nlohmann::json::array();
    for (const auto& e : v.manifest) {
        manifest.push_back({{"path", e.path}, {"digest", e.digest.hex()}, {"size", e.size}});
    }
    j["manifest"] = std::move(manifest);
    if (v.board_config) {
        j["board"] = {{"metric", v.board_config->metric_name},
                      {"direction", std::string(to_string(v.board_config->direction))}};
    } else {
        j["board"] = nullptr;
    }
    return j;
}

DatasetCatalog::DatasetCatalog(BlobStore& blobs, const Clock& clock) : blobs_(blobs), clock_(clock) {
    for (const auto& [name, digest] : blobs_.refs_with_prefix(std::string(kRefPrefix))) {
        const auto bytes = blobs_.get_blob(digest);
        auto v = from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
        versions_[v.name].push_back(std::move(v));
    }
}

void DatasetCatalog::persist(const DatasetVersion& v) {
    const auto digest = blobs_.put_blob(to_json(v).dump());
    blobs_.set_ref(version_ref(v.name, v.version), digest);
}

DatasetVersion DatasetCatalog::push(const std::string& name, std::vector<DatasetFile> files,
                                    std::optional<BoardConfig> board_config) {
    validate_name(name);
    if (files.empty()) {
        throw Error(Errc::empty_dataset, "dataset '" + name + "' has no files");
    }
    std::set<std::string> seen;
    for (const auto& f : files) {
        validate_relative_path(f.path);
        if (!seen.insert(f.path).second) {
            throw Error(Errc::duplicate_path, "duplicate path '" + f.path + "' in dataset '" + name + "'");
        }
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });

    DatasetVersion v;
    v.name = name;
    v.created_at = clock_.now();
    v.board_config = std::move(board_config);
    for (const auto& f : files) {
        v.manifest.push_back(ManifestEntry{f.path, blobs_.put_blob(f.data), f.data.size()});
    }

    std::lock_guard lock(mutex_);
    auto& list = versions_[name];
    v.version = static_cast<int>(list.size()) + 1;
    persist(v);
    list.push_back(v);
    return v;
}

std::vector<DatasetVersion> DatasetCatalog::list(const std::optional<std::string>& name_filter) const {
    std::lock_guard lock(mutex_);
    std::vector<DatasetVersion> out;
    for (const auto& [name, list] : versions_) {
        if (name_filter && *name_filter != name) {
            continue;
        }
        out.insert(out.end(), list.begin(), list.end());
    }
    return out;
}

const DatasetVersion& DatasetCatalog::find(const DatasetRef& ref) const {
    auto it = versions_.find(ref.name);
    if (it == versions_.end() || it->second.empty()) {
        throw Error(Errc::unknown_dataset, "unknown dataset '" + ref.name + "'");
    }
    if (ref.version == 0) {
        return it->second.back();
    }
    if (ref.version < 0 || static_cast<std::size_t>(ref.version) > it->second.size()) {
        throw Error(Errc::unknown_dataset, "unknown dataset '" + ref.to_string() + "'");
    }
    return it->second[static_cast<std::size_t>(ref.version) - 1];
}

DatasetVersion& DatasetCatalog::find(const DatasetRef& ref) {
    return const_cast<DatasetVersion&>(std::as_const(*this).find(ref));
}

DatasetRef DatasetCatalog::resolve(const DatasetRef& ref) const {
    std::lock_guard lock(mutex_);
    return find(ref).ref();
}

DatasetVersion DatasetCatalog::get(const DatasetRef& ref) const {
    std::lock_guard lock(mutex_);
    return find(ref);
}

bool DatasetCatalog::exists(const DatasetRef& ref) const {
    std::lock_guard lock(mutex_);
    try {
        find(ref);
        return true;
    } catch (const Error&) {
        return false;
    }
}

void DatasetCatalog::set_board_config(const DatasetRef& ref, BoardConfig config) {
    std::lock_guard lock(mutex_);
    auto& v = find(ref);
    v.board_config = std::move(config);
    persist(v);
}

std::vector<DatasetFile> DatasetCatalog::fetch_files(const DatasetRef& ref) const {
    const auto v = get(ref);
    std::vector<DatasetFile> files;
    files.reserve(v.manifest.size());
    for (const auto& e : v.manifest) {
        files.push_back(DatasetFile{e.path, blobs_.get_blob(e.digest)});
    }
    return files;
}

} // namespace mlforge::store
