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

enum class Direction { maximize, minimize };

std::string_view to_string(Direction d) noexcept;
/// Accepts "maximize"/"max" and "minimize"/"min".
Direction parse_direction(std::string_view text);

/// True if `candidate` is strictly better than `incumbent` under `d`.
inline bool improves(Direction d, double candidate, double incumbent) {
    return d == Direction::maximize ? candidate > incumbent : candidate < incumbent;
}

struct BoardConfig {
    std::string metric_name;
    Direction direction = Direction::maximize;

    bool operator==(const BoardConfig&) const = default;
};

struct DatasetRef {
    std::string name;
    int version = 0;

    /// "mnist@2"
    std::string to_string() const;
    /// "mnist@2" or "mnist" (version 0 = unresolved, meaning latest).
    static DatasetRef parse(std::string_view text);

    auto operator<=>(const DatasetRef&) const = default;
};

struct ManifestEntry {
    std::string path;
    Digest digest;
    std::uint64_t size = 0;

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetVersion {
    std::string name;
    int version = 0;
    std::vector<ManifestEntry> manifest;
    Timestamp created_at;
    std::optional<BoardConfig> board_config;

    DatasetRef ref() const { return {name, version}; }
    std::uint64_t total_bytes() const;
    bool operator==(const DatasetVersion&) const = default;
};

struct DatasetFile {
    std::string path;
    Bytes data;
};

nlohmann::json to_json(const DatasetVersion& v);

/// Immutable, versioned datasets. Each version's manifest is fixed at push
/// time; only the board configuration may be attached later.
class DatasetCatalog {
public:
    DatasetCatalog(BlobStore& blobs, const Clock& clock);

    /// Throws Error(empty_dataset) with no files, Error(duplicate_path) on a
    /// repeated path, Error(invalid_argument) on a bad name or path.
    DatasetVersion push(const std::string& name, std::vector<DatasetFile> files,
                        std::optional<BoardConfig> board_config = std::nullopt);

    /// Sorted by (name, version).
    std::vector<DatasetVersion> list(const std::optional<std::string>& name_filter = {}) const;

    /// Resolves version 0 to the latest version. Throws Error(unknown_dataset).
    DatasetRef resolve(const DatasetRef& ref) const;
    DatasetVersion get(const DatasetRef& ref) const;
    bool exists(const DatasetRef& ref) const;

    void set_board_config(const DatasetRef& ref, BoardConfig config);

    /// Fetches every file of a version from the store.
    std::vector<DatasetFile> fetch_files(const DatasetRef& ref) const;

private:
    void persist(const DatasetVersion& v);
    const DatasetVersion& find(const DatasetRef& ref) const;
    DatasetVersion& find(const DatasetRef& ref);

    BlobStore& blobs_;
    const Clock& clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<DatasetVersion>> versions_;
};

} // namespace mlforge::store
