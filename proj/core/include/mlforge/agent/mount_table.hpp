#pragma once

#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <mlforge/blobstore/dataset_catalog.hpp>

namespace mlforge::agent {

/// Datasets materialized on this host. Sessions on the same host share one
/// copy; the copy is dropped when its last holder unmounts.
class MountTable {
public:
    MountTable(const store::DatasetCatalog& catalog, std::string root = "/mnt/datasets");

    /// Returns the shared local path. Throws Error(unknown_dataset).
    std::string mount(const store::DatasetRef& dataset, const std::string& session_id);
    void unmount(const store::DatasetRef& dataset, const std::string& session_id);
    /// Unmounts everything held by the session.
    void release(const std::string& session_id);
    void clear();

    std::size_t refcount(const store::DatasetRef& dataset) const;
    bool mounted(const store::DatasetRef& dataset) const;
    /// Number of materializations (fetches from the store) performed.
    std::uint64_t fetch_count() const;
    std::vector<store::DatasetFile> files(const store::DatasetRef& dataset) const;

private:
    struct Entry {
        std::string local_path;
        std::set<std::string> holders;
        std::vector<store::DatasetFile> files;
    };

    const store::DatasetCatalog& catalog_;
    std::string root_;
    mutable std::mutex mutex_;
    std::map<store::DatasetRef, Entry> entries_;
    std::uint64_t fetches_ = 0;
};

} // namespace mlforge::agent
