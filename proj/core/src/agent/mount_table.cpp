#include <mlforge/agent/mount_table.hpp>

#include <mlforge/common/error.hpp>

namespace mlforge::agent {

MountTable::MountTable(const store::DatasetCatalog& catalog, std::string root)
    : catalog_(catalog), root_(std::move(root)) {}

std::string MountTable::mount(const store::DatasetRef& dataset, const std::string& session_id) {
    // Resolve first so "mnist" and "mnist@<latest>" share an entry.
    const auto ref = catalog_.resolve(dataset);
    std::lock_guard lock(mutex_);
    auto it = entries_.find(ref);
    if (it == entries_.end()) {
        Entry entry{root_ + "/" + ref.to_string(), {}, catalog_.fetch_files(ref)};
        ++fetches_;
        it = entries_.emplace(ref, std::move(entry)).first;
    }
    it->second.holders.insert(session_id);
    return it->second.local_path;
}

void MountTable::unmount(const store::DatasetRef& dataset, const std::string& session_id) {
    const auto ref = catalog_.resolve(dataset);
    std::lock_guard lock(mutex_);
    auto it = entries_.find(ref);
    if (it == entries_.end()) {
        return;
    }
    it->second.holders.erase(session_id);
    if (it->second.holders.empty()) {
        entries_.erase(it);
    }
}

void MountTable::release(const std::string& session_id) {
    std::lock_guard lock(mutex_);
    std::erase_if(entries_, [&](auto& kv) {
        kv.second.holders.erase(session_id);
        return kv.second.holders.empty();
    });
}

void MountTable::clear() {
    std::lock_guard lock(mutex_);
    entries_.clear();
}

std::size_t MountTable::refcount(const store::DatasetRef& dataset) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(dataset);
    return it == entries_.end() ? 0 : it->second.holders.size();
}

bool MountTable::mounted(const store::DatasetRef& dataset) const { return refcount(dataset) > 0; }

std::uint64_t MountTable::fetch_count() const {
    std::lock_guard lock(mutex_);
    return fetches_;
}

std::vector<store::DatasetFile> MountTable::files(const store::DatasetRef& dataset) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(dataset);
    if (it == entries_.end()) {
        return {};
    }
    return it->second.files;
}

} // namespace mlforge::agent
