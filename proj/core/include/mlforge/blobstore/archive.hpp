#pragma once

#include <span>
#include <string>
#include <vector>

#include <mlforge/common/text.hpp>

namespace mlforge::store {

struct ArchiveEntry {
    std::string path;
    Bytes data;

    bool operator==(const ArchiveEntry&) const = default;
};

/// Deterministic ustar archive: entries sorted by path, mode 0644, uid/gid 0,
/// mtime 0, empty owner names. Equal entry sets produce identical bytes.
/// Throws Error(duplicate_path) on repeated paths and Error(invalid_argument)
/// on paths that are empty, absolute, contain "..", or do not fit ustar.
Bytes write_archive(std::vector<ArchiveEntry> entries);

/// Reads regular-file entries back. Throws Error(invalid_argument) on a
/// malformed archive.
std::vector<ArchiveEntry> read_archive(std::span<const std::uint8_t> archive);

/// Shared path validation for archives and dataset manifests.
void validate_relative_path(const std::string& path);

} // namespace mlforge::store
