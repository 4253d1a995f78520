#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <mlforge/blobstore/archive.hpp>
#include <mlforge/blobstore/digest.hpp>

namespace mlforge::cli {

inline constexpr const char* kIgnoreFile = ".mlforgeignore";

/// Regular files under `dir`, sorted by relative path, minus anything matched
/// by `dir/.mlforgeignore`. Patterns are globs, one per line; '#' starts a
/// comment. A pattern without '/' matches any path component, one with '/'
/// matches the relative path from the root, and a trailing '/' restricts it
/// to directories.
std::vector<store::ArchiveEntry> collect_files(const std::filesystem::path& dir);

struct CodePackage {
    Bytes archive;
    store::Digest digest;
    std::size_t files = 0;
};

/// Deterministic archive of `dir`: equal trees give equal bytes regardless of
/// mtimes or location. Throws Error(empty_directory) when nothing is left.
CodePackage package_code(const std::filesystem::path& dir);

} // namespace mlforge::cli
