#include "package.hpp"

#include <fnmatch.h>

#include <fstream>
#include <iterator>

#include <mlforge/common/error.hpp>

namespace mlforge::cli {

namespace fs = std::filesystem;

namespace {

struct Pattern {
    std::string glob;
    bool anchored = false;  // contains '/'
    bool dir_only = false;
};

std::vector<Pattern> read_ignore(const fs::path& dir) {
    std::vector<Pattern> out;
    std::ifstream in(dir / kIgnoreFile);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        Pattern p;
        if (line.back() == '/') {
            p.dir_only = true;
            line.pop_back();
        }
        if (!line.empty() && line[0] == '/') {
            line.erase(0, 1);
            p.anchored = true;
        }
        p.anchored = p.anchored || line.find('/') != std::string::npos;
        p.glob = line;
        if (!p.glob.empty()) {
            out.push_back(std::move(p));
        }
    }
    return out;
}

bool matches(const Pattern& p, const std::string& prefix, const std::string& component, bool is_dir) {
    if (p.dir_only && !is_dir) {
        return false;
    }
    if (p.anchored) {
        return fnmatch(p.glob.c_str(), prefix.c_str(), FNM_PATHNAME) == 0;
    }
    return fnmatch(p.glob.c_str(), component.c_str(), 0) == 0;
}

/// Checks every ancestor directory and then the file itself.
bool ignored(const std::vector<Pattern>& patterns, const std::string& rel) {
    std::string prefix;
    std::size_t start = 0;
    while (true) {
        const auto slash = rel.find('/', start);
        const bool last = slash == std::string::npos;
        const auto component = rel.substr(start, last ? std::string::npos : slash - start);
        prefix = rel.substr(0, last ? std::string::npos : slash);
        for (const auto& p : patterns) {
            if (matches(p, prefix, component, !last)) {
                return true;
            }
        }
        if (last) {
            return false;
        }
        start = slash + 1;
    }
}

} // namespace

std::vector<store::ArchiveEntry> collect_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error(Errc::invalid_argument, "not a directory: " + dir.string());
    }
    const auto patterns = read_ignore(dir);
    std::vector<store::ArchiveEntry> entries;
    for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file() || it->is_symlink()) {
            continue;
        }
        const auto rel = fs::relative(it->path(), dir).generic_string();
        if (ignored(patterns, rel)) {
            continue;
        }
        std::ifstream in(it->path(), std::ios::binary);
        if (!in) {
            throw Error(Errc::invalid_argument, "cannot read " + it->path().string());
        }
        Bytes data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        entries.push_back({rel, std::move(data)});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return entries;
}

CodePackage package_code(const fs::path& dir) {
    auto entries = collect_files(dir);
    if (entries.empty()) {
        throw Error(Errc::empty_directory, "nothing to package in " + dir.string());
    }
    CodePackage pkg;
    pkg.files = entries.size();
    pkg.archive = store::write_archive(std::move(entries));
    pkg.digest = store::sha256(pkg.archive);
    return pkg;
}

} // namespace mlforge::cli
