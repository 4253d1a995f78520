#include <mlforge/blobstore/archive.hpp>

#include <algorithm>
#include <array>
#include <cstring>

#include <mlforge/common/error.hpp>

namespace mlforge::store {

namespace {

constexpr std::size_t kBlock = 512;

struct Header {
    std::array<char, kBlock> raw{};

    void put(std::size_t offset, std::size_t width, std::string_view text) {
        std::memcpy(raw.data() + offset, text.data(), std::min(width, text.size()));
    }

    // Octal, zero padded to width-1 digits, NUL terminated.
    void put_octal(std::size_t offset, std::size_t width, std::uint64_t value) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%0*llo", static_cast<int>(width - 1),
                      static_cast<unsigned long long>(value));
        std::memcpy(raw.data() + offset, buf, width - 1);
        raw[offset + width - 1] = '\0';
    }
};

std::uint64_t checksum(const char* block) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) {
        // The checksum field itself counts as spaces.
        sum += (i >= 148 && i < 156) ? static_cast<unsigned char>(' ')
                                     : static_cast<unsigned char>(block[i]);
    }
    return sum;
}

std::uint64_t parse_octal(const char* field, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
        char c = field[i];
        if (c == '\0' || c == ' ') {
            if (v != 0 || i > 0) break;
            continue;
        }
        if (c < '0' || c > '7') {
            throw Error(Errc::invalid_argument, "malformed octal field in archive header");
        }
        v = v * 8 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

std::string field_string(const char* field, std::size_t width) {
    return std::string(field, strnlen(field, width));
}

} // namespace

void validate_relative_path(const std::string& path) {
    if (path.empty() || path.front() == '/' || path.back() == '/') {
        throw Error(Errc::invalid_argument, "invalid path '" + path + "'");
    }
    for (const auto& part : split(path, '/')) {
        if (part.empty() || part == "." || part == "..") {
            throw Error(Errc::invalid_argument, "invalid path '" + path + "'");
        }
    }
}

Bytes write_archive(std::vector<ArchiveEntry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path < b.path; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].path == entries[i - 1].path) {
            throw Error(Errc::duplicate_path, "duplicate path '" + entries[i].path + "'");
        }
    }

    Bytes out;
    for (const auto& entry : entries) {
        validate_relative_path(entry.path);
        std::string name = entry.path;
        std::string prefix;
        if (name.size() > 100) {
            // Split at a '/' so that prefix <= 155 and name <= 100.
            const auto cut = name.rfind('/', 155);
            if (cut == std::string::npos || name.size() - cut - 1 > 100) {
                throw Error(Errc::invalid_argument, "path too long for ustar: " + entry.path);
            }
            prefix = name.substr(0, cut);
            name = name.substr(cut + 1);
        }

        Header h;
        h.put(0, 100, name);
        h.put_octal(100, 8, 0644);
        h.put_octal(108, 8, 0);
        h.put_octal(116, 8, 0);
        h.put_octal(124, 12, entry.data.size());
        h.put_octal(136, 12, 0);
        h.raw[156] = '0';
        h.put(257, 6, std::string_view("ustar\0", 6));
        h.put(263, 2, "00");
        h.put(345, 155, prefix);
        const auto sum = checksum(h.raw.data());
        char sum_buf[8];
        std::snprintf(sum_buf, sizeof(sum_buf), "%06llo", static_cast<unsigned long long>(sum));
        std::memcpy(h.raw.data() + 148, sum_buf, 6);
        h.raw[154] = '\0';
        h.raw[155] = ' ';

        out.insert(out.end(), h.raw.begin(), h.raw.end());
        out.insert(out.end(), entry.data.begin(), entry.data.end());
        const std::size_t pad = (kBlock - entry.data.size() % kBlock) % kBlock;
        out.insert(out.end(), pad, 0);
    }
    out.insert(out.end(), 2 * kBlock, 0);
    return out;
}

std::vector<ArchiveEntry> read_archive(std::span<const std::uint8_t> archive) {
    std::vector<ArchiveEntry> entries;
    std::size_t offset = 0;
    while (offset + kBlock <= archive.size()) {
        const char* block = reinterpret_cast<const char*>(archive.data() + offset);
        if (std::all_of(block, block + kBlock, [](char c) { return c == '\0'; })) {
            return entries;
        }
        if (parse_octal(block + 148, 8) != checksum(block)) {
            throw Error(Errc::invalid_argument, "archive header checksum mismatch");
        }
        const std::uint64_t size = parse_octal(block + 124, 12);
        std::string name = field_string(block, 100);
        std::string prefix = field_string(block + 345, 155);
        if (!prefix.empty()) {
            name = prefix + "/" + name;
        }
        const char type = block[156];
        offset += kBlock;
        if (offset + size > archive.size()) {
            throw Error(Errc::invalid_argument, "archive truncated in '" + name + "'");
        }
        if (type == '0' || type == '\0') {
            entries.push_back(ArchiveEntry{
                name, Bytes(archive.begin() + static_cast<std::ptrdiff_t>(offset),
                            archive.begin() + static_cast<std::ptrdiff_t>(offset + size))});
        }
        offset += (size + kBlock - 1) / kBlock * kBlock;
    }
    throw Error(Errc::invalid_argument, "archive missing end-of-archive marker");
}

} // namespace mlforge::store
