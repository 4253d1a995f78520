#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace mlforge::store {

/// SHA-256 content digest. Rendered as lowercase hex in every textual interface.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const;
    /// Throws Error(invalid_argument) unless `text` is 64 hex characters.
    static Digest from_hex(std::string_view text);

    /// First eight bytes read as a big-endian unsigned integer.
    std::uint64_t prefix64() const noexcept;

    auto operator<=>(const Digest&) const = default;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

} // namespace mlforge::store
