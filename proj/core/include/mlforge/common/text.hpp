#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlforge {

using Bytes = std::vector<std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }
inline std::string to_string(std::span<const std::uint8_t> b) { return std::string(b.begin(), b.end()); }

/// Shortest representation that parses back to the same double.
std::string format_real(double value);

/// Parses a full string as a finite real; nullopt if anything is left over.
std::optional<double> parse_real(std::string_view text);

std::string hex_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> hex_decode(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> base64_decode(std::string_view text);

/// Lays out rows as columns separated by two spaces. Every row must have the
/// same number of cells as the header. Trailing whitespace is trimmed.
std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> split(std::string_view text, char sep);

} // namespace mlforge
