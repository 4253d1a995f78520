#include <mlforge/blobstore/digest.hpp>

#include <openssl/evp.h>

#include <mlforge/common/error.hpp>
#include <mlforge/common/text.hpp>

namespace mlforge::store {

std::string Digest::hex() const { return hex_encode(bytes); }

Digest Digest::from_hex(std::string_view text) {
    auto raw = hex_decode(text);
    if (!raw || raw->size() != 32) {
        throw Error(Errc::invalid_argument, "malformed digest: " + std::string(text));
    }
    Digest d;
    std::copy(raw->begin(), raw->end(), d.bytes.begin());
    return d;
}

std::uint64_t Digest::prefix64() const noexcept {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | bytes[static_cast<std::size_t>(i)];
    }
    return v;
}

Digest sha256(std::span<const std::uint8_t> data) {
    Digest d;
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), d.bytes.data(), &len, EVP_sha256(), nullptr);
    return d;
}

Digest sha256(std::string_view data) {
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

} // namespace mlforge::store
