#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tcr {

using bytes = std::vector<std::uint8_t>;
using byte_view = std::span<const std::uint8_t>;

/// 32-byte hash value. The all-zero digest is the distinguished empty-node value.
struct digest {
    static constexpr std::size_t size = 32;
    std::array<std::uint8_t, size> data{};

    static digest zero() noexcept { return {}; }
    static digest from_bytes(byte_view raw);
    static digest from_hex(std::string_view hex);

    bool is_zero() const noexcept;
    std::string hex() const;
    byte_view view() const noexcept { return {data.data(), data.size()}; }

    friend bool operator==(const digest &, const digest &) = default;
    friend auto operator<=>(const digest &, const digest &) = default;
};

/// Bytewise XOR, used for the secret pads.
digest operator^(const digest &a, const digest &b) noexcept;

/// SHA-256.
digest hash(byte_view msg);
digest hash(const digest &a, const digest &b);

/// HMAC-SHA-256 with an arbitrary-length key.
digest hmac_raw(byte_view key, byte_view msg);
/// HMAC-SHA-256 keyed by a 32-byte secret.
digest hmac(byte_view msg, const digest &key);
/// Constant-time comparison of a computed tag against a presented one.
bool tag_equal(const digest &a, const digest &b) noexcept;
bool hmac_verify(byte_view msg, const digest &key, const digest &tag);

/// Cryptographically random bytes from the system generator.
digest random_digest();
void random_fill(std::span<std::uint8_t> out);

std::string to_hex(byte_view raw);
bytes from_hex(std::string_view hex);

} // namespace tcr
