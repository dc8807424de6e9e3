#include "tcr/digest.hpp"

#include <openssl/core_names.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <stdexcept>

namespace tcr {

namespace {

// Implicit algorithm fetches dominate the cost of hashing 64-byte inputs under
// OpenSSL 3, so the algorithm objects are fetched once and contexts reused per thread.
const EVP_MD *sha256_md() {
    static EVP_MD *md = [] {
        EVP_MD *m = EVP_MD_fetch(nullptr, "SHA256", nullptr);
        if (m == nullptr) {
            throw std::runtime_error{"SHA256 unavailable"};
        }
        return m;
    }();
    return md;
}

EVP_MAC *hmac_mac() {
    static EVP_MAC *mac = [] {
        EVP_MAC *m = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
        if (m == nullptr) {
            throw std::runtime_error{"HMAC unavailable"};
        }
        return m;
    }();
    return mac;
}

struct md_ctx_holder {
    EVP_MD_CTX *ctx = EVP_MD_CTX_new();
    ~md_ctx_holder() { EVP_MD_CTX_free(ctx); }
};

struct mac_ctx_holder {
    EVP_MAC_CTX *ctx = EVP_MAC_CTX_new(hmac_mac());
    ~mac_ctx_holder() { EVP_MAC_CTX_free(ctx); }
};

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

digest digest::from_bytes(byte_view raw) {
    if (raw.size() != size) {
        throw std::invalid_argument{"digest must be exactly 32 bytes"};
    }
    digest d;
    std::copy(raw.begin(), raw.end(), d.data.begin());
    return d;
}

digest digest::from_hex(std::string_view hex) {
    return from_bytes(tcr::from_hex(hex));
}

bool digest::is_zero() const noexcept {
    return std::all_of(data.begin(), data.end(), [](std::uint8_t b) { return b == 0; });
}

std::string digest::hex() const {
    return to_hex(view());
}

digest operator^(const digest &a, const digest &b) noexcept {
    digest out;
    for (std::size_t i = 0; i < digest::size; ++i) {
        out.data[i] = a.data[i] ^ b.data[i];
    }
    return out;
}

digest hash(byte_view msg) {
    thread_local md_ctx_holder holder;
    digest out;
    unsigned int len = 0;
    if (EVP_DigestInit_ex(holder.ctx, sha256_md(), nullptr) != 1 ||
        EVP_DigestUpdate(holder.ctx, msg.data(), msg.size()) != 1 ||
        EVP_DigestFinal_ex(holder.ctx, out.data.data(), &len) != 1 || len != digest::size) {
        throw std::runtime_error{"SHA256 failed"};
    }
    return out;
}

digest hash(const digest &a, const digest &b) {
    std::array<std::uint8_t, 2 * digest::size> buf;
    std::copy(a.data.begin(), a.data.end(), buf.begin());
    std::copy(b.data.begin(), b.data.end(), buf.begin() + digest::size);
    return hash(byte_view{buf});
}

digest hmac_raw(byte_view key, byte_view msg) {
    thread_local mac_ctx_holder holder;
    static char digest_name[] = "SHA256";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest_name, 0),
        OSSL_PARAM_construct_end(),
    };
    digest out;
    std::size_t len = 0;
    if (EVP_MAC_init(holder.ctx, key.data(), key.size(), params) != 1 ||
        EVP_MAC_update(holder.ctx, msg.data(), msg.size()) != 1 ||
        EVP_MAC_final(holder.ctx, out.data.data(), &len, out.data.size()) != 1 || len != digest::size) {
        throw std::runtime_error{"HMAC-SHA256 failed"};
    }
    return out;
}

digest hmac(byte_view msg, const digest &key) {
    return hmac_raw(key.view(), msg);
}

bool tag_equal(const digest &a, const digest &b) noexcept {
    return CRYPTO_memcmp(a.data.data(), b.data.data(), digest::size) == 0;
}

bool hmac_verify(byte_view msg, const digest &key, const digest &tag) {
    return tag_equal(hmac(msg, key), tag);
}

void random_fill(std::span<std::uint8_t> out) {
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
        throw std::runtime_error{"system RNG failure"};
    }
}

digest random_digest() {
    digest d;
    random_fill(d.data);
    return d;
}

std::string to_hex(byte_view raw) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(raw.size() * 2);
    for (auto b : raw) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw std::invalid_argument{"hex string has odd length"};
    }
    bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_nibble(hex[2 * i]);
        const int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) {
            throw std::invalid_argument{"invalid hex digit"};
        }
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

} // namespace tcr
