#pragma once

#include "tcr/digest.hpp"

#include <cstdint>
#include <stdexcept>

namespace tcr {

/// Leading type byte of every certificate, request and module response encoding.
enum class message_tag : std::uint8_t {
    node_update = 0x01,
    record_verify = 0x02,
    record_update = 0x03,
    root_equivalence = 0x04,
    container_record = 0x05,
    version_record = 0x06,
    request = 0x20,
    acknowledgement = 0x21,
    denial = 0x30,
    verified_info = 0x31,
};

struct decode_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic binary encoding used for every hash and HMAC input.
/// Integers are unsigned 64-bit big-endian, digests raw 32 bytes, enumerations one byte.
class canonical_writer {
public:
    canonical_writer &tag(message_tag t) { return byte(static_cast<std::uint8_t>(t)); }
    canonical_writer &byte(std::uint8_t b);
    canonical_writer &u64(std::uint64_t v);
    canonical_writer &put(const digest &d);

    const bytes &data() const noexcept { return buf_; }
    byte_view view() const noexcept { return buf_; }
    bytes take() noexcept { return std::move(buf_); }

private:
    bytes buf_;
};

class canonical_reader {
public:
    explicit canonical_reader(byte_view in) : in_{in} {}

    message_tag tag() { return static_cast<message_tag>(byte()); }
    std::uint8_t byte();
    std::uint64_t u64();
    digest get_digest();

    bool done() const noexcept { return pos_ == in_.size(); }
    void expect_done() const;

private:
    void need(std::size_t n) const;

    byte_view in_;
    std::size_t pos_ = 0;
};

} // namespace tcr
