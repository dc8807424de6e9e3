#pragma once

#include "tcr/canonical.hpp"
#include "tcr/iomt.hpp"

#include <optional>
#include <variant>

namespace tcr {

// Certificate memoranda. Each is MAC'd by the module as rho = HMAC(canonical(body), chi).

/// Node X under root Y; replacing X by X' moves the root to Y'.
struct nu_body {
    digest x, y, x_new, y_new;
    friend bool operator==(const nu_body &, const nu_body &) = default;
};

/// Record (IDX, VAL) exists under root.
struct rv_record {
    record_index idx = 0;
    digest val;
    digest root;
    friend bool operator==(const rv_record &, const rv_record &) = default;
};

/// A record verification, optionally paired with an enclosure-derived
/// non-existence record (VAL = 0) under the same root and the same rho.
struct rv_body {
    rv_record record;
    std::optional<rv_record> absent;

    /// The record the certificate speaks about: the enclosed index when paired.
    const rv_record &subject() const noexcept { return absent ? *absent : record; }
    friend bool operator==(const rv_body &, const rv_body &) = default;
};

/// Changing leaf IDX's value VAL -> VAL' moves the root Y -> Y'.
struct ru_body {
    record_index idx = 0;
    digest val, root, val_new, root_new;
    friend bool operator==(const ru_body &, const ru_body &) = default;
};

/// Roots that differ by exactly one placeholder.
struct eq_body {
    digest root, root_new;
    friend bool operator==(const eq_body &, const eq_body &) = default;
};

/// Container record [IDX, C_CTR, C_VER, C_alpha].
struct cr_body {
    record_index idx = 0;
    std::uint64_t ctr = 0;
    std::uint64_t ver = 0;
    digest alpha;
    friend bool operator==(const cr_body &, const cr_body &) = default;
};

/// Version record [IDX, VER, lambda].
struct vr_body {
    record_index idx = 0;
    std::uint64_t ver = 0;
    digest lambda;
    friend bool operator==(const vr_body &, const vr_body &) = default;
};

template <class Body>
struct certificate {
    Body body;
    digest rho;
    friend bool operator==(const certificate &, const certificate &) = default;
};

using nu_cert = certificate<nu_body>;
using rv_cert = certificate<rv_body>;
using ru_cert = certificate<ru_body>;
using eq_cert = certificate<eq_body>;
using cr_cert = certificate<cr_body>;
using vr_cert = certificate<vr_body>;

using any_certificate = std::variant<nu_cert, rv_cert, ru_cert, eq_cert, cr_cert, vr_cert>;

bytes encode(const nu_body &b);
bytes encode(const rv_body &b);
bytes encode(const ru_body &b);
bytes encode(const eq_body &b);
bytes encode(const cr_body &b);
bytes encode(const vr_body &b);

/// canonical(body) || rho. This is also the wire form.
bytes encode_signed(const any_certificate &cert);
template <class Body>
bytes encode_signed(const certificate<Body> &cert) {
    return encode_signed(any_certificate{cert});
}
/// Throws decode_error on malformed input.
any_certificate decode_signed(byte_view raw);

template <class Cert>
Cert decode_signed_as(byte_view raw) {
    auto any = decode_signed(raw);
    if (auto *c = std::get_if<Cert>(&any)) {
        return *c;
    }
    throw decode_error{"unexpected certificate kind"};
}

// ---------------------------------------------------------------------------
// Requests and module responses.

enum class request_type : std::uint8_t { container = 1, acl = 2 };

/// [type, IDX, C_CTR, v] signed by the requesting user as mu.
struct request_envelope {
    request_type type = request_type::container;
    record_index idx = 0;
    std::uint64_t c_ctr = 0;
    digest v;
    record_index user = 0;
    digest mu;

    friend bool operator==(const request_envelope &, const request_envelope &) = default;
};

bytes encode_request(request_type type, record_index idx, std::uint64_t c_ctr, const digest &v);
bytes encode_ack(request_type type, record_index idx, std::uint64_t c_ctr, const digest &v);
/// Message whose HMAC under K_i pads the user-to-module secret transfer.
bytes encode_secret_pad(record_index idx, std::uint64_t c_ctr);

/// {IDX, delta}_{K_i}. Emitted both for absent containers and for zero access.
struct denial_response {
    record_index idx = 0;
    digest delta;
    digest tag;
    friend bool operator==(const denial_response &, const denial_response &) = default;
};

/// {IDX, C_CTR, C_VER, requested VER, C_alpha, lambda, delta}_{K_i}.
struct info_response {
    record_index idx = 0;
    std::uint64_t c_ctr = 0;
    std::uint64_t c_ver = 0;
    std::uint64_t requested_ver = 0;
    digest alpha;
    digest lambda;
    digest delta;
    digest tag;
    friend bool operator==(const info_response &, const info_response &) = default;
};

using verify_response = std::variant<denial_response, info_response>;

bytes encode_tag_input(const denial_response &r);
bytes encode_tag_input(const info_response &r);

} // namespace tcr
