#include "tcr/certificates.hpp"

namespace tcr {

namespace {

void put_record(canonical_writer &w, const rv_record &r) {
    w.tag(message_tag::record_verify).u64(r.idx).put(r.val).put(r.root);
}

rv_record get_record(canonical_reader &r) {
    rv_record rec;
    rec.idx = r.u64();
    rec.val = r.get_digest();
    rec.root = r.get_digest();
    return rec;
}

} // namespace

bytes encode(const nu_body &b) {
    canonical_writer w;
    w.tag(message_tag::node_update).put(b.x).put(b.y).put(b.x_new).put(b.y_new);
    return w.take();
}

bytes encode(const rv_body &b) {
    canonical_writer w;
    put_record(w, b.record);
    if (b.absent) {
        put_record(w, *b.absent);
    }
    return w.take();
}

bytes encode(const ru_body &b) {
    canonical_writer w;
    w.tag(message_tag::record_update).u64(b.idx).put(b.val).put(b.root).put(b.val_new).put(b.root_new);
    return w.take();
}

bytes encode(const eq_body &b) {
    canonical_writer w;
    w.tag(message_tag::root_equivalence).put(b.root).put(b.root_new);
    return w.take();
}

bytes encode(const cr_body &b) {
    canonical_writer w;
    w.tag(message_tag::container_record).u64(b.idx).u64(b.ctr).u64(b.ver).put(b.alpha);
    return w.take();
}

bytes encode(const vr_body &b) {
    canonical_writer w;
    w.tag(message_tag::version_record).u64(b.idx).u64(b.ver).put(b.lambda);
    return w.take();
}

bytes encode_signed(const any_certificate &cert) {
    return std::visit(
        [](const auto &c) {
            bytes out = encode(c.body);
            out.insert(out.end(), c.rho.data.begin(), c.rho.data.end());
            return out;
        },
        cert);
}

any_certificate decode_signed(byte_view raw) {
    if (raw.size() < digest::size + 1) {
        throw decode_error{"certificate too short"};
    }
    const auto body_bytes = raw.first(raw.size() - digest::size);
    const auto rho = digest::from_bytes(raw.last(digest::size));
    canonical_reader r{body_bytes};
    const auto tag = r.tag();
    any_certificate out;
    switch (tag) {
    case message_tag::node_update: {
        nu_body b;
        b.x = r.get_digest();
        b.y = r.get_digest();
        b.x_new = r.get_digest();
        b.y_new = r.get_digest();
        out = nu_cert{b, rho};
        break;
    }
    case message_tag::record_verify: {
        rv_body b;
        b.record = get_record(r);
        if (!r.done()) {
            if (r.tag() != message_tag::record_verify) {
                throw decode_error{"malformed paired record certificate"};
            }
            b.absent = get_record(r);
        }
        out = rv_cert{b, rho};
        break;
    }
    case message_tag::record_update: {
        ru_body b;
        b.idx = r.u64();
        b.val = r.get_digest();
        b.root = r.get_digest();
        b.val_new = r.get_digest();
        b.root_new = r.get_digest();
        out = ru_cert{b, rho};
        break;
    }
    case message_tag::root_equivalence: {
        eq_body b;
        b.root = r.get_digest();
        b.root_new = r.get_digest();
        out = eq_cert{b, rho};
        break;
    }
    case message_tag::container_record: {
        cr_body b;
        b.idx = r.u64();
        b.ctr = r.u64();
        b.ver = r.u64();
        b.alpha = r.get_digest();
        out = cr_cert{b, rho};
        break;
    }
    case message_tag::version_record: {
        vr_body b;
        b.idx = r.u64();
        b.ver = r.u64();
        b.lambda = r.get_digest();
        out = vr_cert{b, rho};
        break;
    }
    default:
        throw decode_error{"unknown certificate kind"};
    }
    r.expect_done();
    return out;
}

bytes encode_request(request_type type, record_index idx, std::uint64_t c_ctr, const digest &v) {
    canonical_writer w;
    w.tag(message_tag::request).byte(static_cast<std::uint8_t>(type)).u64(idx).u64(c_ctr).put(v);
    return w.take();
}

bytes encode_ack(request_type type, record_index idx, std::uint64_t c_ctr, const digest &v) {
    canonical_writer w;
    w.tag(message_tag::acknowledgement).byte(static_cast<std::uint8_t>(type)).u64(idx).u64(c_ctr).put(v).u64(0);
    return w.take();
}

bytes encode_secret_pad(record_index idx, std::uint64_t c_ctr) {
    canonical_writer w;
    w.u64(idx).u64(c_ctr);
    return w.take();
}

bytes encode_tag_input(const denial_response &r) {
    canonical_writer w;
    w.tag(message_tag::denial).u64(r.idx).put(r.delta);
    return w.take();
}

bytes encode_tag_input(const info_response &r) {
    canonical_writer w;
    w.tag(message_tag::verified_info)
        .u64(r.idx)
        .u64(r.c_ctr)
        .u64(r.c_ver)
        .u64(r.requested_ver)
        .put(r.alpha)
        .put(r.lambda)
        .put(r.delta);
    return w.take();
}

} // namespace tcr
