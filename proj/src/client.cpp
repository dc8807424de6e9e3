#include "tcr/client.hpp"

#include <fstream>

namespace tcr {

using wire::json;

digest read_key_file(const std::filesystem::path &path) {
    std::ifstream in{path};
    if (!in) {
        throw std::runtime_error{"cannot read key file " + path.string()};
    }
    std::string text;
    in >> text;
    return digest::from_hex(text);
}

void write_key_file(const std::filesystem::path &path, const digest &key) {
    std::ofstream out{path, std::ios::trunc};
    out << key.hex() << '\n';
    if (!out) {
        throw std::runtime_error{"cannot write key file " + path.string()};
    }
}

digest sign_request(const credential &c, request_type type, record_index idx, std::uint64_t c_ctr, const digest &v) {
    return hmac(encode_request(type, idx, c_ctr, v), c.key);
}

bool verify_ack(const credential &c, request_type type, record_index idx, std::uint64_t c_ctr, const digest &v,
                const digest &mu_ack) {
    return hmac_verify(encode_ack(type, idx, c_ctr, v), c.key, mu_ack);
}

wrapped_secret wrap_secret(const credential &c, const digest &sigma, record_index idx, std::uint64_t c_ctr) {
    return {sigma ^ hmac(encode_secret_pad(idx, c_ctr), c.key), secret_commitment(idx, sigma)};
}

std::optional<digest> unwrap_secret(const credential &c, const digest &sigma_u, const digest &mu_cs,
                                    record_index idx) {
    const digest sigma = sigma_u ^ secret_pad(mu_cs, c.key);
    if (!tag_equal(secret_commitment(idx, sigma), mu_cs)) {
        return std::nullopt;
    }
    return sigma;
}

verdict verify_info(const credential &c, const verify_response &r, const digest &delta_sent, record_index idx,
                    std::uint64_t requested_ver) {
    if (const auto *d = std::get_if<denial_response>(&r)) {
        if (!hmac_verify(encode_tag_input(*d), c.key, d->tag) || d->delta != delta_sent || d->idx != idx) {
            return verdict::invalid;
        }
        return verdict::denial;
    }
    const auto &i = std::get<info_response>(r);
    if (!hmac_verify(encode_tag_input(i), c.key, i.tag) || i.delta != delta_sent || i.idx != idx) {
        return verdict::invalid;
    }
    const std::uint64_t expected = requested_ver == 0 ? i.c_ver : requested_ver;
    if (i.requested_ver != expected || i.requested_ver > i.c_ver) {
        return verdict::invalid;
    }
    return verdict::verified;
}

// ---------------------------------------------------------------------------

json tcp_transport::call(const json &msg) {
    stream_.write_line(msg.dump());
    auto line = stream_.read_line();
    if (!line) {
        throw socket_error{"server closed the connection"};
    }
    return json::parse(*line);
}

json local_transport::call(const json &msg) {
    const auto request = msg.dump();
    const auto response = handler_->handle_line(request, true);
    if (transcript_) {
        transcript_->push_back(request);
        transcript_->push_back(response);
    }
    return json::parse(response);
}

// ---------------------------------------------------------------------------

client::reply client::call(const std::string &op, json payload) {
    const auto id = std::to_string(next_id_++);
    const json response = t_->call(wire::message(op, id, std::move(payload)));
    if (response.value("request_id", std::string{}) != id || !response.contains("payload")) {
        throw wire::wire_error{"response does not match request"};
    }
    const auto &p = response.at("payload");
    return {status_from_string(p.value("status", std::string{"protocol_error"})), p};
}

exit_code client::fail(exit_code code, std::string why) {
    error_ = std::move(why);
    return code;
}

exit_code client::from_status(status st) {
    switch (st) {
    case status::rejected:
        return fail(exit_code::rejected, "request rejected: no module certification");
    case status::denial:
        return fail(exit_code::denial, "access denied");
    default:
        return fail(exit_code::protocol, "protocol error");
    }
}

info_result client::query(record_index idx, std::uint64_t ver, int phase) {
    const digest delta = random_digest();
    const auto r = call("INFO", json{{"idx", idx}, {"ver", ver}, {"delta", delta.hex()}, {"user", cred_.user},
                                     {"phase", phase}});
    if (r.st != status::ok && r.st != status::denial) {
        return {from_status(r.st), std::nullopt};
    }
    if (!r.payload.contains("response")) {
        return {fail(exit_code::invalid, "response carries no proof"), std::nullopt};
    }
    const auto response = wire::response_from(r.payload.at("response"));
    switch (verify_info(cred_, response, delta, idx, ver)) {
    case verdict::verified:
        if (r.st != status::ok) {
            return {fail(exit_code::invalid, "status disagrees with proof"), std::nullopt};
        }
        error_.clear();
        return {exit_code::verified, std::get<info_response>(response)};
    case verdict::denial:
        if (r.st != status::denial) {
            return {fail(exit_code::invalid, "status disagrees with proof"), std::nullopt};
        }
        return {fail(exit_code::denial, "authenticated denial"), std::nullopt};
    case verdict::invalid:
        break;
    }
    return {fail(exit_code::invalid, "module tag, nonce or version check failed"), std::nullopt};
}

info_result client::info(record_index idx, std::uint64_t ver) {
    return query(idx, ver, 1);
}

exit_code client::create(record_index idx) {
    const digest v = leaf_digest(initial_acl(cred_.user).front().second);
    request_envelope env{request_type::acl, idx, 0, v, cred_.user, {}};
    env.mu = sign_request(cred_, env.type, idx, 0, v);
    const auto r = call("CREATE", wire::to_json(env));
    if (r.st != status::ok) {
        return from_status(r.st);
    }
    if (!verify_ack(cred_, env.type, idx, 0, v, wire::get_digest(r.payload, "mu_ack"))) {
        return fail(exit_code::invalid, "acknowledgement does not verify");
    }
    // A denial right after a verified creation means the service hides the container.
    const auto check = info(idx);
    if (check.code == exit_code::denial) {
        return fail(exit_code::invalid, "service denies a container it just created");
    }
    return check.code;
}

exit_code client::modify(record_index idx, const blob_set &blobs, bool encrypt) {
    const auto current = info(idx);
    if (current.code != exit_code::verified) {
        return current.code;
    }
    const std::uint64_t c_ctr = current.info->c_ctr;
    blob_set stored = blobs;
    json payload;
    digest mu_cs;
    if (encrypt) {
        const digest sigma = random_digest();
        stored.image = apply_keystream(sigma, blobs.image);
        const auto w = wrap_secret(cred_, sigma, idx, c_ctr);
        mu_cs = w.mu_cs;
        payload["mu_cs"] = w.mu_cs.hex();
        payload["sigma_prime"] = w.sigma_prime.hex();
    }
    const digest lambda = compute_lambda(stored, mu_cs);
    request_envelope env{request_type::container, idx, c_ctr, lambda, cred_.user, {}};
    env.mu = sign_request(cred_, env.type, idx, c_ctr, lambda);
    payload.update(wire::to_json(env));
    payload.update(wire::to_json(stored));
    const auto r = call("MODIFY", std::move(payload));
    if (r.st != status::ok) {
        return from_status(r.st);
    }
    if (!verify_ack(cred_, env.type, idx, c_ctr, lambda, wire::get_digest(r.payload, "mu_ack"))) {
        return fail(exit_code::invalid, "acknowledgement does not verify");
    }
    error_.clear();
    return exit_code::verified;
}

exit_code client::acl_set(record_index idx, record_index target, std::uint64_t level) {
    if (level > 3) {
        return fail(exit_code::protocol, "access level must be 0..3");
    }
    const auto current = info(idx);
    if (current.code != exit_code::verified) {
        return current.code;
    }
    const auto snap = call("ACL_SET", json{{"phase", "prepare"}, {"idx", idx}});
    if (snap.st != status::ok) {
        return from_status(snap.st);
    }
    if (wire::get_u64(snap.payload, "height") != acl_height) {
        return fail(exit_code::protocol, "unexpected ACL tree height");
    }
    auto store = tree_from_leaves(acl_geometry(), wire::leaves_from(snap.payload.at("leaves")));
    iomt acl{store};
    if (acl.root() != current.info->alpha) {
        return fail(exit_code::invalid, "ACL leaves do not match the certified root");
    }
    digest v;
    try {
        v = apply_access_edit(acl, target, level);
    } catch (const iomt_error &e) {
        return fail(exit_code::protocol, e.what());
    }
    const std::uint64_t c_ctr = current.info->c_ctr;
    request_envelope env{request_type::acl, idx, c_ctr, v, cred_.user, {}};
    env.mu = sign_request(cred_, env.type, idx, c_ctr, v);
    json payload = wire::to_json(env);
    payload["phase"] = "commit";
    payload["target"] = target;
    payload["level"] = level;
    const auto r = call("ACL_SET", std::move(payload));
    if (r.st != status::ok) {
        return from_status(r.st);
    }
    if (!verify_ack(cred_, env.type, idx, c_ctr, v, wire::get_digest(r.payload, "mu_ack"))) {
        return fail(exit_code::invalid, "acknowledgement does not verify");
    }
    error_.clear();
    return exit_code::verified;
}

fetch_result client::fetch(record_index idx, std::uint64_t ver) {
    fetch_result out;
    const auto r = call("FETCH", json{{"idx", idx}, {"ver", ver}, {"user", cred_.user}});
    if (r.st != status::ok) {
        out.code = from_status(r.st);
        return out;
    }
    const std::uint64_t served = wire::get_u64(r.payload, "ver");
    auto check = query(idx, ver == 0 ? served : ver, 2);
    if (check.code != exit_code::verified) {
        out.code = check.code;
        return out;
    }
    out.info = check.info;
    if (out.info->requested_ver == 0) {
        out.code = exit_code::verified;
        return out;
    }
    if (served != out.info->requested_ver) {
        out.code = fail(exit_code::invalid, "service returned a different version");
        return out;
    }
    blob_set blobs = wire::blobs_from(r.payload);
    const digest mu_cs = wire::get_digest(r.payload, "mu_cs");
    if (compute_lambda(blobs, mu_cs) != out.info->lambda) {
        out.code = fail(exit_code::invalid, "content does not match the certified lambda");
        return out;
    }
    if (!mu_cs.is_zero()) {
        if (!r.payload.contains("sigma_u")) {
            out.code = fail(exit_code::invalid, "encrypted content served without its secret");
            return out;
        }
        const auto sigma = unwrap_secret(cred_, wire::get_digest(r.payload, "sigma_u"), mu_cs, idx);
        if (!sigma) {
            out.code = fail(exit_code::invalid, "secret does not match its commitment");
            return out;
        }
        blobs.image = apply_keystream(*sigma, blobs.image);
    }
    out.blobs = std::move(blobs);
    out.code = exit_code::verified;
    error_.clear();
    return out;
}

} // namespace tcr
