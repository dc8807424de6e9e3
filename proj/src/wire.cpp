#include "tcr/wire.hpp"

namespace tcr::wire {

namespace {

const json &field(const json &j, const char *key) {
    if (!j.is_object()) {
        throw wire_error{"payload is not an object"};
    }
    auto it = j.find(key);
    if (it == j.end()) {
        throw wire_error{std::string{"missing field: "} + key};
    }
    return *it;
}

} // namespace

json message(const std::string &op, const std::string &request_id, json payload) {
    return json{{"op", op}, {"request_id", request_id}, {"payload", std::move(payload)}};
}

digest get_digest(const json &j, const char *key) {
    const auto &v = field(j, key);
    if (!v.is_string()) {
        throw wire_error{std::string{"not a hex string: "} + key};
    }
    try {
        return digest::from_hex(v.get<std::string>());
    } catch (const std::invalid_argument &e) {
        throw wire_error{std::string{key} + ": " + e.what()};
    }
}

bytes get_bytes(const json &j, const char *key) {
    const auto &v = field(j, key);
    if (!v.is_string()) {
        throw wire_error{std::string{"not a hex string: "} + key};
    }
    try {
        return from_hex(v.get<std::string>());
    } catch (const std::invalid_argument &e) {
        throw wire_error{std::string{key} + ": " + e.what()};
    }
}

std::uint64_t get_u64(const json &j, const char *key) {
    const auto &v = field(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw wire_error{std::string{"not an unsigned integer: "} + key};
    }
    return v.get<std::uint64_t>();
}

json to_json(const request_envelope &env) {
    return json{{"idx", env.idx}, {"c_ctr", env.c_ctr}, {"v", env.v.hex()}, {"user", env.user}, {"mu", env.mu.hex()}};
}

request_envelope envelope_from(const json &j, request_type type) {
    request_envelope env;
    env.type = type;
    env.idx = get_u64(j, "idx");
    env.c_ctr = get_u64(j, "c_ctr");
    env.v = get_digest(j, "v");
    env.user = get_u64(j, "user");
    env.mu = get_digest(j, "mu");
    return env;
}

json to_json(const verify_response &r) {
    if (const auto *d = std::get_if<denial_response>(&r)) {
        return json{{"kind", "denial"}, {"idx", d->idx}, {"delta", d->delta.hex()}, {"tag", d->tag.hex()}};
    }
    const auto &i = std::get<info_response>(r);
    return json{{"kind", "info"},           {"idx", i.idx},
                {"c_ctr", i.c_ctr},         {"c_ver", i.c_ver},
                {"ver", i.requested_ver},   {"alpha", i.alpha.hex()},
                {"lambda", i.lambda.hex()}, {"delta", i.delta.hex()},
                {"tag", i.tag.hex()}};
}

verify_response response_from(const json &j) {
    const auto &kind = field(j, "kind");
    if (kind == "denial") {
        return denial_response{get_u64(j, "idx"), get_digest(j, "delta"), get_digest(j, "tag")};
    }
    if (kind == "info") {
        return info_response{get_u64(j, "idx"),      get_u64(j, "c_ctr"),     get_u64(j, "c_ver"),
                             get_u64(j, "ver"),      get_digest(j, "alpha"), get_digest(j, "lambda"),
                             get_digest(j, "delta"), get_digest(j, "tag")};
    }
    throw wire_error{"unknown response kind"};
}

json to_json(const leaf_list &leaves) {
    json out = json::array();
    for (const auto &[slot, leaf] : leaves) {
        out.push_back(json{{"slot", slot}, {"idx", leaf.idx}, {"next", leaf.next_idx}, {"val", leaf.val.hex()}});
    }
    return out;
}

leaf_list leaves_from(const json &j) {
    if (!j.is_array()) {
        throw wire_error{"leaves must be an array"};
    }
    leaf_list out;
    for (const auto &e : j) {
        out.emplace_back(get_u64(e, "slot"), iomt_leaf{get_u64(e, "idx"), get_u64(e, "next"), get_digest(e, "val")});
    }
    return out;
}

json to_json(const blob_set &b) {
    return json{{"image", to_hex(b.image)}, {"build", to_hex(b.build)}, {"compose", to_hex(b.compose)}};
}

blob_set blobs_from(const json &j) {
    return {get_bytes(j, "image"), get_bytes(j, "build"), get_bytes(j, "compose")};
}

} // namespace tcr::wire
