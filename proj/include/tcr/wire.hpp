#pragma once

#include "tcr/service.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

/// Newline-delimited JSON messages {op, request_id, payload}. Binary values are hex strings.
/// MACs are never computed over this text, only over canonical encodings.
namespace tcr::wire {

using json = nlohmann::json;

struct wire_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json message(const std::string &op, const std::string &request_id, json payload);

digest get_digest(const json &j, const char *key);
bytes get_bytes(const json &j, const char *key);
std::uint64_t get_u64(const json &j, const char *key);

json to_json(const request_envelope &env);
request_envelope envelope_from(const json &j, request_type type);

json to_json(const verify_response &r);
verify_response response_from(const json &j);

json to_json(const leaf_list &leaves);
leaf_list leaves_from(const json &j);

json to_json(const blob_set &b);
blob_set blobs_from(const json &j);

} // namespace tcr::wire
