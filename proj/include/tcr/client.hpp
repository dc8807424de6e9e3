#pragma once

#include "tcr/line_socket.hpp"
#include "tcr/server.hpp"
#include "tcr/wire.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tcr {

/// U_IDX and the secret K_i it shares with the module. The key never leaves the client.
struct credential {
    record_index user = 0;
    digest key;
};

/// Key file: 64 hex characters, surrounding whitespace ignored.
digest read_key_file(const std::filesystem::path &path);
void write_key_file(const std::filesystem::path &path, const digest &key);

digest sign_request(const credential &c, request_type type, record_index idx, std::uint64_t c_ctr, const digest &v);
bool verify_ack(const credential &c, request_type type, record_index idx, std::uint64_t c_ctr, const digest &v,
                const digest &mu_ack);

struct wrapped_secret {
    digest sigma_prime;
    digest mu_cs;
};

/// sigma' = sigma ^ hmac(canonical(idx, c_ctr), K_i), mu_cs = h(idx || sigma).
wrapped_secret wrap_secret(const credential &c, const digest &sigma, record_index idx, std::uint64_t c_ctr);
/// Removes the h(mu_cs || K_i) pad; nullopt if the result does not match mu_cs.
std::optional<digest> unwrap_secret(const credential &c, const digest &sigma_u, const digest &mu_cs, record_index idx);

enum class verdict { verified, denial, invalid };

/// Checks the module tag under K_i, the echoed nonce, the index and the version asked for
/// (0 meaning latest).
verdict verify_info(const credential &c, const verify_response &r, const digest &delta_sent, record_index idx,
                    std::uint64_t requested_ver);

class transport {
public:
    virtual ~transport() = default;
    virtual wire::json call(const wire::json &msg) = 0;
};

class tcp_transport final : public transport {
public:
    explicit tcp_transport(const endpoint &ep) : stream_{line_stream::connect(ep)} {}
    wire::json call(const wire::json &msg) override;

private:
    line_stream stream_;
};

/// In-process transport through the same dispatcher; optionally keeps the JSON transcript.
class local_transport final : public transport {
public:
    explicit local_transport(request_handler &h, std::vector<std::string> *transcript = nullptr)
        : handler_{&h}, transcript_{transcript} {}
    wire::json call(const wire::json &msg) override;

private:
    request_handler *handler_;
    std::vector<std::string> *transcript_;
};

/// Process exit codes of the command-line client.
enum class exit_code : int { verified = 0, denial = 2, invalid = 3, protocol = 4, rejected = 5 };

struct info_result {
    exit_code code = exit_code::protocol;
    std::optional<info_response> info;
};

struct fetch_result {
    exit_code code = exit_code::protocol;
    std::optional<info_response> info;
    /// Plaintext content once verified.
    blob_set blobs;
};

class client {
public:
    client(transport &t, credential cred) : t_{&t}, cred_{cred} {}

    exit_code create(record_index idx);
    exit_code modify(record_index idx, const blob_set &blobs, bool encrypt);
    exit_code acl_set(record_index idx, record_index target, std::uint64_t level);
    info_result info(record_index idx, std::uint64_t ver = 0);
    fetch_result fetch(record_index idx, std::uint64_t ver = 0);

    const credential &cred() const noexcept { return cred_; }
    /// Human-readable reason for the last non-verified outcome.
    const std::string &last_error() const noexcept { return error_; }

private:
    struct reply {
        status st;
        wire::json payload;
    };
    reply call(const std::string &op, wire::json payload);
    info_result query(record_index idx, std::uint64_t ver, int phase);
    exit_code fail(exit_code code, std::string why);
    exit_code from_status(status st);

    transport *t_;
    credential cred_;
    std::string error_;
    std::uint64_t next_id_ = 1;
};

} // namespace tcr
