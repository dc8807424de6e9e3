#pragma once

#include "tcr/storage.hpp"
#include "tcr/trusted_module.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace tcr {

/// Outcome class carried on the wire. Only `denial` comes with a module tag.
enum class status { ok, denial, rejected, protocol_error };

const char *to_string(status s);
status status_from_string(const std::string &s);

/// Per-step CPU time of the calling thread, in microseconds.
class step_recorder {
public:
    void add(const std::string &step, double us) { steps_.emplace_back(step, us); }
    const std::vector<std::pair<std::string, double>> &steps() const noexcept { return steps_; }
    void clear() { steps_.clear(); }

private:
    std::vector<std::pair<std::string, double>> steps_;
};

double thread_cpu_us();

class scoped_step {
public:
    scoped_step(step_recorder *rec, std::string name);
    ~scoped_step();
    scoped_step(const scoped_step &) = delete;
    scoped_step &operator=(const scoped_step &) = delete;

private:
    step_recorder *rec_;
    std::string name_;
    double start_ = 0;
};

struct service_options {
    bool cert_cache = true;
    /// Lets the second fetch phase reuse the first phase's lookups and certificates.
    bool reuse_fetch_lookups = false;
};

struct ack_reply {
    status st = status::rejected;
    digest mu_ack;
};

struct modify_request {
    request_envelope env;
    blob_set blobs;
    /// Zero for an unencrypted version.
    digest mu_cs;
    digest sigma_prime;
};

/// Unverified ACL snapshot a client needs to prepare an ACL edit.
struct acl_snapshot {
    leaf_list leaves;
    std::uint64_t c_ctr_hint = 0;
};

struct acl_set_request {
    request_envelope env;
    record_index target = 0;
    std::uint64_t level = 0;
};

struct info_reply {
    status st = status::protocol_error;
    std::optional<verify_response> response;
    /// Unverified; clients sign against the C_CTR inside a verified response.
    std::uint64_t c_ctr_hint = 0;
};

struct fetch_reply {
    status st = status::protocol_error;
    std::uint64_t ver = 0;
    blob_set blobs;
    digest mu_cs;
    std::optional<digest> sigma_u;
};

/// Untrusted service provider: assembles certificates, drives the module and persists results.
class service {
public:
    service(database &db, trusted_module &module, service_options opts = {});

    ack_reply create(const request_envelope &env, step_recorder *rec = nullptr);
    ack_reply modify(const modify_request &req, step_recorder *rec = nullptr);
    std::optional<acl_snapshot> acl_prepare(record_index idx);
    ack_reply acl_set(const acl_set_request &req, step_recorder *rec = nullptr);
    /// `second_phase` labels steps as the verification half of a fetch.
    info_reply info(record_index idx, std::uint64_t ver, const digest &delta, record_index user,
                    step_recorder *rec = nullptr, bool second_phase = false);
    fetch_reply fetch(record_index idx, std::uint64_t ver, record_index user, step_recorder *rec = nullptr);

    /// Swaps in another module instance (the benchmark restores module state between repeats).
    void attach_module(trusted_module &module);
    const service_options &options() const noexcept { return opts_; }

private:
    enum class cert_kind : std::uint8_t { container_rv, acl_rv };
    using cache_key = std::tuple<cert_kind, record_index, record_index>;

    struct fetch_memo {
        record_index idx = 0;
        std::uint64_t ver = 0;
        digest epoch;
        container_record rec;
        std::optional<version_record> version;
        rv_cert rv1;
        rv_cert rv2;
    };

    template <class F>
    ack_reply with_retry(F &&pipeline);

    ack_reply create_once(const request_envelope &env, step_recorder *rec);
    ack_reply modify_once(const modify_request &req, step_recorder *rec);
    ack_reply acl_set_once(const acl_set_request &req, step_recorder *rec);

    std::optional<rv_cert> record_proof(iomt &tree, record_index idx) const;
    std::optional<rv_cert> container_proof(record_index idx);
    std::optional<rv_cert> acl_proof(record_index c_idx, const leaf_list &acl, record_index user);
    std::optional<ru_cert> counter_update(iomt &tree, slot_index slot, std::uint64_t new_ctr) const;

    database *db_;
    trusted_module *module_;
    service_options opts_;
    std::mutex mu_;
    digest cache_epoch_;
    std::map<cache_key, rv_cert> cache_;
    std::optional<fetch_memo> memo_;
};

} // namespace tcr
