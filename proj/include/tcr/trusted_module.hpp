#pragma once

#include "tcr/certificates.hpp"
#include "tcr/iomt.hpp"
#include "tcr/merkle.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace tcr {

/// Protected state of the trusted module.
struct module_state {
    digest xi;
    digest chi;
    std::map<record_index, digest> user_keys;

    friend bool operator==(const module_state &, const module_state &) = default;
};

struct module_state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// "TCRM" | 0x01 | xi | chi | n (u64 BE) | n x (U_IDX u64 BE | K_i) | HMAC(all prior bytes, chi).
bytes encode_module_state(const module_state &s);
/// Throws module_state_error on bad magic, version, length or self-MAC.
module_state decode_module_state(byte_view raw);

/// mu_cs = h(IDX || sigma).
digest secret_commitment(record_index idx, const digest &sigma);
/// h(mu_cs || key), the pad applied to stored and delivered secrets.
digest secret_pad(const digest &mu_cs, const digest &key);

struct tp_result {
    cr_cert cr;
    std::optional<vr_cert> vr;
    digest mu_ack;
};

enum class ph_outcome { advanced, reverted, rejected };

/// Output of bulk provisioning: rho for every container and version record, in input order.
struct bulk_seals {
    std::vector<digest> container_rhos;
    std::vector<digest> version_rhos;
};

/// The trusted module T. All procedures are serialized. Failed procedures
/// return nullopt (or ph_outcome::rejected) and leave the state untouched.
class trusted_module {
public:
    /// Fresh module: random chi, empty repository (xi = 0). Throws on an empty key list.
    static trusted_module initialize(const std::map<record_index, digest> &user_keys,
                                     std::optional<std::filesystem::path> state_file = std::nullopt);
    /// Refuses a file whose self-MAC fails.
    static trusted_module load(const std::filesystem::path &state_file);

    trusted_module(trusted_module &&other) noexcept;
    trusted_module &operator=(trusted_module &&) = delete;

    /// Current container-IOMT root. Public information.
    digest root() const;
    std::size_t user_count() const;

    nu_cert f_nu(const digest &x, const digest &x_new, std::span<const path_step> path) const;

    /// With `leaf` absent, only an empty tree (X = Y = 0) can certify `enclosed` as absent.
    std::optional<rv_cert> f_rv(const nu_cert &nu, const std::optional<iomt_leaf> &leaf,
                                std::optional<record_index> enclosed = std::nullopt) const;

    std::optional<ru_cert> f_ru(const nu_cert &nu, const iomt_leaf &leaf, const digest &val_new) const;

    /// With `encloser` absent, certifies inserting the first leaf into an empty tree from `nu1` alone.
    std::optional<eq_cert> f_eq(const nu_cert &nu1, const std::optional<nu_cert> &nu2,
                                const std::optional<iomt_leaf> &encloser, record_index new_idx) const;

    ph_outcome f_ph(const eq_cert &eq);

    std::optional<tp_result> f_tp(const request_envelope &req, const std::optional<rv_cert> &rv, const ru_cert &ru,
                                  const std::optional<cr_cert> &cr);

    std::optional<verify_response> f_verify(const rv_cert &rv1, const std::optional<rv_cert> &rv2,
                                            const std::optional<cr_cert> &cr, const std::optional<vr_cert> &vr,
                                            std::uint64_t requested_ver, const digest &delta,
                                            record_index user) const;

    std::optional<digest> f_st(record_index idx, record_index user, const digest &sigma_prime, const digest &mu_cs,
                               std::uint64_t c_ctr) const;

    std::optional<digest> f_rs(const rv_cert &rv1, const rv_cert &rv2, const cr_cert &cr, record_index idx,
                               std::uint64_t c_ctr, std::uint64_t requested_ver, const digest &sigma_s,
                               const digest &mu_cs, record_index user) const;

    /// Bootstrap of a bulk-built repository: seals the supplied records and
    /// installs `root`. Only permitted while the repository is empty.
    bulk_seals provision_bulk(const digest &root, std::span<const cr_body> containers,
                              std::span<const vr_body> versions);

    /// True iff rho verifies under chi. Exposed for tests and the storage audit path.
    template <class Body>
    bool authentic(const certificate<Body> &c) const {
        return hmac_verify(encode(c.body), state_.chi, c.rho);
    }

private:
    trusted_module(module_state state, std::optional<std::filesystem::path> state_file);

    template <class Body>
    certificate<Body> sign(const Body &b) const {
        return {b, hmac(encode(b), state_.chi)};
    }
    const digest *key_of(record_index user) const;
    void commit_root(const digest &new_root);

    mutable std::mutex mu_;
    module_state state_;
    std::optional<std::filesystem::path> state_file_;
};

} // namespace tcr
