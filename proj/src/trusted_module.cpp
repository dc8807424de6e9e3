#include "tcr/trusted_module.hpp"

#include "tcr/iomt_kernels.hpp"

#include <cstring>
#include <fstream>

namespace tcr {

namespace {

constexpr std::array<std::uint8_t, 4> state_magic{'T', 'C', 'R', 'M'};
constexpr std::uint8_t state_version = 0x01;

std::optional<std::uint64_t> counter_of(const digest &val) {
    return as_counter(val);
}

void write_file_atomically(const std::filesystem::path &path, const bytes &content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        if (!out) {
            throw module_state_error{"cannot write module state: " + tmp.string()};
        }
        out.write(reinterpret_cast<const char *>(content.data()), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw module_state_error{"short write of module state"};
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

bytes encode_module_state(const module_state &s) {
    canonical_writer w;
    for (auto b : state_magic) {
        w.byte(b);
    }
    w.byte(state_version).put(s.xi).put(s.chi).u64(s.user_keys.size());
    for (const auto &[user, key] : s.user_keys) {
        w.u64(user).put(key);
    }
    bytes out = w.take();
    const digest mac = hmac(out, s.chi);
    out.insert(out.end(), mac.data.begin(), mac.data.end());
    return out;
}

module_state decode_module_state(byte_view raw) {
    constexpr std::size_t header = 4 + 1 + 2 * digest::size + 8;
    if (raw.size() < header + digest::size) {
        throw module_state_error{"module state truncated"};
    }
    if (!std::equal(state_magic.begin(), state_magic.end(), raw.begin())) {
        throw module_state_error{"bad module state magic"};
    }
    if (raw[4] != state_version) {
        throw module_state_error{"unsupported module state version"};
    }
    canonical_reader r{raw.subspan(5)};
    module_state s;
    s.xi = r.get_digest();
    s.chi = r.get_digest();
    const std::uint64_t n = r.u64();
    const std::size_t entry = 8 + digest::size;
    if (n > (raw.size() - header) / entry || raw.size() != header + n * entry + digest::size) {
        throw module_state_error{"module state length mismatch"};
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto user = r.u64();
        s.user_keys[user] = r.get_digest();
    }
    const auto mac = r.get_digest();
    if (!hmac_verify(raw.first(raw.size() - digest::size), s.chi, mac)) {
        throw module_state_error{"module state self-MAC mismatch"};
    }
    return s;
}

digest secret_commitment(record_index idx, const digest &sigma) {
    canonical_writer w;
    w.u64(idx).put(sigma);
    return hash(w.view());
}

digest secret_pad(const digest &mu_cs, const digest &key) {
    return hash(mu_cs, key);
}

// ---------------------------------------------------------------------------

trusted_module::trusted_module(module_state state, std::optional<std::filesystem::path> state_file)
    : state_{std::move(state)}, state_file_{std::move(state_file)} {}

trusted_module::trusted_module(trusted_module &&other) noexcept
    : state_{std::move(other.state_)}, state_file_{std::move(other.state_file_)} {}

trusted_module trusted_module::initialize(const std::map<record_index, digest> &user_keys,
                                          std::optional<std::filesystem::path> state_file) {
    if (user_keys.empty()) {
        throw std::invalid_argument{"module needs at least one user key"};
    }
    module_state s;
    s.chi = random_digest();
    s.user_keys = user_keys;
    trusted_module m{std::move(s), std::move(state_file)};
    if (m.state_file_) {
        write_file_atomically(*m.state_file_, encode_module_state(m.state_));
    }
    return m;
}

trusted_module trusted_module::load(const std::filesystem::path &state_file) {
    std::ifstream in{state_file, std::ios::binary};
    if (!in) {
        throw module_state_error{"cannot open module state: " + state_file.string()};
    }
    bytes raw{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
    return trusted_module{decode_module_state(raw), state_file};
}

digest trusted_module::root() const {
    std::lock_guard lock{mu_};
    return state_.xi;
}

std::size_t trusted_module::user_count() const {
    std::lock_guard lock{mu_};
    return state_.user_keys.size();
}

const digest *trusted_module::key_of(record_index user) const {
    auto it = state_.user_keys.find(user);
    return it == state_.user_keys.end() ? nullptr : &it->second;
}

void trusted_module::commit_root(const digest &new_root) {
    if (state_file_) {
        module_state next = state_;
        next.xi = new_root;
        write_file_atomically(*state_file_, encode_module_state(next));
    }
    state_.xi = new_root;
}

nu_cert trusted_module::f_nu(const digest &x, const digest &x_new, std::span<const path_step> path) const {
    std::lock_guard lock{mu_};
    const digest y = compute_root(x, path);
    const digest y_new = x == x_new ? y : compute_root(x_new, path);
    return sign(nu_body{x, y, x_new, y_new});
}

std::optional<rv_cert> trusted_module::f_rv(const nu_cert &nu, const std::optional<iomt_leaf> &leaf,
                                            std::optional<record_index> enclosed) const {
    std::lock_guard lock{mu_};
    if (!authentic(nu) || nu.body.x != nu.body.x_new) {
        return std::nullopt;
    }
    if (!leaf) {
        // Only an entirely empty tree proves absence without an encloser.
        if (!enclosed || !nu.body.x.is_zero() || !nu.body.y.is_zero()) {
            return std::nullopt;
        }
        return sign(rv_body{rv_record{*enclosed, digest::zero(), nu.body.y}, std::nullopt});
    }
    if (nu.body.x != leaf_digest(*leaf)) {
        return std::nullopt;
    }
    rv_body body{rv_record{leaf->idx, leaf->val, nu.body.y}, std::nullopt};
    if (enclosed && encloses(leaf->idx, leaf->next_idx, *enclosed)) {
        body.absent = rv_record{*enclosed, digest::zero(), nu.body.y};
    }
    return sign(body);
}

std::optional<ru_cert> trusted_module::f_ru(const nu_cert &nu, const iomt_leaf &leaf, const digest &val_new) const {
    std::lock_guard lock{mu_};
    if (!authentic(nu)) {
        return std::nullopt;
    }
    iomt_leaf updated = leaf;
    updated.val = val_new;
    if (nu.body.x != leaf_digest(leaf) || nu.body.x_new != leaf_digest(updated)) {
        return std::nullopt;
    }
    return sign(ru_body{leaf.idx, leaf.val, nu.body.y, val_new, nu.body.y_new});
}

std::optional<eq_cert> trusted_module::f_eq(const nu_cert &nu1, const std::optional<nu_cert> &nu2,
                                            const std::optional<iomt_leaf> &encloser, record_index new_idx) const {
    std::lock_guard lock{mu_};
    if (!authentic(nu1)) {
        return std::nullopt;
    }
    if (!encloser) {
        const digest first = leaf_digest(iomt_leaf{new_idx, new_idx, digest::zero()});
        if (nu2 || !nu1.body.x.is_zero() || !nu1.body.y.is_zero() || nu1.body.x_new != first) {
            return std::nullopt;
        }
        return sign(eq_body{nu1.body.y, nu1.body.y_new});
    }
    if (!nu2 || !authentic(*nu2)) {
        return std::nullopt;
    }
    if (!encloses(encloser->idx, encloser->next_idx, new_idx)) {
        return std::nullopt;
    }
    iomt_leaf relinked = *encloser;
    relinked.next_idx = new_idx;
    const digest x1 = leaf_digest(*encloser);
    const digest x1_new = leaf_digest(relinked);
    const digest x2_new = leaf_digest(iomt_leaf{new_idx, encloser->next_idx, digest::zero()});
    if (nu1.body.x != x1 || nu1.body.x_new != x1_new || !nu2->body.x.is_zero() || nu2->body.x_new != x2_new) {
        return std::nullopt;
    }
    if (nu1.body.y_new != nu2->body.y) {
        return std::nullopt;
    }
    return sign(eq_body{nu1.body.y, nu2->body.y_new});
}

ph_outcome trusted_module::f_ph(const eq_cert &eq) {
    std::lock_guard lock{mu_};
    if (!authentic(eq)) {
        return ph_outcome::rejected;
    }
    if (state_.xi == eq.body.root) {
        commit_root(eq.body.root_new);
        return ph_outcome::advanced;
    }
    if (state_.xi == eq.body.root_new) {
        commit_root(eq.body.root);
        return ph_outcome::reverted;
    }
    return ph_outcome::rejected;
}

std::optional<tp_result> trusted_module::f_tp(const request_envelope &req, const std::optional<rv_cert> &rv,
                                              const ru_cert &ru, const std::optional<cr_cert> &cr) {
    std::lock_guard lock{mu_};
    const digest *key = key_of(req.user);
    if (key == nullptr || !hmac_verify(encode_request(req.type, req.idx, req.c_ctr, req.v), *key, req.mu)) {
        return std::nullopt;
    }
    if (!authentic(ru) || ru.body.idx != req.idx) {
        return std::nullopt;
    }
    const auto old_ctr = counter_of(ru.body.val);
    const auto new_ctr = counter_of(ru.body.val_new);
    if (!old_ctr || !new_ctr || *old_ctr == UINT64_MAX || *old_ctr + 1 != *new_ctr) {
        return std::nullopt;
    }
    if (ru.body.root != state_.xi) {
        return std::nullopt;
    }
    const digest mu_ack = hmac(encode_ack(req.type, req.idx, req.c_ctr, req.v), *key);

    if (req.type == request_type::acl && req.c_ctr == 0) {
        if (*old_ctr != 0) {
            return std::nullopt;
        }
        const auto cr_new = sign(cr_body{req.idx, 1, 0, req.v});
        commit_root(ru.body.root_new);
        return tp_result{cr_new, std::nullopt, mu_ack};
    }

    if (!cr || !rv || !authentic(*cr) || !authentic(*rv)) {
        return std::nullopt;
    }
    const auto &c = cr->body;
    const auto &acl = rv->body.subject();
    if (c.idx != req.idx || *old_ctr != c.ctr || req.c_ctr != c.ctr || c.alpha != rv->body.record.root ||
        acl.idx != req.user) {
        return std::nullopt;
    }
    const auto access = counter_of(acl.val);
    if (!access) {
        return std::nullopt;
    }
    if (req.type == request_type::container && *access >= 2) {
        const auto cr_new = sign(cr_body{c.idx, c.ctr + 1, c.ver + 1, c.alpha});
        const auto vr_new = sign(vr_body{c.idx, c.ver + 1, req.v});
        commit_root(ru.body.root_new);
        return tp_result{cr_new, vr_new, mu_ack};
    }
    if (req.type == request_type::acl && *access >= 3) {
        const auto cr_new = sign(cr_body{c.idx, c.ctr + 1, c.ver, req.v});
        commit_root(ru.body.root_new);
        return tp_result{cr_new, std::nullopt, mu_ack};
    }
    return std::nullopt;
}

std::optional<verify_response> trusted_module::f_verify(const rv_cert &rv1, const std::optional<rv_cert> &rv2,
                                                        const std::optional<cr_cert> &cr,
                                                        const std::optional<vr_cert> &vr,
                                                        std::uint64_t requested_ver, const digest &delta,
                                                        record_index user) const {
    std::lock_guard lock{mu_};
    const digest *key = key_of(user);
    if (key == nullptr || !authentic(rv1) || rv1.body.record.root != state_.xi) {
        return std::nullopt;
    }
    const auto &container = rv1.body.subject();
    const auto c_ctr = counter_of(container.val);
    if (!c_ctr) {
        return std::nullopt;
    }
    auto deny = [&] {
        denial_response d{container.idx, delta, {}};
        d.tag = hmac(encode_tag_input(d), *key);
        return verify_response{d};
    };
    if (*c_ctr == 0) {
        return deny();
    }
    if (!cr || !rv2 || !authentic(*cr) || !authentic(*rv2)) {
        return std::nullopt;
    }
    const auto &c = cr->body;
    const auto &acl = rv2->body.subject();
    if (c.idx != container.idx || c.ctr != *c_ctr || rv2->body.record.root != c.alpha || acl.idx != user) {
        return std::nullopt;
    }
    const auto access = counter_of(acl.val);
    if (!access) {
        return std::nullopt;
    }
    if (*access == 0) {
        return deny();
    }
    digest lambda;
    if (requested_ver == 0) {
        // Version 0 resolves to C_VER upstream; it survives only for a container with no versions.
        if (c.ver != 0) {
            return std::nullopt;
        }
    } else {
        if (!vr || !authentic(*vr) || vr->body.idx != c.idx || vr->body.ver != requested_ver ||
            requested_ver > c.ver) {
            return std::nullopt;
        }
        lambda = vr->body.lambda;
    }
    info_response r{container.idx, c.ctr, c.ver, requested_ver, c.alpha, lambda, delta, {}};
    r.tag = hmac(encode_tag_input(r), *key);
    return verify_response{r};
}

std::optional<digest> trusted_module::f_st(record_index idx, record_index user, const digest &sigma_prime,
                                           const digest &mu_cs, std::uint64_t c_ctr) const {
    std::lock_guard lock{mu_};
    const digest *key = key_of(user);
    if (key == nullptr) {
        return std::nullopt;
    }
    const digest sigma = sigma_prime ^ hmac(encode_secret_pad(idx, c_ctr), *key);
    if (!tag_equal(mu_cs, secret_commitment(idx, sigma))) {
        return std::nullopt;
    }
    return sigma ^ secret_pad(mu_cs, state_.chi);
}

std::optional<digest> trusted_module::f_rs(const rv_cert &rv1, const rv_cert &rv2, const cr_cert &cr,
                                           record_index idx, std::uint64_t c_ctr, std::uint64_t requested_ver,
                                           const digest &sigma_s, const digest &mu_cs, record_index user) const {
    std::lock_guard lock{mu_};
    const digest *key = key_of(user);
    if (key == nullptr || !authentic(rv1) || !authentic(rv2) || !authentic(cr)) {
        return std::nullopt;
    }
    const auto &container = rv1.body.subject();
    const auto &acl = rv2.body.subject();
    const auto &c = cr.body;
    if (rv1.body.record.root != state_.xi || container.idx != idx || counter_of(container.val) != c_ctr ||
        c_ctr == 0 || c.idx != idx || c.ctr != c_ctr || requested_ver == 0 || requested_ver > c.ver) {
        return std::nullopt;
    }
    if (rv2.body.record.root != c.alpha || acl.idx != user) {
        return std::nullopt;
    }
    const auto access = counter_of(acl.val);
    if (!access || *access < 1) {
        return std::nullopt;
    }
    const digest sigma = sigma_s ^ secret_pad(mu_cs, state_.chi);
    if (!tag_equal(mu_cs, secret_commitment(idx, sigma))) {
        return std::nullopt;
    }
    return sigma ^ secret_pad(mu_cs, *key);
}

bulk_seals trusted_module::provision_bulk(const digest &root, std::span<const cr_body> containers,
                                          std::span<const vr_body> versions) {
    std::lock_guard lock{mu_};
    if (!state_.xi.is_zero()) {
        throw std::logic_error{"bulk provisioning requires an empty repository"};
    }
    std::vector<bytes> cr_msgs;
    cr_msgs.reserve(containers.size());
    for (const auto &c : containers) {
        cr_msgs.push_back(encode(c));
    }
    std::vector<bytes> vr_msgs;
    vr_msgs.reserve(versions.size());
    for (const auto &v : versions) {
        vr_msgs.push_back(encode(v));
    }
    bulk_seals seals{kernels::hmac_batch(cr_msgs, state_.chi), kernels::hmac_batch(vr_msgs, state_.chi)};
    commit_root(root);
    return seals;
}

} // namespace tcr
