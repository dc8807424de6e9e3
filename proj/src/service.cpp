#include "tcr/service.hpp"

#include <ctime>

namespace tcr {

namespace {

constexpr std::size_t cache_limit = 4096;

std::string label(const char *step, bool second_phase) {
    return second_phase ? std::string{step} + "_2" : std::string{step};
}

} // namespace

const char *to_string(status s) {
    switch (s) {
    case status::ok:
        return "ok";
    case status::denial:
        return "denial";
    case status::rejected:
        return "rejected";
    case status::protocol_error:
        return "protocol_error";
    }
    return "protocol_error";
}

status status_from_string(const std::string &s) {
    if (s == "ok") {
        return status::ok;
    }
    if (s == "denial") {
        return status::denial;
    }
    if (s == "rejected") {
        return status::rejected;
    }
    if (s == "protocol_error") {
        return status::protocol_error;
    }
    throw std::invalid_argument{"unknown status: " + s};
}

double thread_cpu_us() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) * 1e6 + static_cast<double>(ts.tv_nsec) / 1e3;
}

scoped_step::scoped_step(step_recorder *rec, std::string name) : rec_{rec}, name_{std::move(name)} {
    if (rec_) {
        start_ = thread_cpu_us();
    }
}

scoped_step::~scoped_step() {
    if (rec_) {
        rec_->add(name_, thread_cpu_us() - start_);
    }
}

// ---------------------------------------------------------------------------

service::service(database &db, trusted_module &module, service_options opts)
    : db_{&db}, module_{&module}, opts_{opts} {}

void service::attach_module(trusted_module &module) {
    std::lock_guard lock{mu_};
    module_ = &module;
    cache_.clear();
    memo_.reset();
}

template <class F>
ack_reply service::with_retry(F &&pipeline) {
    std::lock_guard lock{mu_};
    for (int attempt = 0;; ++attempt) {
        const digest before = module_->root();
        auto reply = pipeline();
        // A rejection caused by the root moving underneath the pipeline is retried once.
        if (reply.st != status::rejected || attempt > 0 || module_->root() == before) {
            return reply;
        }
        cache_.clear();
    }
}

std::optional<rv_cert> service::record_proof(iomt &tree, record_index idx) const {
    if (auto slot = tree.find(idx)) {
        const auto leaf = *tree.leaf(*slot);
        const digest x = leaf_digest(leaf);
        return module_->f_rv(module_->f_nu(x, x, tree.path(*slot)), leaf);
    }
    if (auto slot = tree.encloser_of(idx)) {
        const auto leaf = *tree.leaf(*slot);
        const digest x = leaf_digest(leaf);
        return module_->f_rv(module_->f_nu(x, x, tree.path(*slot)), leaf, idx);
    }
    const auto nu = module_->f_nu(digest::zero(), digest::zero(), tree.path(0));
    return module_->f_rv(nu, std::nullopt, idx);
}

std::optional<rv_cert> service::container_proof(record_index idx) {
    const digest epoch = module_->root();
    if (opts_.cert_cache) {
        if (epoch != cache_epoch_) {
            cache_.clear();
            cache_epoch_ = epoch;
        }
        if (auto it = cache_.find({cert_kind::container_rv, idx, 0}); it != cache_.end()) {
            return it->second;
        }
    }
    iomt tree{db_->container_tree()};
    auto rv = record_proof(tree, idx);
    if (rv && opts_.cert_cache) {
        if (cache_.size() >= cache_limit) {
            cache_.clear();
        }
        cache_.emplace(cache_key{cert_kind::container_rv, idx, 0}, *rv);
    }
    return rv;
}

std::optional<rv_cert> service::acl_proof(record_index c_idx, const leaf_list &acl, record_index user) {
    const digest epoch = module_->root();
    if (opts_.cert_cache) {
        if (epoch != cache_epoch_) {
            cache_.clear();
            cache_epoch_ = epoch;
        }
        if (auto it = cache_.find({cert_kind::acl_rv, c_idx, user}); it != cache_.end()) {
            return it->second;
        }
    }
    auto store = tree_from_leaves(acl_geometry(), acl);
    iomt tree{store};
    auto rv = record_proof(tree, user);
    if (rv && opts_.cert_cache) {
        if (cache_.size() >= cache_limit) {
            cache_.clear();
        }
        cache_.emplace(cache_key{cert_kind::acl_rv, c_idx, user}, *rv);
    }
    return rv;
}

std::optional<ru_cert> service::counter_update(iomt &tree, slot_index slot, std::uint64_t new_ctr) const {
    const auto leaf = *tree.leaf(slot);
    auto updated = leaf;
    updated.val = counter_value(new_ctr);
    const auto nu = module_->f_nu(leaf_digest(leaf), leaf_digest(updated), tree.path(slot));
    return module_->f_ru(nu, leaf, updated.val);
}

// ---------------------------------------------------------------------------

ack_reply service::create(const request_envelope &env, step_recorder *rec) {
    if (env.type != request_type::acl || env.c_ctr != 0) {
        return {status::protocol_error, {}};
    }
    return with_retry([&] { return create_once(env, rec); });
}

ack_reply service::create_once(const request_envelope &env, step_recorder *rec) {
    iomt tree{db_->container_tree()};
    const auto acl = initial_acl(env.user);
    if (tree.find(env.idx) || leaf_digest(acl.front().second) != env.v) {
        return {status::rejected, {}};
    }

    database::transaction tx{*db_};
    std::optional<eq_cert> eq;
    placeholder_plan plan;
    {
        scoped_step s{rec, "eq_cert"};
        try {
            plan = tree.plan_insert(env.idx);
        } catch (const iomt_error &) {
            return {status::rejected, {}};
        }
        const auto &ph = plan.placeholder;
        if (plan.linker) {
            const auto &link = *plan.linker;
            const auto nu1 = module_->f_nu(leaf_digest(link.before), leaf_digest(link.after), tree.path(link.slot));
            tree.set_leaf(link.slot, link.after);
            const auto nu2 = module_->f_nu(digest::zero(), leaf_digest(ph.after), tree.path(ph.slot));
            eq = module_->f_eq(nu1, nu2, link.before, env.idx);
        } else {
            const auto nu1 = module_->f_nu(digest::zero(), leaf_digest(ph.after), tree.path(ph.slot));
            eq = module_->f_eq(nu1, std::nullopt, std::nullopt, env.idx);
        }
        if (!eq) {
            return {status::rejected, {}};
        }
    }
    {
        scoped_step s{rec, "placeholder_insert"};
        if (module_->f_ph(*eq) != ph_outcome::advanced) {
            return {status::rejected, {}};
        }
    }
    // From here on a failure must also step the module back to the old root.
    try {
        std::optional<ru_cert> ru;
        {
            scoped_step s{rec, "placeholder_insert"};
            tree.set_leaf(plan.placeholder.slot, plan.placeholder.after);
        }
        {
            scoped_step s{rec, "ru_cert"};
            ru = counter_update(tree, plan.placeholder.slot, 1);
        }
        std::optional<tp_result> res;
        {
            scoped_step s{rec, "module_update"};
            if (ru) {
                res = module_->f_tp(env, std::nullopt, *ru, std::nullopt);
            }
        }
        if (!res) {
            module_->f_ph(*eq);
            return {status::rejected, {}};
        }
        scoped_step s{rec, "db_update"};
        auto leaf = *plan.placeholder.after;
        leaf.val = counter_value(1);
        tree.set_leaf(plan.placeholder.slot, leaf);
        db_->put_container(container_record::from(res->cr));
        db_->put_acl(env.idx, acl);
        tx.commit();
        return {status::ok, res->mu_ack};
    } catch (...) {
        if (module_->root() == eq->body.root_new) {
            module_->f_ph(*eq);
        }
        throw;
    }
}

// ---------------------------------------------------------------------------

ack_reply service::modify(const modify_request &req, step_recorder *rec) {
    if (req.env.type != request_type::container) {
        return {status::protocol_error, {}};
    }
    return with_retry([&] { return modify_once(req, rec); });
}

ack_reply service::modify_once(const modify_request &req, step_recorder *rec) {
    const auto &env = req.env;
    iomt tree{db_->container_tree()};
    std::optional<container_record> record;
    std::optional<slot_index> slot;
    leaf_list acl;
    {
        scoped_step s{rec, "db_lookup"};
        record = db_->get_container(env.idx);
        slot = tree.find(env.idx);
        if (!record || !slot) {
            return {status::rejected, {}};
        }
        acl = db_->get_acl(env.idx);
    }
    blob_hashes hashes;
    {
        scoped_step s{rec, "lambda"};
        hashes = hash_blobs(req.blobs);
        if (compute_lambda(hashes, req.mu_cs) != env.v) {
            return {status::rejected, {}};
        }
    }
    database::transaction tx{*db_};
    std::optional<rv_cert> rv;
    std::optional<ru_cert> ru;
    {
        scoped_step s{rec, "ru_rv_certs"};
        rv = acl_proof(env.idx, acl, env.user);
        const auto ctr = as_counter(tree.leaf(*slot)->val);
        if (!rv || !ctr) {
            return {status::rejected, {}};
        }
        ru = counter_update(tree, *slot, *ctr + 1);
        if (!ru) {
            return {status::rejected, {}};
        }
    }
    std::optional<tp_result> res;
    digest sigma_s;
    {
        scoped_step s{rec, "module_update"};
        if (!req.mu_cs.is_zero()) {
            const auto stored = module_->f_st(env.idx, env.user, req.sigma_prime, req.mu_cs, env.c_ctr);
            if (!stored) {
                return {status::rejected, {}};
            }
            sigma_s = *stored;
        }
        res = module_->f_tp(env, rv, *ru, record->cert());
        if (!res || !res->vr) {
            return {status::rejected, {}};
        }
    }
    scoped_step s{rec, "db_update"};
    auto leaf = *tree.leaf(*slot);
    leaf.val = ru->body.val_new;
    tree.set_leaf(*slot, leaf);
    db_->put_container(container_record::from(res->cr));
    db_->put_blob(req.blobs.image);
    db_->put_blob(req.blobs.build);
    db_->put_blob(req.blobs.compose);
    db_->put_version(
        version_record{env.idx, res->vr->body.ver, req.mu_cs, sigma_s, res->vr->body.lambda, res->vr->rho, hashes});
    tx.commit();
    return {status::ok, res->mu_ack};
}

// ---------------------------------------------------------------------------

std::optional<acl_snapshot> service::acl_prepare(record_index idx) {
    std::lock_guard lock{mu_};
    const auto record = db_->get_container(idx);
    if (!record) {
        return std::nullopt;
    }
    return acl_snapshot{db_->get_acl(idx), record->ctr};
}

ack_reply service::acl_set(const acl_set_request &req, step_recorder *rec) {
    if (req.env.type != request_type::acl || req.env.c_ctr == 0 || req.level > 3) {
        return {status::protocol_error, {}};
    }
    return with_retry([&] { return acl_set_once(req, rec); });
}

ack_reply service::acl_set_once(const acl_set_request &req, step_recorder *rec) {
    const auto &env = req.env;
    iomt tree{db_->container_tree()};
    std::optional<container_record> record;
    std::optional<slot_index> slot;
    leaf_list acl;
    {
        scoped_step s{rec, "db_lookup"};
        record = db_->get_container(env.idx);
        slot = tree.find(env.idx);
        if (!record || !slot) {
            return {status::rejected, {}};
        }
        acl = db_->get_acl(env.idx);
    }
    leaf_list new_acl;
    {
        scoped_step s{rec, "acl_edit"};
        auto store = tree_from_leaves(acl_geometry(), acl);
        iomt acl_tree{store};
        try {
            if (apply_access_edit(acl_tree, req.target, req.level) != env.v) {
                return {status::rejected, {}};
            }
        } catch (const iomt_error &) {
            return {status::rejected, {}};
        }
        new_acl = occupied_leaves(store);
    }
    database::transaction tx{*db_};
    std::optional<rv_cert> rv;
    std::optional<ru_cert> ru;
    {
        scoped_step s{rec, "ru_rv_certs"};
        rv = acl_proof(env.idx, acl, env.user);
        const auto ctr = as_counter(tree.leaf(*slot)->val);
        if (!rv || !ctr) {
            return {status::rejected, {}};
        }
        ru = counter_update(tree, *slot, *ctr + 1);
        if (!ru) {
            return {status::rejected, {}};
        }
    }
    std::optional<tp_result> res;
    {
        scoped_step s{rec, "module_update"};
        res = module_->f_tp(env, rv, *ru, record->cert());
        if (!res) {
            return {status::rejected, {}};
        }
    }
    scoped_step s{rec, "db_update"};
    auto leaf = *tree.leaf(*slot);
    leaf.val = ru->body.val_new;
    tree.set_leaf(*slot, leaf);
    db_->put_container(container_record::from(res->cr));
    db_->put_acl(env.idx, new_acl);
    tx.commit();
    return {status::ok, res->mu_ack};
}

// ---------------------------------------------------------------------------

info_reply service::info(record_index idx, std::uint64_t ver, const digest &delta, record_index user,
                         step_recorder *rec, bool second_phase) {
    std::lock_guard lock{mu_};
    info_reply reply;
    std::optional<container_record> record;
    std::optional<version_record> version;
    leaf_list acl;
    std::optional<rv_cert> rv1, rv2;

    const bool reuse = second_phase && opts_.reuse_fetch_lookups && memo_ && memo_->idx == idx &&
                       memo_->ver == ver && memo_->epoch == module_->root();
    if (reuse) {
        record = memo_->rec;
        version = memo_->version;
        rv1 = memo_->rv1;
        rv2 = memo_->rv2;
    } else {
        {
            scoped_step s{rec, label("db_lookup", second_phase)};
            record = db_->get_container(idx);
            if (record) {
                if (ver == 0) {
                    ver = record->ver;
                }
                if (ver > record->ver) {
                    reply.c_ctr_hint = record->ctr;
                    return reply;
                }
                if (ver > 0) {
                    version = db_->get_version(idx, ver);
                    if (!version) {
                        return reply;
                    }
                }
                acl = db_->get_acl(idx);
            }
        }
        scoped_step s{rec, label("rv_certs", second_phase)};
        rv1 = container_proof(idx);
        if (record) {
            rv2 = acl_proof(idx, acl, user);
        }
        if (!rv1 || (record && !rv2)) {
            return reply;
        }
    }
    if (record) {
        reply.c_ctr_hint = record->ctr;
    }
    scoped_step s{rec, label("verify", second_phase)};
    std::optional<cr_cert> cr;
    std::optional<vr_cert> vr;
    if (record) {
        cr = record->cert();
    }
    if (version) {
        vr = version->cert();
    }
    reply.response = module_->f_verify(*rv1, rv2, cr, vr, ver, delta, user);
    if (!reply.response) {
        reply.st = status::protocol_error;
    } else {
        reply.st = std::holds_alternative<denial_response>(*reply.response) ? status::denial : status::ok;
    }
    return reply;
}

fetch_reply service::fetch(record_index idx, std::uint64_t ver, record_index user, step_recorder *rec) {
    std::lock_guard lock{mu_};
    fetch_reply reply;
    std::optional<container_record> record;
    std::optional<version_record> version;
    leaf_list acl;
    {
        scoped_step s{rec, "db_lookup"};
        record = db_->get_container(idx);
        if (!record) {
            // Nothing to hand out; the verification phase yields the authenticated denial.
            reply.st = status::ok;
            return reply;
        }
        reply.ver = ver == 0 ? record->ver : ver;
        if (reply.ver > record->ver) {
            return reply;
        }
        if (reply.ver == 0) {
            reply.st = status::ok;
            return reply;
        }
        version = db_->get_version(idx, reply.ver);
        if (!version) {
            return reply;
        }
        reply.blobs = {db_->get_blob(version->blobs.image), db_->get_blob(version->blobs.build),
                       db_->get_blob(version->blobs.compose)};
        reply.mu_cs = version->mu_cs;
        acl = db_->get_acl(idx);
    }
    std::optional<rv_cert> rv1, rv2;
    if (version->encrypted() || opts_.reuse_fetch_lookups) {
        scoped_step s{rec, "rv_certs"};
        rv1 = container_proof(idx);
        rv2 = acl_proof(idx, acl, user);
    }
    if (version->encrypted()) {
        scoped_step s{rec, "secret_retrieval"};
        if (rv1 && rv2) {
            reply.sigma_u = module_->f_rs(*rv1, *rv2, record->cert(), idx, record->ctr, reply.ver, version->sigma_s,
                                          version->mu_cs, user);
        }
    }
    if (opts_.reuse_fetch_lookups && rv1 && rv2) {
        memo_ = fetch_memo{idx, reply.ver, module_->root(), *record, version, *rv1, *rv2};
    }
    reply.st = status::ok;
    return reply;
}

} // namespace tcr
