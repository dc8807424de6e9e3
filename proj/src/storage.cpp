#include "tcr/storage.hpp"

#include "tcr/iomt_kernels.hpp"

#include <sqlite3.h>

#include <fstream>
#include <random>
#include <string>

namespace tcr {

namespace {

// Indices are unsigned 64-bit; flipping the sign bit keeps SQLite's signed ordering consistent.
constexpr std::uint64_t sign_flip = std::uint64_t{1} << 63;

sqlite3_int64 to_key(std::uint64_t v) {
    return static_cast<sqlite3_int64>(v ^ sign_flip);
}

std::uint64_t from_key(sqlite3_int64 k) {
    return static_cast<std::uint64_t>(k) ^ sign_flip;
}

class stmt {
public:
    stmt(sqlite3 *db, const char *sql) : db_{db} {
        if (sqlite3_prepare_v3(db, sql, -1, SQLITE_PREPARE_PERSISTENT, &s_, nullptr) != SQLITE_OK) {
            throw storage_error{std::string{"prepare failed: "} + sqlite3_errmsg(db) + " in " + sql};
        }
    }
    ~stmt() { sqlite3_finalize(s_); }
    stmt(const stmt &) = delete;
    stmt &operator=(const stmt &) = delete;

    // A use() binds from 1 and resets on destruction.
    class use {
    public:
        explicit use(stmt &s) : s_{&s} {}
        ~use() {
            sqlite3_reset(s_->s_);
            sqlite3_clear_bindings(s_->s_);
        }
        use(const use &) = delete;
        use &operator=(const use &) = delete;

        use &bind(sqlite3_int64 v) {
            check(sqlite3_bind_int64(s_->s_, ++n_, v));
            return *this;
        }
        use &bind(const digest &d) {
            check(sqlite3_bind_blob(s_->s_, ++n_, d.data.data(), static_cast<int>(d.size), SQLITE_STATIC));
            return *this;
        }
        use &bind(const char *text) {
            check(sqlite3_bind_text(s_->s_, ++n_, text, -1, SQLITE_STATIC));
            return *this;
        }
        use &bind(const bytes &b) {
            check(sqlite3_bind_blob(s_->s_, ++n_, b.data(), static_cast<int>(b.size()), SQLITE_STATIC));
            return *this;
        }
        /// True while a row is available.
        bool step() {
            const int rc = sqlite3_step(s_->s_);
            if (rc == SQLITE_ROW) {
                return true;
            }
            if (rc != SQLITE_DONE) {
                throw storage_error{std::string{"step failed: "} + sqlite3_errmsg(s_->db_)};
            }
            return false;
        }
        void run() { step(); }

        sqlite3_int64 integer(int col) const { return sqlite3_column_int64(s_->s_, col); }
        bool is_null(int col) const { return sqlite3_column_type(s_->s_, col) == SQLITE_NULL; }
        digest get_digest(int col) const {
            const auto *p = static_cast<const std::uint8_t *>(sqlite3_column_blob(s_->s_, col));
            const int n = sqlite3_column_bytes(s_->s_, col);
            return digest::from_bytes(byte_view{p, static_cast<std::size_t>(n)});
        }
        bytes blob(int col) const {
            const auto *p = static_cast<const std::uint8_t *>(sqlite3_column_blob(s_->s_, col));
            const int n = sqlite3_column_bytes(s_->s_, col);
            return bytes(p, p + n);
        }

    private:
        void check(int rc) const {
            if (rc != SQLITE_OK) {
                throw storage_error{std::string{"bind failed: "} + sqlite3_errmsg(s_->db_)};
            }
        }

        stmt *s_;
        int n_ = 0;
    };

private:
    sqlite3 *db_;
    sqlite3_stmt *s_ = nullptr;
};

constexpr const char *schema = R"sql(
CREATE TABLE IF NOT EXISTS meta(key TEXT PRIMARY KEY, value INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS nodes(pos INTEGER PRIMARY KEY, digest BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS leaves(slot INTEGER PRIMARY KEY, idx INTEGER NOT NULL UNIQUE,
                                  next_idx INTEGER NOT NULL, val BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS holes(slot INTEGER PRIMARY KEY);
CREATE TABLE IF NOT EXISTS containers(idx INTEGER PRIMARY KEY, ctr INTEGER NOT NULL, ver INTEGER NOT NULL,
                                      alpha BLOB NOT NULL, rho BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS acls(idx INTEGER PRIMARY KEY, leaves BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS versions(idx INTEGER NOT NULL, ver INTEGER NOT NULL, mu_cs BLOB NOT NULL,
                                    sigma_s BLOB NOT NULL, lambda BLOB NOT NULL, rho BLOB NOT NULL,
                                    h_ci BLOB NOT NULL, h_bc BLOB NOT NULL, h_cf BLOB NOT NULL,
                                    PRIMARY KEY(idx, ver)) WITHOUT ROWID;
)sql";

} // namespace

struct database::statements {
    explicit statements(sqlite3 *db)
        : node_get{db, "SELECT digest FROM nodes WHERE pos = ?"},
          node_put{db, "INSERT OR REPLACE INTO nodes(pos, digest) VALUES(?, ?)"},
          node_del{db, "DELETE FROM nodes WHERE pos = ?"},
          node_count{db, "SELECT COUNT(*) FROM nodes"},
          leaf_get{db, "SELECT idx, next_idx, val FROM leaves WHERE slot = ?"},
          leaf_put{db, "INSERT OR REPLACE INTO leaves(slot, idx, next_idx, val) VALUES(?, ?, ?, ?)"},
          leaf_del{db, "DELETE FROM leaves WHERE slot = ?"},
          leaf_by_idx{db, "SELECT slot FROM leaves WHERE idx = ?"},
          leaf_below{db, "SELECT slot FROM leaves WHERE idx < ? ORDER BY idx DESC LIMIT 1"},
          leaf_max{db, "SELECT slot FROM leaves ORDER BY idx DESC LIMIT 1"},
          hole_min{db, "SELECT MIN(slot) FROM holes"},
          hole_put{db, "INSERT OR IGNORE INTO holes(slot) VALUES(?)"},
          hole_del{db, "DELETE FROM holes WHERE slot = ?"},
          meta_get{db, "SELECT value FROM meta WHERE key = ?"},
          meta_put{db, "INSERT OR REPLACE INTO meta(key, value) VALUES(?, ?)"},
          container_get{db, "SELECT ctr, ver, alpha, rho FROM containers WHERE idx = ?"},
          container_put{db, "INSERT OR REPLACE INTO containers(idx, ctr, ver, alpha, rho) VALUES(?, ?, ?, ?, ?)"},
          container_count{db, "SELECT COUNT(*) FROM containers"},
          acl_get{db, "SELECT leaves FROM acls WHERE idx = ?"},
          acl_put{db, "INSERT OR REPLACE INTO acls(idx, leaves) VALUES(?, ?)"},
          version_get{db, "SELECT mu_cs, sigma_s, lambda, rho, h_ci, h_bc, h_cf FROM versions "
                          "WHERE idx = ? AND ver = ?"},
          version_put{db, "INSERT INTO versions(idx, ver, mu_cs, sigma_s, lambda, rho, h_ci, h_bc, h_cf) "
                          "VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?)"},
          version_exists{db, "SELECT 1 FROM versions WHERE idx = ? AND ver = ?"},
          any_row{db, "SELECT EXISTS(SELECT 1 FROM leaves) OR EXISTS(SELECT 1 FROM nodes) "
                      "OR EXISTS(SELECT 1 FROM containers)"},
          savepoint{db, "SAVEPOINT op"},
          release{db, "RELEASE op"},
          rollback{db, "ROLLBACK TO op"} {}

    stmt node_get, node_put, node_del, node_count;
    stmt leaf_get, leaf_put, leaf_del, leaf_by_idx, leaf_below, leaf_max;
    stmt hole_min, hole_put, hole_del;
    stmt meta_get, meta_put;
    stmt container_get, container_put, container_count;
    stmt acl_get, acl_put;
    stmt version_get, version_put, version_exists;
    stmt any_row;
    stmt savepoint, release, rollback;
};

// ---------------------------------------------------------------------------

leaf_list occupied_leaves(const array_tree_store &s) {
    leaf_list out;
    const auto &leaves = s.leaves();
    for (slot_index i = 0; i < leaves.size(); ++i) {
        if (leaves[i]) {
            out.emplace_back(i, *leaves[i]);
        }
    }
    return out;
}

array_tree_store tree_from_leaves(const tree_geometry &g, const leaf_list &leaves) {
    std::vector<std::optional<iomt_leaf>> full(g.leaf_count());
    for (const auto &[slot, leaf] : leaves) {
        if (slot >= full.size()) {
            throw storage_error{"leaf slot outside tree"};
        }
        full[slot] = leaf;
    }
    return array_tree_store{g, std::move(full)};
}

bytes encode_leaf_list(const leaf_list &leaves) {
    canonical_writer w;
    w.u64(leaves.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const auto &[slot, leaf] = leaves[i];
        if (slot != i) {
            throw std::invalid_argument{"leaf list slots must be 0..n-1 in order"};
        }
        w.u64(leaf.idx).u64(leaf.next_idx).put(leaf.val);
    }
    return w.take();
}

leaf_list decode_leaf_list(byte_view raw) {
    canonical_reader r{raw};
    const auto n = r.u64();
    if (n > raw.size() / 48) {
        throw decode_error{"leaf list length out of range"};
    }
    leaf_list out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        iomt_leaf leaf;
        leaf.idx = r.u64();
        leaf.next_idx = r.u64();
        leaf.val = r.get_digest();
        out.emplace_back(i, leaf);
    }
    r.expect_done();
    return out;
}

leaf_list initial_acl(record_index owner) {
    return {{0, iomt_leaf{owner, owner, counter_value(3)}}};
}

const tree_geometry &acl_geometry() {
    static const tree_geometry g{acl_height};
    return g;
}

digest apply_access_edit(iomt &acl, record_index user, std::uint64_t level) {
    if (level > 3) {
        throw std::invalid_argument{"access level must be 0..3"};
    }
    auto slot = acl.find(user);
    if (!slot) {
        const auto plan = acl.plan_insert(user);
        acl.apply(plan);
        slot = plan.placeholder.slot;
    }
    auto leaf = *acl.leaf(*slot);
    leaf.val = counter_value(level);
    return acl.set_leaf(*slot, leaf);
}

// ---------------------------------------------------------------------------

digest sqlite_tree_store::node(std::uint64_t pos) const {
    stmt::use q{db_->st_->node_get};
    q.bind(static_cast<sqlite3_int64>(pos));
    return q.step() ? q.get_digest(0) : digest::zero();
}

void sqlite_tree_store::set_node(std::uint64_t pos, const digest &value) {
    if (!geometry_.contains(node_position{pos})) {
        throw std::out_of_range{"node position outside tree"};
    }
    if (value.is_zero()) {
        stmt::use q{db_->st_->node_del};
        q.bind(static_cast<sqlite3_int64>(pos)).run();
    } else {
        stmt::use q{db_->st_->node_put};
        q.bind(static_cast<sqlite3_int64>(pos)).bind(value).run();
    }
}

std::optional<iomt_leaf> sqlite_tree_store::leaf(slot_index slot) const {
    stmt::use q{db_->st_->leaf_get};
    q.bind(static_cast<sqlite3_int64>(slot));
    if (!q.step()) {
        return std::nullopt;
    }
    return iomt_leaf{from_key(q.integer(0)), from_key(q.integer(1)), q.get_digest(2)};
}

void sqlite_tree_store::set_leaf(slot_index slot, const std::optional<iomt_leaf> &leaf) {
    if (slot >= geometry_.leaf_count()) {
        throw std::out_of_range{"leaf slot outside tree"};
    }
    const bool present = this->leaf(slot).has_value();
    auto &st = *db_->st_;
    if (leaf) {
        {
            stmt::use q{st.leaf_put};
            q.bind(static_cast<sqlite3_int64>(slot)).bind(to_key(leaf->idx)).bind(to_key(leaf->next_idx));
            q.bind(leaf->val).run();
        }
        {
            stmt::use q{st.hole_del};
            q.bind(static_cast<sqlite3_int64>(slot)).run();
        }
        const auto high = db_->meta("high_water", 0);
        if (slot >= high) {
            for (slot_index s = high; s < slot; ++s) {
                stmt::use q{st.hole_put};
                q.bind(static_cast<sqlite3_int64>(s)).run();
            }
            db_->set_meta("high_water", slot + 1);
        }
        if (!present) {
            db_->set_meta("leaf_count", db_->meta("leaf_count", 0) + 1);
        }
    } else if (present) {
        {
            stmt::use q{st.leaf_del};
            q.bind(static_cast<sqlite3_int64>(slot)).run();
        }
        {
            stmt::use q{st.hole_put};
            q.bind(static_cast<sqlite3_int64>(slot)).run();
        }
        db_->set_meta("leaf_count", db_->meta("leaf_count", 0) - 1);
    }
}

std::optional<slot_index> sqlite_tree_store::find_slot(record_index idx) const {
    stmt::use q{db_->st_->leaf_by_idx};
    q.bind(to_key(idx));
    if (!q.step()) {
        return std::nullopt;
    }
    return static_cast<slot_index>(q.integer(0));
}

std::optional<slot_index> sqlite_tree_store::find_below(record_index idx) const {
    stmt::use q{db_->st_->leaf_below};
    q.bind(to_key(idx));
    if (!q.step()) {
        return std::nullopt;
    }
    return static_cast<slot_index>(q.integer(0));
}

std::optional<slot_index> sqlite_tree_store::find_max() const {
    stmt::use q{db_->st_->leaf_max};
    if (!q.step()) {
        return std::nullopt;
    }
    return static_cast<slot_index>(q.integer(0));
}

std::optional<slot_index> sqlite_tree_store::free_slot() const {
    {
        stmt::use q{db_->st_->hole_min};
        if (q.step() && !q.is_null(0)) {
            return static_cast<slot_index>(q.integer(0));
        }
    }
    const auto high = db_->meta("high_water", 0);
    if (high < geometry_.leaf_count()) {
        return high;
    }
    return std::nullopt;
}

std::uint64_t sqlite_tree_store::used_slots() const {
    return db_->meta("leaf_count", 0);
}

std::uint64_t sqlite_tree_store::node_rows() const {
    stmt::use q{db_->st_->node_count};
    q.step();
    return static_cast<std::uint64_t>(q.integer(0));
}

// ---------------------------------------------------------------------------

database::database(const std::filesystem::path &db_file, const std::filesystem::path &data_dir, unsigned height)
    : data_dir_{data_dir}, tree_{*this, tree_geometry{height}} {
    if (db_file.has_parent_path()) {
        std::filesystem::create_directories(db_file.parent_path());
    }
    std::filesystem::create_directories(data_dir_);
    if (sqlite3_open(db_file.c_str(), &db_) != SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw storage_error{"cannot open database: " + msg};
    }
    try {
        exec("PRAGMA journal_mode=WAL; PRAGMA synchronous=NORMAL; PRAGMA temp_store=MEMORY;"
             "PRAGMA cache_size=-262144;");
        exec(schema);
        st_ = std::make_unique<statements>(db_);
        const auto stored = meta("height", UINT64_MAX);
        if (stored == UINT64_MAX) {
            set_meta("height", height);
        } else if (stored != height) {
            throw storage_error{"database was created with height " + std::to_string(stored)};
        }
    } catch (...) {
        st_.reset();
        sqlite3_close(db_);
        throw;
    }
}

database::~database() {
    st_.reset();
    sqlite3_close(db_);
}

void database::exec(const char *sql) {
    char *err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw storage_error{"sqlite: " + msg};
    }
}

std::uint64_t database::meta(const char *key, std::uint64_t fallback) const {
    stmt::use q{st_->meta_get};
    q.bind(key);
    return q.step() ? static_cast<std::uint64_t>(q.integer(0)) : fallback;
}

void database::set_meta(const char *key, std::uint64_t value) {
    stmt::use q{st_->meta_put};
    q.bind(key).bind(static_cast<sqlite3_int64>(value)).run();
}

std::optional<container_record> database::get_container(record_index idx) const {
    stmt::use q{st_->container_get};
    q.bind(to_key(idx));
    if (!q.step()) {
        return std::nullopt;
    }
    return container_record{idx, static_cast<std::uint64_t>(q.integer(0)), static_cast<std::uint64_t>(q.integer(1)),
                            q.get_digest(2), q.get_digest(3)};
}

void database::put_container(const container_record &rec) {
    stmt::use q{st_->container_put};
    q.bind(to_key(rec.idx)).bind(static_cast<sqlite3_int64>(rec.ctr)).bind(static_cast<sqlite3_int64>(rec.ver));
    q.bind(rec.alpha).bind(rec.rho).run();
}

std::uint64_t database::container_count() const {
    stmt::use q{st_->container_count};
    q.step();
    return static_cast<std::uint64_t>(q.integer(0));
}

std::optional<version_record> database::get_version(record_index idx, std::uint64_t ver) const {
    stmt::use q{st_->version_get};
    q.bind(to_key(idx)).bind(static_cast<sqlite3_int64>(ver));
    if (!q.step()) {
        return std::nullopt;
    }
    version_record rec;
    rec.idx = idx;
    rec.ver = ver;
    rec.mu_cs = q.get_digest(0);
    rec.sigma_s = q.get_digest(1);
    rec.lambda = q.get_digest(2);
    rec.rho = q.get_digest(3);
    rec.blobs = {q.get_digest(4), q.get_digest(5), q.get_digest(6)};
    return rec;
}

void database::put_version(const version_record &rec) {
    {
        stmt::use q{st_->version_exists};
        q.bind(to_key(rec.idx)).bind(static_cast<sqlite3_int64>(rec.ver));
        if (q.step()) {
            throw storage_error{"version record already exists"};
        }
    }
    stmt::use q{st_->version_put};
    q.bind(to_key(rec.idx)).bind(static_cast<sqlite3_int64>(rec.ver)).bind(rec.mu_cs).bind(rec.sigma_s);
    q.bind(rec.lambda).bind(rec.rho).bind(rec.blobs.image).bind(rec.blobs.build).bind(rec.blobs.compose).run();
}

leaf_list database::get_acl(record_index idx) const {
    stmt::use q{st_->acl_get};
    q.bind(to_key(idx));
    if (!q.step()) {
        return {};
    }
    return decode_leaf_list(q.blob(0));
}

void database::put_acl(record_index idx, const leaf_list &leaves) {
    const bytes raw = encode_leaf_list(leaves);
    stmt::use q{st_->acl_put};
    q.bind(to_key(idx)).bind(raw).run();
}

digest database::put_blob(byte_view content) {
    const digest h = hash(content);
    const auto dir = data_dir_ / h.hex();
    const auto file = dir / "payload";
    if (std::filesystem::exists(file)) {
        return h;
    }
    std::filesystem::create_directories(dir);
    const auto tmp = dir / "payload.tmp";
    {
        std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
        out.write(reinterpret_cast<const char *>(content.data()), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw storage_error{"cannot write blob " + h.hex()};
        }
    }
    std::filesystem::rename(tmp, file);
    return h;
}

bytes database::get_blob(const digest &h) const {
    std::ifstream in{data_dir_ / h.hex() / "payload", std::ios::binary};
    if (!in) {
        throw storage_error{"missing blob " + h.hex()};
    }
    return bytes{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

bool database::empty() const {
    stmt::use q{st_->any_row};
    q.step();
    return q.integer(0) == 0;
}

database::transaction::transaction(database &db) : db_{&db} {
    stmt::use q{db.st_->savepoint};
    q.run();
}

database::transaction::~transaction() {
    if (!open_) {
        return;
    }
    try {
        {
            stmt::use q{db_->st_->rollback};
            q.run();
        }
        stmt::use q{db_->st_->release};
        q.run();
    } catch (...) {
        // Nothing sensible to do in a destructor; the connection reports the error on next use.
    }
}

void database::transaction::commit() {
    stmt::use q{db_->st_->release};
    q.run();
    open_ = false;
}

void database::bulk_write(std::span<const digest> nodes, std::span<const std::optional<iomt_leaf>> leaves,
                          std::span<const container_record> containers, std::span<const leaf_list> acls,
                          std::span<const version_record> versions) {
    if (acls.size() != containers.size()) {
        throw std::invalid_argument{"one ACL per container required"};
    }
    transaction tx{*this};
    for (std::uint64_t p = 0; p < nodes.size(); ++p) {
        if (!nodes[p].is_zero()) {
            stmt::use q{st_->node_put};
            q.bind(static_cast<sqlite3_int64>(p)).bind(nodes[p]).run();
        }
    }
    std::uint64_t used = 0;
    std::uint64_t high = 0;
    for (slot_index s = 0; s < leaves.size(); ++s) {
        if (!leaves[s]) {
            continue;
        }
        stmt::use q{st_->leaf_put};
        q.bind(static_cast<sqlite3_int64>(s)).bind(to_key(leaves[s]->idx)).bind(to_key(leaves[s]->next_idx));
        q.bind(leaves[s]->val).run();
        ++used;
        high = s + 1;
    }
    for (slot_index s = 0; s < high; ++s) {
        if (!leaves[s]) {
            stmt::use q{st_->hole_put};
            q.bind(static_cast<sqlite3_int64>(s)).run();
        }
    }
    set_meta("high_water", high);
    set_meta("leaf_count", used);
    for (std::size_t i = 0; i < containers.size(); ++i) {
        put_container(containers[i]);
        put_acl(containers[i].idx, acls[i]);
    }
    for (const auto &v : versions) {
        stmt::use q{st_->version_put};
        q.bind(to_key(v.idx)).bind(static_cast<sqlite3_int64>(v.ver)).bind(v.mu_cs).bind(v.sigma_s);
        q.bind(v.lambda).bind(v.rho).bind(v.blobs.image).bind(v.blobs.build).bind(v.blobs.compose).run();
    }
    tx.commit();
}

// ---------------------------------------------------------------------------

blob_set mock_payload(std::size_t image_size) {
    blob_set b;
    b.image.resize(image_size);
    std::mt19937_64 rng{0x7463725f696d67ULL};
    for (auto &byte : b.image) {
        byte = static_cast<std::uint8_t>(rng());
    }
    const std::string build = "FROM scratch\nCOPY app /app\nENTRYPOINT [\"/app\"]\n";
    const std::string compose = "services:\n  app:\n    build: .\n";
    b.build.assign(build.begin(), build.end());
    b.compose.assign(compose.begin(), compose.end());
    return b;
}

prepopulate_result bulk_prepopulate(database &db, trusted_module &module, std::uint64_t count,
                                    const prepopulate_options &opts) {
    const auto &g = db.geometry();
    if (!db.empty() || !module.root().is_zero()) {
        throw storage_error{"bulk prepopulation needs an empty store and module"};
    }
    if (count > g.leaf_count() || (count > 0 && 2 * (count - 1) < count - 1)) {
        throw std::invalid_argument{"prepopulation count exceeds tree capacity"};
    }
    prepopulate_result result;
    result.containers = count;
    result.payload = mock_payload(opts.payload_size);
    if (count == 0) {
        return result;
    }

    const digest live = counter_value(2);
    std::vector<std::optional<iomt_leaf>> leaves(g.leaf_count());
    for (std::uint64_t i = 0; i < count; ++i) {
        leaves[i] = iomt_leaf{2 * i, i + 1 == count ? 0 : 2 * (i + 1), live};
    }
    const auto nodes = kernels::build_node_array(g, kernels::hash_leaves(leaves));
    result.root = nodes[0];

    const leaf_list acl = initial_acl(opts.owner);
    // A single leaf propagates unchanged through zero siblings, so it is also the ACL root.
    const digest alpha = leaf_digest(acl.front().second);

    const blob_hashes hashes{db.put_blob(result.payload.image), db.put_blob(result.payload.build),
                             db.put_blob(result.payload.compose)};
    const digest lambda = compute_lambda(hashes, digest::zero());

    std::vector<cr_body> cr_bodies(count);
    std::vector<vr_body> vr_bodies(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        cr_bodies[i] = cr_body{2 * i, 2, 1, alpha};
        vr_bodies[i] = vr_body{2 * i, 1, lambda};
    }
    const auto seals = module.provision_bulk(result.root, cr_bodies, vr_bodies);

    std::vector<container_record> containers(count);
    std::vector<leaf_list> acls(count, acl);
    std::vector<version_record> versions(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        containers[i] = container_record::from(cr_cert{cr_bodies[i], seals.container_rhos[i]});
        versions[i] = version_record{2 * i, 1, digest::zero(), digest::zero(), lambda, seals.version_rhos[i], hashes};
    }
    db.bulk_write(nodes, leaves, containers, acls, versions);
    return result;
}

} // namespace tcr
