#pragma once

#include "tcr/certificates.hpp"
#include "tcr/content.hpp"
#include "tcr/iomt.hpp"
#include "tcr/trusted_module.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace tcr {

struct storage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Height of every per-container ACL tree (256 users).
inline constexpr unsigned acl_height = 8;

/// Service-side copy of [C_IDX, C_CTR, C_VER, C_alpha] and its module seal.
struct container_record {
    record_index idx = 0;
    std::uint64_t ctr = 0;
    std::uint64_t ver = 0;
    digest alpha;
    digest rho;

    cr_cert cert() const { return {{idx, ctr, ver, alpha}, rho}; }
    static container_record from(const cr_cert &c) { return {c.body.idx, c.body.ctr, c.body.ver, c.body.alpha, c.rho}; }
    friend bool operator==(const container_record &, const container_record &) = default;
};

struct version_record {
    record_index idx = 0;
    std::uint64_t ver = 0;
    digest mu_cs;
    digest sigma_s;
    digest lambda;
    digest rho;
    blob_hashes blobs;

    vr_cert cert() const { return {{idx, ver, lambda}, rho}; }
    bool encrypted() const noexcept { return !mu_cs.is_zero(); }
    friend bool operator==(const version_record &a, const version_record &b) {
        return a.idx == b.idx && a.ver == b.ver && a.mu_cs == b.mu_cs && a.sigma_s == b.sigma_s &&
               a.lambda == b.lambda && a.rho == b.rho && a.blobs.image == b.blobs.image &&
               a.blobs.build == b.blobs.build && a.blobs.compose == b.blobs.compose;
    }
};

/// Occupied slots of a small tree, in slot order.
using leaf_list = std::vector<std::pair<slot_index, iomt_leaf>>;

leaf_list occupied_leaves(const array_tree_store &s);
array_tree_store tree_from_leaves(const tree_geometry &g, const leaf_list &leaves);
/// Stored form of a small tree without holes: slots are implied by list position, so
/// the bytes carry nothing the tree root does not bind. Throws std::invalid_argument
/// unless the slots are exactly 0..n-1.
bytes encode_leaf_list(const leaf_list &leaves);
leaf_list decode_leaf_list(byte_view raw);

/// ACL of a freshly created container: the owner alone, with access 3.
leaf_list initial_acl(record_index owner);
const tree_geometry &acl_geometry();

/// Sets `user`'s access level in an ACL tree, inserting a placeholder first when the
/// user has no leaf. Deterministic, so client and service reach the same root.
/// Throws std::invalid_argument for a level above 3 and iomt_error when the tree is full.
digest apply_access_edit(iomt &acl, record_index user, std::uint64_t level);

class database;

/// Sparse container IOMT persisted in the database: zero nodes have no row.
class sqlite_tree_store final : public tree_store {
public:
    const tree_geometry &geometry() const override { return geometry_; }
    digest node(std::uint64_t pos) const override;
    void set_node(std::uint64_t pos, const digest &value) override;
    std::optional<iomt_leaf> leaf(slot_index slot) const override;
    void set_leaf(slot_index slot, const std::optional<iomt_leaf> &leaf) override;
    std::optional<slot_index> find_slot(record_index idx) const override;
    std::optional<slot_index> find_below(record_index idx) const override;
    std::optional<slot_index> find_max() const override;
    std::optional<slot_index> free_slot() const override;
    std::uint64_t used_slots() const override;

    std::uint64_t node_rows() const;

private:
    friend class database;
    sqlite_tree_store(database &db, tree_geometry g) : db_{&db}, geometry_{g} {}

    database *db_;
    tree_geometry geometry_;
};

/// SQLite file for records and tree rows, plus a content-addressed blob directory.
class database {
public:
    /// Opens or creates. An existing file must have been created with the same height.
    database(const std::filesystem::path &db_file, const std::filesystem::path &data_dir, unsigned height);
    ~database();
    database(const database &) = delete;
    database &operator=(const database &) = delete;

    const tree_geometry &geometry() const { return tree_.geometry(); }
    sqlite_tree_store &container_tree() { return tree_; }
    const sqlite_tree_store &container_tree() const { return tree_; }

    std::optional<container_record> get_container(record_index idx) const;
    void put_container(const container_record &rec);
    std::uint64_t container_count() const;

    std::optional<version_record> get_version(record_index idx, std::uint64_t ver) const;
    /// Throws storage_error if (idx, ver) already exists.
    void put_version(const version_record &rec);

    leaf_list get_acl(record_index idx) const;
    void put_acl(record_index idx, const leaf_list &leaves);

    /// Stores under data_dir/hex(h(content))/payload unless already present; returns the hash.
    digest put_blob(byte_view content);
    /// Throws storage_error if absent.
    bytes get_blob(const digest &h) const;

    /// True when no container, leaf or node row exists.
    bool empty() const;

    /// Savepoint covering one repository operation; rolls back unless committed.
    class transaction {
    public:
        explicit transaction(database &db);
        ~transaction();
        transaction(const transaction &) = delete;
        transaction &operator=(const transaction &) = delete;
        void commit();

    private:
        database *db_;
        bool open_ = true;
    };

    /// Writes rows in one transaction. Used by bulk prepopulation only.
    void bulk_write(std::span<const digest> nodes, std::span<const std::optional<iomt_leaf>> leaves,
                    std::span<const container_record> containers, std::span<const leaf_list> acls,
                    std::span<const version_record> versions);

private:
    friend class sqlite_tree_store;
    struct statements;

    void exec(const char *sql);
    std::uint64_t meta(const char *key, std::uint64_t fallback) const;
    void set_meta(const char *key, std::uint64_t value);

    sqlite3 *db_ = nullptr;
    std::filesystem::path data_dir_;
    std::unique_ptr<statements> st_;
    sqlite_tree_store tree_;
};

struct prepopulate_options {
    record_index owner = 1;
    std::size_t payload_size = 12 * 1024;
};

struct prepopulate_result {
    digest root;
    std::uint64_t containers = 0;
    blob_set payload;
};

/// Prepopulated containers use even indices 0, 2, 4, ... in slot order, each owned by
/// `owner` (access 3) with one unencrypted version. Requires an empty database and an
/// empty module. Computes everything in memory, then writes in bulk.
prepopulate_result bulk_prepopulate(database &db, trusted_module &module, std::uint64_t count,
                                    const prepopulate_options &opts = {});

/// Deterministic mock payload of the given image size.
blob_set mock_payload(std::size_t image_size);

} // namespace tcr
