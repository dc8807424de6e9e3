#pragma once

#include "tcr/digest.hpp"
#include "tcr/merkle.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace tcr {

using record_index = std::uint64_t;
using slot_index = std::uint64_t;

/// Leaf record (IDX, IDX_next, VAL). VAL = 0 marks a placeholder.
struct iomt_leaf {
    record_index idx = 0;
    record_index next_idx = 0;
    digest val;

    bool is_placeholder() const noexcept { return val.is_zero(); }

    friend bool operator==(const iomt_leaf &, const iomt_leaf &) = default;
};

struct iomt_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Counters live in the low 8 bytes (big-endian) of an otherwise zero digest.
digest counter_value(std::uint64_t counter) noexcept;
/// nullopt if the high 24 bytes are not all zero.
std::optional<std::uint64_t> as_counter(const digest &val) noexcept;

bytes encode_leaf(const iomt_leaf &leaf);
digest leaf_digest(const iomt_leaf &leaf);
/// Absent leaf slots hash to the zero digest.
digest leaf_digest(const std::optional<iomt_leaf> &leaf);

/// True iff leaf (b, b_next) encloses index a.
constexpr bool encloses(record_index b, record_index b_next, record_index a) noexcept {
    return (b < a && a < b_next) || (b_next <= b && b < a) || (a < b_next && b_next <= b);
}

/// Breadth-first node index, root = 0.
struct node_position {
    std::uint64_t index = 0;
    friend bool operator==(const node_position &, const node_position &) = default;
};

/// Fixed-height binary tree layout: 2^h leaves, 2^(h+1) - 1 nodes.
class tree_geometry {
public:
    static constexpr unsigned max_height = 40;

    explicit tree_geometry(unsigned height);

    unsigned height() const noexcept { return height_; }
    std::uint64_t leaf_count() const noexcept { return std::uint64_t{1} << height_; }
    std::uint64_t node_count() const noexcept { return 2 * leaf_count() - 1; }
    bool contains(node_position p) const noexcept { return p.index < node_count(); }
    bool is_leaf_node(node_position p) const noexcept { return p.index >= leaf_count() - 1 && contains(p); }

    node_position leaf_node(slot_index slot) const;
    slot_index slot_of(node_position p) const;

    /// Bytes used by the dense array representation.
    std::uint64_t dense_memory_bytes() const noexcept;

    friend bool operator==(const tree_geometry &, const tree_geometry &) = default;

private:
    unsigned height_;
};

struct node_links {
    std::optional<node_position> parent;
    std::optional<node_position> left_child;
    std::optional<node_position> right_child;
};

/// left = 2i + 1, right = 2i + 2, parent = floor((i - 1) / 2); absent where the
/// relative does not exist.
node_links tree_indices(const tree_geometry &g, node_position p);

/// Persistence contract behind an IOMT. Node reads of unstored positions return zero.
class tree_store {
public:
    virtual ~tree_store() = default;

    virtual const tree_geometry &geometry() const = 0;

    virtual digest node(std::uint64_t pos) const = 0;
    virtual void set_node(std::uint64_t pos, const digest &value) = 0;

    virtual std::optional<iomt_leaf> leaf(slot_index slot) const = 0;
    virtual void set_leaf(slot_index slot, const std::optional<iomt_leaf> &leaf) = 0;

    virtual std::optional<slot_index> find_slot(record_index idx) const = 0;
    /// Slot of the leaf with the greatest idx strictly below `idx`.
    virtual std::optional<slot_index> find_below(record_index idx) const = 0;
    /// Slot of the leaf with the greatest idx overall.
    virtual std::optional<slot_index> find_max() const = 0;
    /// Lowest-numbered empty slot.
    virtual std::optional<slot_index> free_slot() const = 0;
    virtual std::uint64_t used_slots() const = 0;
};

/// Dense in-memory array layout.
class array_tree_store final : public tree_store {
public:
    explicit array_tree_store(tree_geometry g);
    /// Bulk-builds node values from a full leaf array (size must equal leaf_count).
    array_tree_store(tree_geometry g, std::vector<std::optional<iomt_leaf>> leaves);

    const tree_geometry &geometry() const override { return geometry_; }
    digest node(std::uint64_t pos) const override;
    void set_node(std::uint64_t pos, const digest &value) override;
    std::optional<iomt_leaf> leaf(slot_index slot) const override;
    void set_leaf(slot_index slot, const std::optional<iomt_leaf> &leaf) override;
    std::optional<slot_index> find_slot(record_index idx) const override;
    std::optional<slot_index> find_below(record_index idx) const override;
    std::optional<slot_index> find_max() const override;
    std::optional<slot_index> free_slot() const override;
    std::uint64_t used_slots() const override { return by_index_.size(); }

    const std::vector<digest> &nodes() const noexcept { return nodes_; }
    const std::vector<std::optional<iomt_leaf>> &leaves() const noexcept { return leaves_; }

private:
    tree_geometry geometry_;
    std::vector<digest> nodes_;
    std::vector<std::optional<iomt_leaf>> leaves_;
    std::map<record_index, slot_index> by_index_;
    std::set<slot_index> holes_;
    slot_index high_water_ = 0;
};

/// One slot rewrite.
struct leaf_edit {
    slot_index slot = 0;
    std::optional<iomt_leaf> before;
    std::optional<iomt_leaf> after;
};

/// Two-step edit that inserts (or removes) a placeholder while keeping the
/// circular linkage intact. `linker` is absent when the tree is (or becomes) empty.
struct placeholder_plan {
    std::optional<leaf_edit> linker;
    leaf_edit placeholder;
};

/// Index-ordered Merkle tree over a tree_store.
class iomt {
public:
    explicit iomt(tree_store &store) : store_{&store} {}

    const tree_geometry &geometry() const { return store_->geometry(); }
    digest root() const { return store_->node(0); }
    std::uint64_t size() const { return store_->used_slots(); }

    std::optional<iomt_leaf> leaf(slot_index slot) const;
    complement_path path(slot_index slot) const;

    /// Stores the leaf (or clears the slot) and recomputes the h + 1 nodes above it.
    digest set_leaf(slot_index slot, const std::optional<iomt_leaf> &leaf);

    std::optional<slot_index> find(record_index idx) const { return store_->find_slot(idx); }
    /// Slot of the leaf enclosing an absent index; nullopt when idx is present or the tree is empty.
    std::optional<slot_index> encloser_of(record_index idx) const;
    /// Slot of the leaf whose next_idx is `idx` (its predecessor in the circular list).
    std::optional<slot_index> predecessor_of(record_index idx) const;

    placeholder_plan plan_insert(record_index new_idx) const;
    placeholder_plan plan_remove(record_index idx) const;
    digest apply(const placeholder_plan &plan);

private:
    void check_slot(slot_index slot) const;

    tree_store *store_;
};

/// Full bottom-up recomputation over a complete leaf array with no incremental
/// state. Size must be a power of two.
digest oracle_root(std::span<const std::optional<iomt_leaf>> leaves);

} // namespace tcr
