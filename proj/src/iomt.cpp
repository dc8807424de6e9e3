#include "tcr/iomt.hpp"

#include "tcr/canonical.hpp"
#include "tcr/iomt_kernels.hpp"

#include <algorithm>

namespace tcr {

digest counter_value(std::uint64_t counter) noexcept {
    digest d;
    for (int i = 0; i < 8; ++i) {
        d.data[digest::size - 1 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
    }
    return d;
}

std::optional<std::uint64_t> as_counter(const digest &val) noexcept {
    for (std::size_t i = 0; i < digest::size - 8; ++i) {
        if (val.data[i] != 0) {
            return std::nullopt;
        }
    }
    std::uint64_t v = 0;
    for (std::size_t i = digest::size - 8; i < digest::size; ++i) {
        v = (v << 8) | val.data[i];
    }
    return v;
}

bytes encode_leaf(const iomt_leaf &leaf) {
    canonical_writer w;
    w.u64(leaf.idx).u64(leaf.next_idx).put(leaf.val);
    return w.take();
}

digest leaf_digest(const iomt_leaf &leaf) {
    return hash(encode_leaf(leaf));
}

digest leaf_digest(const std::optional<iomt_leaf> &leaf) {
    return leaf ? leaf_digest(*leaf) : digest::zero();
}

tree_geometry::tree_geometry(unsigned height) : height_{height} {
    if (height > max_height) {
        throw std::invalid_argument{"tree height exceeds supported maximum"};
    }
}

node_position tree_geometry::leaf_node(slot_index slot) const {
    if (slot >= leaf_count()) {
        throw std::out_of_range{"leaf slot out of range"};
    }
    return {leaf_count() - 1 + slot};
}

slot_index tree_geometry::slot_of(node_position p) const {
    if (!is_leaf_node(p)) {
        throw std::out_of_range{"node is not at the leaf level"};
    }
    return p.index - (leaf_count() - 1);
}

std::uint64_t tree_geometry::dense_memory_bytes() const noexcept {
    return sizeof(iomt_leaf) * leaf_count() + sizeof(digest) * node_count();
}

node_links tree_indices(const tree_geometry &g, node_position p) {
    if (!g.contains(p)) {
        throw std::out_of_range{"node position outside tree"};
    }
    node_links links;
    if (p.index != 0) {
        links.parent = node_position{(p.index - 1) / 2};
    }
    if (!g.is_leaf_node(p)) {
        links.left_child = node_position{2 * p.index + 1};
        links.right_child = node_position{2 * p.index + 2};
    }
    return links;
}

// ---------------------------------------------------------------------------

array_tree_store::array_tree_store(tree_geometry g)
    : geometry_{g}, nodes_(g.node_count()), leaves_(g.leaf_count()) {}

array_tree_store::array_tree_store(tree_geometry g, std::vector<std::optional<iomt_leaf>> leaves)
    : geometry_{g}, leaves_(std::move(leaves)) {
    if (leaves_.size() != g.leaf_count()) {
        throw std::invalid_argument{"leaf array size does not match geometry"};
    }
    nodes_ = kernels::build_node_array(g, kernels::hash_leaves(leaves_));
    for (slot_index s = 0; s < leaves_.size(); ++s) {
        if (leaves_[s]) {
            if (!by_index_.emplace(leaves_[s]->idx, s).second) {
                throw iomt_error{"duplicate index in leaf array"};
            }
            high_water_ = s + 1;
        }
    }
    for (slot_index s = 0; s < high_water_; ++s) {
        if (!leaves_[s]) {
            holes_.insert(s);
        }
    }
}

digest array_tree_store::node(std::uint64_t pos) const {
    return nodes_.at(pos);
}

void array_tree_store::set_node(std::uint64_t pos, const digest &value) {
    nodes_.at(pos) = value;
}

std::optional<iomt_leaf> array_tree_store::leaf(slot_index slot) const {
    return leaves_.at(slot);
}

void array_tree_store::set_leaf(slot_index slot, const std::optional<iomt_leaf> &leaf) {
    auto &cur = leaves_.at(slot);
    if (cur) {
        by_index_.erase(cur->idx);
    }
    cur = leaf;
    if (leaf) {
        by_index_[leaf->idx] = slot;
        holes_.erase(slot);
        if (slot >= high_water_) {
            for (slot_index s = high_water_; s < slot; ++s) {
                holes_.insert(s);
            }
            high_water_ = slot + 1;
        }
    } else if (slot < high_water_) {
        holes_.insert(slot);
        while (high_water_ > 0 && holes_.count(high_water_ - 1) != 0) {
            holes_.erase(--high_water_);
        }
    }
}

std::optional<slot_index> array_tree_store::find_slot(record_index idx) const {
    auto it = by_index_.find(idx);
    if (it == by_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<slot_index> array_tree_store::find_below(record_index idx) const {
    auto it = by_index_.lower_bound(idx);
    if (it == by_index_.begin()) {
        return std::nullopt;
    }
    return std::prev(it)->second;
}

std::optional<slot_index> array_tree_store::find_max() const {
    if (by_index_.empty()) {
        return std::nullopt;
    }
    return by_index_.rbegin()->second;
}

std::optional<slot_index> array_tree_store::free_slot() const {
    if (!holes_.empty()) {
        return *holes_.begin();
    }
    if (high_water_ < geometry_.leaf_count()) {
        return high_water_;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

void iomt::check_slot(slot_index slot) const {
    if (slot >= geometry().leaf_count()) {
        throw std::out_of_range{"leaf slot out of range"};
    }
}

std::optional<iomt_leaf> iomt::leaf(slot_index slot) const {
    check_slot(slot);
    return store_->leaf(slot);
}

complement_path iomt::path(slot_index slot) const {
    check_slot(slot);
    complement_path out;
    out.reserve(geometry().height());
    std::uint64_t pos = geometry().leaf_node(slot).index;
    while (pos != 0) {
        // Odd positions are left children.
        if (pos % 2 == 1) {
            out.push_back({store_->node(pos + 1), order::right});
        } else {
            out.push_back({store_->node(pos - 1), order::left});
        }
        pos = (pos - 1) / 2;
    }
    return out;
}

digest iomt::set_leaf(slot_index slot, const std::optional<iomt_leaf> &leaf) {
    check_slot(slot);
    store_->set_leaf(slot, leaf);
    std::uint64_t pos = geometry().leaf_node(slot).index;
    digest value = leaf_digest(leaf);
    store_->set_node(pos, value);
    while (pos != 0) {
        const bool is_left = pos % 2 == 1;
        const digest sibling = store_->node(is_left ? pos + 1 : pos - 1);
        value = parent(sibling, value, is_left ? order::right : order::left);
        pos = (pos - 1) / 2;
        store_->set_node(pos, value);
    }
    return value;
}

std::optional<slot_index> iomt::encloser_of(record_index idx) const {
    if (store_->find_slot(idx)) {
        return std::nullopt;
    }
    if (auto below = store_->find_below(idx)) {
        return below;
    }
    return store_->find_max();
}

std::optional<slot_index> iomt::predecessor_of(record_index idx) const {
    if (auto below = store_->find_below(idx)) {
        return below;
    }
    return store_->find_max();
}

placeholder_plan iomt::plan_insert(record_index new_idx) const {
    if (store_->find_slot(new_idx)) {
        throw iomt_error{"index already present"};
    }
    const auto free = store_->free_slot();
    if (!free) {
        throw iomt_error{"tree is full"};
    }
    placeholder_plan plan;
    const auto enc_slot = encloser_of(new_idx);
    if (!enc_slot) {
        plan.placeholder = {*free, std::nullopt, iomt_leaf{new_idx, new_idx, digest::zero()}};
        return plan;
    }
    const iomt_leaf enc = *store_->leaf(*enc_slot);
    iomt_leaf updated = enc;
    updated.next_idx = new_idx;
    plan.linker = leaf_edit{*enc_slot, enc, updated};
    plan.placeholder = {*free, std::nullopt, iomt_leaf{new_idx, enc.next_idx, digest::zero()}};
    return plan;
}

placeholder_plan iomt::plan_remove(record_index idx) const {
    const auto slot = store_->find_slot(idx);
    if (!slot) {
        throw iomt_error{"index not present"};
    }
    const iomt_leaf target = *store_->leaf(*slot);
    if (!target.is_placeholder()) {
        throw iomt_error{"only placeholders can be removed"};
    }
    placeholder_plan plan;
    plan.placeholder = {*slot, target, std::nullopt};
    if (target.next_idx == target.idx) {
        return plan;
    }
    const auto pred_slot = predecessor_of(idx);
    const iomt_leaf pred = *store_->leaf(*pred_slot);
    iomt_leaf relinked = pred;
    relinked.next_idx = target.next_idx;
    plan.linker = leaf_edit{*pred_slot, pred, relinked};
    return plan;
}

digest iomt::apply(const placeholder_plan &plan) {
    // Insertion relinks before filling the free slot; removal runs the reverse order.
    if (!plan.placeholder.before) {
        if (plan.linker) {
            set_leaf(plan.linker->slot, plan.linker->after);
        }
        return set_leaf(plan.placeholder.slot, plan.placeholder.after);
    }
    set_leaf(plan.placeholder.slot, plan.placeholder.after);
    if (plan.linker) {
        return set_leaf(plan.linker->slot, plan.linker->after);
    }
    return root();
}

namespace {

digest oracle_range(std::span<const std::optional<iomt_leaf>> leaves) {
    if (leaves.size() == 1) {
        return leaf_digest(leaves.front());
    }
    const auto half = leaves.size() / 2;
    return parent(oracle_range(leaves.first(half)), oracle_range(leaves.subspan(half)), order::left);
}

} // namespace

digest oracle_root(std::span<const std::optional<iomt_leaf>> leaves) {
    if (leaves.empty() || (leaves.size() & (leaves.size() - 1)) != 0) {
        throw std::invalid_argument{"leaf array size must be a power of two"};
    }
    return oracle_range(leaves);
}

} // namespace tcr
