#pragma once

#include "tcr/digest.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tcr {

/// Side of a node relative to its sibling.
enum class order : std::uint8_t { left = 0, right = 1 };

/// One complementary node on a leaf-to-root path: the sibling digest and the
/// side the sibling sits on.
struct path_step {
    digest sibling;
    order side = order::left;

    friend bool operator==(const path_step &, const path_step &) = default;
};

using complement_path = std::vector<path_step>;

/// Parent of two children. A zero child is transparent: the parent takes the
/// other child's value (which may itself be zero). `side_i` is the side of `v_i`.
digest parent(const digest &v_i, const digest &v_j, order side_i);

/// Folds `parent` from the leaf node up through the complementary nodes.
/// Throws std::invalid_argument if the two lists differ in length.
digest compute_root(const digest &leaf_node, std::span<const digest> siblings, std::span<const order> sides);
digest compute_root(const digest &leaf_node, std::span<const path_step> path);

} // namespace tcr
