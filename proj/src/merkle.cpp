#include "tcr/merkle.hpp"

#include <stdexcept>

namespace tcr {

digest parent(const digest &v_i, const digest &v_j, order side_i) {
    if (v_i.is_zero()) {
        return v_j;
    }
    if (v_j.is_zero()) {
        return v_i;
    }
    return side_i == order::left ? hash(v_i, v_j) : hash(v_j, v_i);
}

digest compute_root(const digest &leaf_node, std::span<const digest> siblings, std::span<const order> sides) {
    if (siblings.size() != sides.size()) {
        throw std::invalid_argument{"complement path and order list differ in length"};
    }
    digest y = leaf_node;
    for (std::size_t i = 0; i < siblings.size(); ++i) {
        y = parent(siblings[i], y, sides[i]);
    }
    return y;
}

digest compute_root(const digest &leaf_node, std::span<const path_step> path) {
    digest y = leaf_node;
    for (const auto &step : path) {
        y = parent(step.sibling, y, step.side);
    }
    return y;
}

} // namespace tcr
