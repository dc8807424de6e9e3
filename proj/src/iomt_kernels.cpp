#include "tcr/iomt_kernels.hpp"

#include <omp.h>

#include <cstdint>
#include <stdexcept>

namespace tcr::kernels {

namespace {

void check_leaf_level(const tree_geometry &g, std::span<const digest> leaf_digests) {
    if (leaf_digests.size() != g.leaf_count()) {
        throw std::invalid_argument{"leaf digest count does not match geometry"};
    }
}

} // namespace

std::vector<digest> hash_leaves(std::span<const std::optional<iomt_leaf>> leaves) {
    std::vector<digest> out(leaves.size());
    const auto n = static_cast<std::int64_t>(leaves.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = leaf_digest(leaves[i]);
    }
    return out;
}

std::vector<digest> hash_leaves_serial(std::span<const std::optional<iomt_leaf>> leaves) {
    std::vector<digest> out;
    out.reserve(leaves.size());
    for (const auto &leaf : leaves) {
        out.push_back(leaf_digest(leaf));
    }
    return out;
}

std::vector<digest> build_node_array(const tree_geometry &g, std::span<const digest> leaf_digests) {
    check_leaf_level(g, leaf_digests);
    std::vector<digest> nodes(g.node_count());
    const std::uint64_t first_leaf = g.leaf_count() - 1;
    std::copy(leaf_digests.begin(), leaf_digests.end(), nodes.begin() + static_cast<std::ptrdiff_t>(first_leaf));
    for (std::uint64_t level_start = first_leaf; level_start != 0; level_start = (level_start - 1) / 2) {
        const std::uint64_t parent_start = (level_start - 1) / 2;
        const auto width = static_cast<std::int64_t>(level_start - parent_start);
#pragma omp parallel for schedule(static)
        for (std::int64_t k = 0; k < width; ++k) {
            const std::uint64_t p = parent_start + static_cast<std::uint64_t>(k);
            nodes[p] = parent(nodes[2 * p + 1], nodes[2 * p + 2], order::left);
        }
    }
    return nodes;
}

std::vector<digest> build_node_array_serial(const tree_geometry &g, std::span<const digest> leaf_digests) {
    check_leaf_level(g, leaf_digests);
    std::vector<digest> nodes(g.node_count());
    const std::uint64_t first_leaf = g.leaf_count() - 1;
    for (std::uint64_t s = 0; s < leaf_digests.size(); ++s) {
        nodes[first_leaf + s] = leaf_digests[s];
    }
    for (std::uint64_t p = first_leaf; p-- > 0;) {
        nodes[p] = parent(nodes[2 * p + 1], nodes[2 * p + 2], order::left);
    }
    return nodes;
}

std::vector<digest> hmac_batch(std::span<const bytes> messages, const digest &key) {
    std::vector<digest> out(messages.size());
    const auto n = static_cast<std::int64_t>(messages.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        out[i] = hmac(messages[i], key);
    }
    return out;
}

std::vector<digest> hmac_batch_serial(std::span<const bytes> messages, const digest &key) {
    std::vector<digest> out;
    out.reserve(messages.size());
    for (const auto &m : messages) {
        out.push_back(hmac(m, key));
    }
    return out;
}

int worker_threads() {
    return omp_get_max_threads();
}

} // namespace tcr::kernels
