#pragma once

#include "tcr/iomt.hpp"

#include <optional>
#include <span>
#include <vector>

/// Bulk tree construction used by prepopulation. Each OpenMP kernel has a
/// serial twin with the same contract; tests hold them equal and the kernel
/// benchmark compares their speed.
namespace tcr::kernels {

std::vector<digest> hash_leaves(std::span<const std::optional<iomt_leaf>> leaves);
std::vector<digest> hash_leaves_serial(std::span<const std::optional<iomt_leaf>> leaves);

/// Breadth-first node array (root at 0) from the leaf-level digests, one level at a time.
std::vector<digest> build_node_array(const tree_geometry &g, std::span<const digest> leaf_digests);
std::vector<digest> build_node_array_serial(const tree_geometry &g, std::span<const digest> leaf_digests);

/// HMAC of every message under one key.
std::vector<digest> hmac_batch(std::span<const bytes> messages, const digest &key);
std::vector<digest> hmac_batch_serial(std::span<const bytes> messages, const digest &key);

int worker_threads();

} // namespace tcr::kernels
