#include "test_support.hpp"

#include "tcr/iomt.hpp"
#include "tcr/iomt_kernels.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace tcr;
using tcr::testing::brute_root;
using tcr::testing::dg;
using tcr::testing::omega;

namespace {

std::vector<std::optional<iomt_leaf>> four_leaf_ring(unsigned height) {
    std::vector<std::optional<iomt_leaf>> leaves(std::size_t{1} << height);
    leaves[0] = iomt_leaf{3, 4, omega(3)};
    leaves[1] = iomt_leaf{1, 3, omega(1)};
    leaves[2] = iomt_leaf{4, 7, omega(4)};
    leaves[3] = iomt_leaf{7, 1, omega(7)};
    return leaves;
}

// Follows next_idx from the minimal index; true if every leaf is visited once.
bool circular(const array_tree_store &s) {
    std::map<record_index, record_index> next;
    for (const auto &l : s.leaves()) {
        if (l) {
            next[l->idx] = l->next_idx;
        }
    }
    if (next.empty()) {
        return true;
    }
    std::set<record_index> seen;
    record_index at = next.begin()->first;
    do {
        if (!seen.insert(at).second || !next.count(at)) {
            return false;
        }
        at = next[at];
    } while (at != next.begin()->first);
    return seen.size() == next.size();
}

} // namespace

TEST(IomtLeaf, DigestOfRingLeaves) {
    EXPECT_EQ(leaf_digest(iomt_leaf{3, 4, omega(3)}),
              dg("cf7b5788df5753ea2f0abd8943da1f89b591870681bf9badc3159393d244f4d4"));
    EXPECT_EQ(leaf_digest(iomt_leaf{4, 7, omega(4)}),
              dg("054df427f5b9903f53235577f0d22582a5da2d75a34caad22f14c97745d4d4e9"));
    EXPECT_EQ(leaf_digest(std::optional<iomt_leaf>{}), digest::zero());
    for (record_index a : {0ULL, 1ULL, 99ULL, ~0ULL}) {
        EXPECT_FALSE(leaf_digest(iomt_leaf{a, a, digest::zero()}).is_zero());
    }
}

TEST(IomtLeaf, CounterEncoding) {
    const auto c = counter_value(0x0102);
    EXPECT_EQ(c.data[30], 0x01);
    EXPECT_EQ(c.data[31], 0x02);
    EXPECT_EQ(as_counter(c), 0x0102u);
    EXPECT_EQ(counter_value(0), digest::zero());
    EXPECT_FALSE(as_counter(omega(1)).has_value());
}

TEST(Iomt, EnclosurePredicate) {
    EXPECT_TRUE(encloses(4, 7, 5));
    EXPECT_TRUE(encloses(7, 1, 9));
    EXPECT_TRUE(encloses(7, 1, 0));
    EXPECT_FALSE(encloses(3, 4, 5));
    EXPECT_FALSE(encloses(4, 7, 7));
    EXPECT_FALSE(encloses(4, 7, 4));
    for (record_index b = 0; b < 20; ++b) {
        EXPECT_FALSE(encloses(5, 5, 5));
        if (b != 5) {
            EXPECT_TRUE(encloses(5, 5, b));
        }
    }
}

TEST(Iomt, TreeIndexArithmetic) {
    const tree_geometry g{3};
    EXPECT_EQ(g.node_count(), 15u);
    EXPECT_EQ(g.leaf_count(), 8u);
    const auto root = tree_indices(g, node_position{0});
    EXPECT_FALSE(root.parent);
    EXPECT_EQ(root.left_child->index, 1u);
    EXPECT_EQ(root.right_child->index, 2u);
    EXPECT_EQ(tree_indices(g, node_position{5}).parent->index, 2u);
    const auto leaf = tree_indices(g, node_position{14});
    EXPECT_FALSE(leaf.left_child);
    EXPECT_FALSE(leaf.right_child);
    EXPECT_EQ(g.slot_of(g.leaf_node(3)), 3u);
    EXPECT_THROW(g.leaf_node(8), std::out_of_range);
    EXPECT_EQ(tree_geometry{20}.dense_memory_bytes(),
              ((std::uint64_t{1} << 21) - 1) * sizeof(digest) + (std::uint64_t{1} << 20) * sizeof(iomt_leaf));
}

TEST(Iomt, SixteenLeafPathFromTree) {
    const tree_geometry g{4};
    array_tree_store store{g};
    iomt tree{store};
    std::vector<digest> v(16);
    for (slot_index s = 0; s < 16; ++s) {
        const iomt_leaf l{s * 10, s * 10 + 10, omega(static_cast<int>(s))};
        tree.set_leaf(s, l);
        v[s] = leaf_digest(l);
    }
    auto sub = [&](int lo, int hi) { return brute_root(std::vector<digest>(v.begin() + lo, v.begin() + hi + 1)); };
    const complement_path expected{{v[7], order::right}, {sub(4, 5), order::left}, {sub(0, 3), order::left},
                                   {sub(8, 15), order::right}};
    EXPECT_EQ(tree.path(6), expected);
    EXPECT_EQ(tree.root(), brute_root(v));
}

TEST(Iomt, EmptyTreePathIsZero) {
    array_tree_store store{tree_geometry{5}};
    iomt tree{store};
    const auto path = tree.path(17);
    ASSERT_EQ(path.size(), 5u);
    for (const auto &step : path) {
        EXPECT_TRUE(step.sibling.is_zero());
    }
    EXPECT_TRUE(tree.root().is_zero());
    EXPECT_THROW(tree.path(32), std::out_of_range);
}

TEST(Iomt, FourLeafRingRoot) {
    auto leaves = four_leaf_ring(2);
    array_tree_store store{tree_geometry{2}, leaves};
    iomt tree{store};
    EXPECT_EQ(tree.root(), dg("ba3ca1414ba39a093c9d2c8d7efe231e6ec678f87db0c63f0cb3f857b2253a67"));
    EXPECT_EQ(oracle_root(leaves), tree.root());
    for (slot_index s = 0; s < 4; ++s) {
        EXPECT_EQ(compute_root(leaf_digest(leaves[s]), tree.path(s)), tree.root());
    }
    // Slot order changes root bytes even though the index semantics are the same.
    std::swap(leaves[0], leaves[3]);
    EXPECT_NE(oracle_root(leaves), tree.root());
}

TEST(Iomt, SetLeafRoundTripAndIdempotence) {
    array_tree_store store{tree_geometry{3}};
    iomt tree{store};
    const iomt_leaf l{5, 5, omega(5)};
    const auto root = tree.set_leaf(2, l);
    EXPECT_EQ(tree.leaf(2), l);
    EXPECT_EQ(tree.set_leaf(2, l), root);
    EXPECT_THROW(tree.set_leaf(8, l), std::out_of_range);
}

TEST(Iomt, PlaceholderInsertIdx5) {
    array_tree_store store{tree_geometry{3}, four_leaf_ring(3)};
    iomt tree{store};
    const auto plan = tree.plan_insert(5);
    ASSERT_TRUE(plan.linker);
    EXPECT_EQ(plan.linker->slot, 2u);
    EXPECT_EQ(plan.linker->after, (iomt_leaf{4, 5, omega(4)}));
    EXPECT_EQ(plan.placeholder.slot, 4u);
    EXPECT_EQ(plan.placeholder.after, (iomt_leaf{5, 7, digest::zero()}));
    EXPECT_EQ(tree.apply(plan), dg("8d6035f4987f2ee5264217fd483f4e09015ae95c4880d655f8325275fdd5d076"));
}

TEST(Iomt, PlaceholderInsertIdx2) {
    array_tree_store store{tree_geometry{3}, four_leaf_ring(3)};
    iomt tree{store};
    const auto plan = tree.plan_insert(2);
    EXPECT_EQ(plan.linker->after, (iomt_leaf{1, 2, omega(1)}));
    EXPECT_EQ(plan.placeholder.after, (iomt_leaf{2, 3, digest::zero()}));
    EXPECT_EQ(tree.apply(plan), dg("43f5a3969ecddabf00d25cd8072b5ef9af900eb7997e3d191c12c477ccbd39a9"));
}

TEST(Iomt, PlaceholderInsertIntoEmptyTree) {
    array_tree_store store{tree_geometry{3}};
    iomt tree{store};
    const auto plan = tree.plan_insert(9);
    EXPECT_FALSE(plan.linker);
    EXPECT_EQ(plan.placeholder.after, (iomt_leaf{9, 9, digest::zero()}));
    tree.apply(plan);
    EXPECT_EQ(tree.root(), leaf_digest(iomt_leaf{9, 9, digest::zero()}));
}

TEST(Iomt, InsertErrors) {
    array_tree_store store{tree_geometry{2}, four_leaf_ring(2)};
    iomt tree{store};
    EXPECT_THROW(tree.plan_insert(4), iomt_error);
    EXPECT_THROW(tree.plan_insert(5), iomt_error);
}

TEST(Iomt, RemoveIsInverseOfInsert) {
    array_tree_store store{tree_geometry{3}, four_leaf_ring(3)};
    iomt tree{store};
    const auto before = tree.root();
    tree.apply(tree.plan_insert(5));
    EXPECT_NE(tree.root(), before);
    tree.apply(tree.plan_remove(5));
    EXPECT_EQ(tree.root(), before);
    EXPECT_THROW(tree.plan_remove(4), iomt_error); // not a placeholder
}

// Property: random edit sequences keep the incremental root equal to both oracles,
// the linkage circular, exactly one encloser per absent index, and existing values untouched.
TEST(IomtProperty, RandomEditSequences) {
    std::mt19937_64 rng{2024};
    for (int trial = 0; trial < 300; ++trial) {
        const unsigned h = 1 + static_cast<unsigned>(rng() % 4);
        const tree_geometry g{h};
        array_tree_store store{g};
        iomt tree{store};
        std::set<record_index> present;
        for (int step = 0; step < 32; ++step) {
            const auto choice = rng() % 3;
            const record_index a = rng() % 24;
            if (choice == 0 && !present.count(a) && present.size() < g.leaf_count()) {
                std::map<record_index, digest> vals;
                for (const auto &l : store.leaves()) {
                    if (l) {
                        vals[l->idx] = l->val;
                    }
                }
                tree.apply(tree.plan_insert(a));
                present.insert(a);
                for (const auto &l : store.leaves()) {
                    if (l && l->idx != a) {
                        ASSERT_EQ(l->val, vals[l->idx]);
                    }
                }
            } else if (choice == 1 && !present.empty()) {
                auto it = present.begin();
                std::advance(it, static_cast<long>(rng() % present.size()));
                const auto slot = *tree.find(*it);
                auto l = *tree.leaf(slot);
                l.val = random_digest();
                tree.set_leaf(slot, l);
            } else if (choice == 2 && !present.empty()) {
                auto it = present.begin();
                std::advance(it, static_cast<long>(rng() % present.size()));
                const auto slot = *tree.find(*it);
                if (tree.leaf(slot)->is_placeholder()) {
                    tree.apply(tree.plan_remove(*it));
                    present.erase(it);
                }
            }
            ASSERT_EQ(tree.root(), oracle_root(store.leaves()));
            ASSERT_EQ(tree.root(), brute_root(store.leaves()));
            ASSERT_TRUE(circular(store));
        }
        for (record_index a = 0; a < 24; ++a) {
            if (present.count(a)) {
                continue;
            }
            int enclosers = 0;
            for (const auto &l : store.leaves()) {
                enclosers += l && encloses(l->idx, l->next_idx, a);
            }
            ASSERT_EQ(enclosers, present.empty() ? 0 : 1);
        }
    }
}

TEST(IomtProperty, LowestFreeSlotIsUsed) {
    array_tree_store store{tree_geometry{3}};
    iomt tree{store};
    for (record_index a : {10, 20, 30, 40}) {
        tree.apply(tree.plan_insert(a));
    }
    tree.apply(tree.plan_remove(20));
    EXPECT_EQ(tree.plan_insert(25).placeholder.slot, 1u);
}

TEST(Kernels, ParallelMatchesSerial) {
    for (unsigned h : {1u, 5u, 10u}) {
        const tree_geometry g{h};
        std::vector<std::optional<iomt_leaf>> leaves(g.leaf_count());
        for (std::uint64_t i = 0; i < g.leaf_count(); i += 3) {
            leaves[i] = iomt_leaf{i, i + 3, counter_value(i + 1)};
        }
        const auto d = kernels::hash_leaves(leaves);
        EXPECT_EQ(d, kernels::hash_leaves_serial(leaves));
        const auto nodes = kernels::build_node_array(g, d);
        EXPECT_EQ(nodes, kernels::build_node_array_serial(g, d));
        EXPECT_EQ(nodes[0], brute_root(leaves));

        std::vector<bytes> msgs;
        for (int i = 0; i < 100; ++i) {
            msgs.push_back(bytes(static_cast<std::size_t>(i), static_cast<std::uint8_t>(i)));
        }
        const auto key = random_digest();
        const auto tags = kernels::hmac_batch(msgs, key);
        EXPECT_EQ(tags, kernels::hmac_batch_serial(msgs, key));
        EXPECT_EQ(tags[42], hmac(msgs[42], key));
    }
}

TEST(Kernels, BulkStoreMatchesIncremental) {
    const tree_geometry g{4};
    auto leaves = four_leaf_ring(4);
    array_tree_store bulk{g, leaves};
    array_tree_store inc{g};
    iomt tree{inc};
    for (slot_index s = 0; s < leaves.size(); ++s) {
        tree.set_leaf(s, leaves[s]);
    }
    EXPECT_EQ(bulk.nodes(), inc.nodes());
}
