#pragma once

#include <cstdint>
#include <vector>

#include "asmb/geometry.hpp"

namespace asmb {

struct BvhNode {
    LocalBox box;
    // Interior: children left/right. Leaf: left == right == npos and
    // [first, first + count) indexes BvhTree::order.
    std::uint32_t left = npos;
    std::uint32_t right = npos;
    std::uint32_t first = 0;
    std::uint32_t count = 0;

    static constexpr std::uint32_t npos = 0xffffffffu;
    bool is_leaf() const { return left == npos; }
};

struct BvhTree {
    std::vector<BvhNode> nodes; // nodes[0] is the root
    std::vector<std::uint32_t> order; // triangle permutation

    std::size_t depth() const;
};

// Longest-axis median split on triangle centroids, ties by triangle index.
BvhTree build_bvh(const TriMesh& mesh, std::uint32_t leaf_size = 4);

} // namespace asmb
