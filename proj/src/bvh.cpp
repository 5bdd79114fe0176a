#include "asmb/bvh.hpp"

#include <algorithm>

#include "asmb/error.hpp"

namespace asmb {

namespace {

struct builder {
    const TriMesh& mesh;
    std::uint32_t leaf_size;
    std::vector<Vec3> centroids;
    BvhTree tree;

    LocalBox triangle_bounds(std::uint32_t first, std::uint32_t count) const {
        const auto& t0 = mesh.triangles[tree.order[first]];
        Vec3 lo = mesh.vertices[t0[0]], hi = lo;
        for (std::uint32_t i = first; i < first + count; ++i) {
            for (auto v : mesh.triangles[tree.order[i]]) {
                lo = min(lo, mesh.vertices[v]);
                hi = max(hi, mesh.vertices[v]);
            }
        }
        return {lo, hi};
    }

    std::uint32_t build(std::uint32_t first, std::uint32_t count) {
        const auto index = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[index].box = triangle_bounds(first, count);
        if (count <= leaf_size) {
            tree.nodes[index].first = first;
            tree.nodes[index].count = count;
            return index;
        }

        Vec3 lo = centroids[tree.order[first]], hi = lo;
        for (std::uint32_t i = first; i < first + count; ++i) {
            lo = min(lo, centroids[tree.order[i]]);
            hi = max(hi, centroids[tree.order[i]]);
        }
        const Vec3 ext = hi - lo;
        std::size_t axis = 0;
        if (ext.y > ext[axis]) axis = 1;
        if (ext.z > ext[axis]) axis = 2;

        const auto begin = tree.order.begin() + first;
        const auto mid = begin + count / 2;
        std::nth_element(begin, mid, begin + count, [&](std::uint32_t a, std::uint32_t b) {
            const double ca = centroids[a][axis], cb = centroids[b][axis];
            return ca < cb || (ca == cb && a < b);
        });

        const std::uint32_t left_count = count / 2;
        const auto left = build(first, left_count);
        const auto right = build(first + left_count, count - left_count);
        tree.nodes[index].left = left;
        tree.nodes[index].right = right;
        tree.nodes[index].first = first;
        tree.nodes[index].count = count;
        return index;
    }
};

} // namespace

BvhTree build_bvh(const TriMesh& mesh, std::uint32_t leaf_size) {
    if (mesh.triangles.empty()) throw error(errc::empty_mesh, "mesh has no triangles");
    if (leaf_size < 1) throw error(errc::invalid_argument, "leaf_size must be >= 1");
    builder b{mesh, leaf_size, {}, {}};
    b.centroids.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        b.centroids.push_back((mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0);
    }
    b.tree.order.resize(mesh.triangles.size());
    for (std::uint32_t i = 0; i < b.tree.order.size(); ++i) b.tree.order[i] = i;
    b.tree.nodes.reserve(2 * mesh.triangles.size() / leaf_size + 1);
    b.build(0, static_cast<std::uint32_t>(mesh.triangles.size()));
    return std::move(b.tree);
}

std::size_t BvhTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t best = 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 1}};
    while (!stack.empty()) {
        const auto [n, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes[n].is_leaf()) {
            stack.push_back({nodes[n].left, d + 1});
            stack.push_back({nodes[n].right, d + 1});
        }
    }
    return best;
}

} // namespace asmb
