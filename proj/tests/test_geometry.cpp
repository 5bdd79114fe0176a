#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "asmb/asset.hpp"
#include "asmb/bvh.hpp"
#include "asmb/error.hpp"
#include "asmb/geometry.hpp"
#include "asmb/project_io.hpp"
#include "support.hpp"

using namespace asmb;
using namespace asmb::test;

namespace {

std::string data(const std::string& name) { return read_file(std::string(ASMB_TEST_DATA) + "/" + name); }

template <class F>
errc code_of(F&& f) {
    try {
        f();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an asmb::error";
    return errc::io_error;
}

template <class F>
std::optional<std::size_t> line_of(F&& f) {
    try {
        f();
    } catch (const error& e) {
        return e.line();
    }
    return std::nullopt;
}

Vec3 tri_normal(const TriMesh& m, const Triangle& t) {
    return cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
}

Vec3 tri_centroid(const TriMesh& m, const Triangle& t) {
    return (m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) / 3.0;
}

} // namespace

// ---------- OBJ

TEST(Obj, UnitCube) {
    const auto m = load_obj(data("cube.obj"));
    EXPECT_EQ(m.vertices.size(), 8u);
    EXPECT_EQ(m.triangles.size(), 12u);
    EXPECT_EQ(m.vertices[7], (Vec3{1, 1, 1}));
}

TEST(Obj, QuadFan) {
    const auto m = load_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    ASSERT_EQ(m.triangles.size(), 2u);
    EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 2}));
    EXPECT_EQ(m.triangles[1], (Triangle{0, 2, 3}));
}

TEST(Obj, IndexOutOfRange) {
    auto text = data("cube.obj") + "f 1 2 9\n";
    EXPECT_EQ(code_of([&] { load_obj(text); }), errc::index_out_of_range);
    EXPECT_EQ(line_of([&] { load_obj(text); }), std::optional<std::size_t>(22));
    EXPECT_EQ(code_of([&] { load_obj("v 0 0 0\nf 0 1 1\n"); }), errc::index_out_of_range);
}

TEST(Obj, MalformedLine) {
    EXPECT_EQ(code_of([] { load_obj("v 0 0\n"); }), errc::malformed_line);
    EXPECT_EQ(code_of([] { load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2\n"); }), errc::malformed_line);
    EXPECT_EQ(code_of([] { load_obj("v 0 x 0\n"); }), errc::malformed_line);
    EXPECT_EQ(line_of([] { load_obj("# c\nv 0 0 0\nv a b c\n"); }), std::optional<std::size_t>(3));
}

TEST(Obj, IndexFormsAndNegativeIndices) {
    const auto m = load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2//1 3/1\nf -3 -2 -1\n");
    ASSERT_EQ(m.triangles.size(), 2u);
    EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 2}));
    EXPECT_EQ(m.triangles[1], (Triangle{0, 1, 2}));
}

TEST(Obj, IgnoresOtherStatementsAndDropsDegenerate) {
    const auto m = load_obj("o thing\ng grp\ns 1\nmtllib x.mtl\nusemtl m\nv 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n");
    ASSERT_EQ(m.triangles.size(), 1u);
    EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 3}));
}

TEST(Obj, EmptyMeshRejected) { EXPECT_EQ(code_of([] { make_asset(load_obj("# nothing\n")); }), errc::empty_mesh); }

TEST(Obj, RoundTripPreservesMesh) {
    auto g = rng(301);
    TriMesh m = uv_sphere(1.3, 9, 11, random_vec(g, -2, 2));
    for (auto& v : m.vertices) v += random_vec(g, -1e-3, 1e-3);
    const auto back = load_obj(export_obj(m));
    EXPECT_EQ(back.vertices, m.vertices);
    EXPECT_EQ(back.triangles, m.triangles);
    EXPECT_EQ(export_obj(back), export_obj(m));
}

// ---------- PDB

TEST(Pdb, SingleCarbonIsIcosahedron) {
    const auto r = load_pdb_spheres(data("one_carbon.pdb"), 1.0, 0);
    ASSERT_EQ(r.mesh.vertices.size(), 12u);
    EXPECT_EQ(r.mesh.triangles.size(), 20u);
    for (const auto& v : r.mesh.vertices) EXPECT_NEAR(norm(v), 0.170, 1e-12);
}

TEST(Pdb, RadiusTableAndScale) {
    EXPECT_DOUBLE_EQ(vdw_radius_nm("C"), 0.170);
    EXPECT_DOUBLE_EQ(vdw_radius_nm("n"), 0.155);
    EXPECT_DOUBLE_EQ(vdw_radius_nm("O"), 0.152);
    EXPECT_DOUBLE_EQ(vdw_radius_nm("S"), 0.180);
    EXPECT_DOUBLE_EQ(vdw_radius_nm("H"), 0.120);
    EXPECT_DOUBLE_EQ(vdw_radius_nm("P"), 0.180);
    EXPECT_DOUBLE_EQ(vdw_radius_nm("Fe"), 0.160);
    const auto r = load_pdb_spheres(data("one_carbon.pdb"), 2.0, 1);
    EXPECT_EQ(r.mesh.vertices.size(), 42u);
    for (const auto& v : r.mesh.vertices) EXPECT_NEAR(norm(v), 0.340, 1e-12);
}

TEST(Pdb, TwoResidueTermini) {
    const auto r = load_pdb_spheres(data("two_residue.pdb"), 1.0, 0, "two");
    EXPECT_NEAR(r.meta.n_terminus.x, 0.1458, 1e-12);
    EXPECT_NEAR(r.meta.n_terminus.y, 0.0, 1e-12);
    EXPECT_NEAR(r.meta.c_terminus.x, 0.3970, 1e-12);
    EXPECT_NEAR(r.meta.c_terminus.y, 0.2846, 1e-12);
    EXPECT_EQ(r.meta.source_id, "two");
    EXPECT_EQ(r.mesh.vertices.size(), 6u * 12u);
}

TEST(Pdb, ThreeAtomCounts) {
    const auto r = load_pdb_spheres(data("three_atoms.pdb"), 1.0, 0);
    EXPECT_EQ(r.mesh.vertices.size(), 3u * 12u);
    EXPECT_EQ(r.mesh.triangles.size(), 3u * 20u);
    // HETATM sulfur sphere centered at (0, 0.3, 0) nm.
    Vec3 c;
    for (std::size_t i = 24; i < 36; ++i) c += r.mesh.vertices[i];
    c = c / 12.0;
    EXPECT_NEAR(c.y, 0.3, 1e-12);
    EXPECT_NEAR(norm(r.mesh.vertices[24] - c), 0.180, 1e-12);
}

TEST(Pdb, ElementFallsBackToAtomName) {
    // No element columns: "OXT" -> O.
    const std::string line = "ATOM      1  OXT GLY A   1       0.000   0.000   0.000";
    const auto r = load_pdb_spheres(line + "\n", 1.0, 0);
    EXPECT_NEAR(norm(r.mesh.vertices[0]), 0.152, 1e-12);
}

TEST(Pdb, Errors) {
    EXPECT_EQ(code_of([] { load_pdb_spheres("HEADER only\nEND\n"); }), errc::no_atoms);
    const std::string bad = "ATOM      1  CA  GLY A   1       0.000   abc     0.000  1.00  0.00           C\n";
    EXPECT_EQ(code_of([&] { load_pdb_spheres(bad); }), errc::unparseable_record);
    EXPECT_EQ(line_of([&] { load_pdb_spheres("REMARK x\n" + bad); }), std::optional<std::size_t>(2));
    EXPECT_EQ(code_of([] { load_pdb_spheres("ATOM      1  CA  GLY A   1       0.000\n"); }), errc::unparseable_record);
}

TEST(Icosphere, OutwardWindingAndUnitRadius) {
    for (unsigned s : {0u, 1u}) {
        const auto m = icosphere(s);
        EXPECT_EQ(m.vertices.size(), s == 0 ? 12u : 42u);
        EXPECT_EQ(m.triangles.size(), s == 0 ? 20u : 80u);
        for (const auto& v : m.vertices) EXPECT_NEAR(norm(v), 1, 1e-12);
        for (const auto& t : m.triangles) EXPECT_GT(dot(tri_normal(m, t), tri_centroid(m, t)), 0);
    }
}

// ---------- boxes

TEST(LocalBoxFit, Examples) {
    const auto b = fit_local_box(unit_cube());
    EXPECT_EQ(b.min, (Vec3{0, 0, 0}));
    EXPECT_EQ(b.max, (Vec3{1, 1, 1}));
    TriMesh one;
    one.vertices = {{2, 3, 4}};
    const auto p = fit_local_box(one);
    EXPECT_EQ(p.min, (Vec3{2, 3, 4}));
    EXPECT_EQ(p.max, (Vec3{2, 3, 4}));
    EXPECT_EQ(code_of([] { fit_local_box(TriMesh{}); }), errc::empty_mesh);
}

TEST(LocalBoxFit, MatchesBruteScanAndContainsVertices) {
    auto g = rng(302);
    TriMesh m;
    for (int i = 0; i < 1000; ++i) m.vertices.push_back(random_vec(g, -7, 9));
    const auto b = fit_local_box(m);
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& v : m.vertices) {
        for (std::size_t k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
        EXPECT_TRUE(b.contains(v));
    }
    EXPECT_EQ(b.min, lo);
    EXPECT_EQ(b.max, hi);
}

TEST(WorldAabb, Examples) {
    const LocalBox unit{{0, 0, 0}, {1, 1, 1}};
    EXPECT_EQ(world_aabb(unit, {}), unit);
    const auto s = world_aabb(unit, RigidTransform::translate(1, 2, 3));
    EXPECT_EQ(s.min, (Vec3{1, 2, 3}));
    EXPECT_EQ(s.max, (Vec3{2, 3, 4}));
    const auto r = world_aabb(unit, rot_z_deg(45));
    EXPECT_NEAR(r.max.x - r.min.x, std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(r.max.y - r.min.y, std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(r.max.z - r.min.z, 1.0, 1e-12);
}

TEST(WorldAabb, ContainsSampledInteriorPoints) {
    auto g = rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 lo = random_vec(g, -3, 3);
        const LocalBox box{lo, lo + random_vec(g, 0.1, 4)};
        const auto t = random_transform(g);
        const auto w = world_aabb(box, t);
        for (int i = 0; i < 1000; ++i) {
            const Vec3 p{uniform(g, box.min.x, box.max.x), uniform(g, box.min.y, box.max.y), uniform(g, box.min.z, box.max.z)};
            const Vec3 q = t.apply(p);
            const LocalBox grown{w.min - Vec3{1e-12, 1e-12, 1e-12}, w.max + Vec3{1e-12, 1e-12, 1e-12}};
            ASSERT_TRUE(grown.contains(q));
        }
    }
}

// ---------- BVH

namespace {

void check_bvh(const TriMesh& m, const BvhTree& t, std::uint32_t leaf_size) {
    ASSERT_FALSE(t.nodes.empty());
    std::multiset<std::uint32_t> seen;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        const auto& n = t.nodes[i];
        if (n.is_leaf()) {
            ASSERT_GE(n.count, 1u);
            ASSERT_LE(n.count, leaf_size);
            for (std::uint32_t k = n.first; k < n.first + n.count; ++k) {
                const auto tri = t.order[k];
                seen.insert(tri);
                for (auto v : m.triangles[tri]) ASSERT_TRUE(n.box.contains(m.vertices[v]));
            }
        } else {
            for (auto c : {n.left, n.right}) {
                const auto& ch = t.nodes[c];
                for (std::size_t k = 0; k < 3; ++k) {
                    ASSERT_LE(n.box.min[k], ch.box.min[k]);
                    ASSERT_GE(n.box.max[k], ch.box.max[k]);
                }
                stack.push_back(c);
            }
        }
    }
    ASSERT_EQ(seen.size(), m.triangles.size());
    std::uint32_t expect = 0;
    for (auto s : seen) ASSERT_EQ(s, expect++);
}

} // namespace

TEST(Bvh, SingleTriangleIsOneLeaf) {
    TriMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.triangles = {{0, 1, 2}};
    const auto t = build_bvh(m);
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_TRUE(t.nodes[0].is_leaf());
    EXPECT_EQ(t.depth(), 1u);
}

TEST(Bvh, CubeStructure) {
    const auto m = unit_cube();
    const auto t = build_bvh(m, 4);
    check_bvh(m, t, 4);
    EXPECT_EQ(code_of([] { build_bvh(TriMesh{}); }), errc::empty_mesh);
}

TEST(Bvh, DepthBoundOnLargeSphere) {
    const auto m = uv_sphere(5, 71, 71); // 71*2*70 = 9940 triangles
    ASSERT_GT(m.triangles.size(), 9900u);
    const auto t = build_bvh(m, 4);
    check_bvh(m, t, 4);
    const double bound = 2 * std::ceil(std::log2(static_cast<double>(m.triangles.size()) / 4.0)) + 4;
    EXPECT_LE(static_cast<double>(t.depth()), bound);
}

TEST(Bvh, DeterministicAndTieBreakByIndex) {
    const auto m = uv_sphere(1, 13, 17);
    const auto a = build_bvh(m, 3), b = build_bvh(m, 3);
    EXPECT_EQ(a.order, b.order);
    // Identical centroids: triangle indices stay in ascending order.
    TriMesh same;
    same.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    for (int i = 0; i < 9; ++i) same.triangles.push_back({0, 1, 2});
    const auto t = build_bvh(same, 2);
    check_bvh(same, t, 2);
    for (std::size_t i = 0; i < t.order.size(); ++i) EXPECT_EQ(t.order[i], i);
}

TEST(Bvh, RandomSoupStructure) {
    auto g = rng(305);
    TriMesh m;
    for (int i = 0; i < 500; ++i) {
        const Vec3 c = random_vec(g, -10, 10);
        const auto base = static_cast<std::uint32_t>(m.vertices.size());
        for (int k = 0; k < 3; ++k) m.vertices.push_back(c + random_vec(g, -0.5, 0.5));
        m.triangles.push_back({base, base + 1, base + 2});
    }
    for (std::uint32_t leaf : {1u, 2u, 4u, 8u}) check_bvh(m, build_bvh(m, leaf), leaf);
}
