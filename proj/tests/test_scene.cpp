#include <gtest/gtest.h>

#include <algorithm>

#include "asmb/error.hpp"
#include "asmb/scene.hpp"
#include "support.hpp"

using namespace asmb;
using namespace asmb::test;

namespace {

errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return errc::io_error;
}

struct fixture {
    SceneDoc doc;
    std::string cube;

    fixture() { cube = add_mesh(doc, cube_asset(1.0)); }
    ObjectId at(double x, double y = 0, double z = 0) { return spawn(doc, cube, RigidTransform::translate(x, y, z)); }
};

// Centripetal Catmull-Rom in Hermite form; tangents from the non-uniform knot sequence.
Vec3 hermite_oracle(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3, double u) {
    const double t0 = 0;
    const double t1 = t0 + std::sqrt(norm(p1 - p0));
    const double t2 = t1 + std::sqrt(norm(p2 - p1));
    const double t3 = t2 + std::sqrt(norm(p3 - p2));
    const Vec3 m1 = ((p1 - p0) * (1 / (t1 - t0)) - (p2 - p0) * (1 / (t2 - t0)) + (p2 - p1) * (1 / (t2 - t1))) * (t2 - t1);
    const Vec3 m2 = ((p2 - p1) * (1 / (t2 - t1)) - (p3 - p1) * (1 / (t3 - t1)) + (p3 - p2) * (1 / (t3 - t2))) * (t2 - t1);
    const double u2 = u * u, u3 = u2 * u;
    return p1 * (2 * u3 - 3 * u2 + 1) + m1 * (u3 - 2 * u2 + u) + p2 * (-2 * u3 + 3 * u2) + m2 * (u3 - u2);
}

void expect_vec(const Vec3& got, const Vec3& want, double tol) {
    EXPECT_NEAR(got.x, want.x, tol);
    EXPECT_NEAR(got.y, want.y, tol);
    EXPECT_NEAR(got.z, want.z, tol);
}

} // namespace

// ---------- objects

TEST(Scene, SpawnAllocatesSharedIds) {
    fixture f;
    const auto a = f.at(0), b = f.at(1);
    EXPECT_EQ(a, 1u);
    EXPECT_EQ(b, 2u);
    EXPECT_EQ(f.doc.next_id, 3u);
    EXPECT_EQ(code_of([&] { spawn(f.doc, "nope", {}); }), errc::unknown_id);
    EXPECT_EQ(code_of([&] { f.doc.object(99); }), errc::unknown_id);
    check_invariants(f.doc);
}

TEST(Scene, DuplicateSingle) {
    fixture f;
    const auto a = f.at(3);
    f.doc.object(a).name = "x";
    f.doc.object(a).color.rgb = {1, 0, 0};
    const auto copies = duplicate(f.doc, {a});
    ASSERT_EQ(copies.size(), 1u);
    const auto& c = f.doc.object(copies[0]);
    EXPECT_NE(c.id, a);
    EXPECT_EQ(c.mesh_ref, f.cube);
    EXPECT_EQ(c.transform, f.doc.object(a).transform);
    EXPECT_EQ(c.color, f.doc.object(a).color);
    EXPECT_EQ(f.doc.meshes.size(), 1u);
    check_invariants(f.doc);
}

TEST(Scene, DuplicateGroupRecreatesGroup) {
    fixture f;
    const auto a = f.at(0), b = f.at(1), c = f.at(2);
    const auto g = group(f.doc, {a, b, c});
    const auto copies = duplicate(f.doc, {a, b, c});
    ASSERT_EQ(copies.size(), 3u);
    const auto g2 = f.doc.object(copies[0]).group;
    ASSERT_TRUE(g2.has_value());
    EXPECT_NE(*g2, g);
    EXPECT_EQ(group_members(f.doc, *g2), copies);
    EXPECT_EQ(group_members(f.doc, g), (std::vector<ObjectId>{a, b, c}));
    EXPECT_EQ(f.doc.groups.size(), 2u);
    check_invariants(f.doc);
}

TEST(Scene, GroupErrors) {
    fixture f;
    const auto a = f.at(0), b = f.at(1);
    EXPECT_EQ(code_of([&] { group(f.doc, {}); }), errc::invalid_argument);
    group(f.doc, {a});
    EXPECT_EQ(code_of([&] { group(f.doc, {a, b}); }), errc::conflicting_membership);
    EXPECT_EQ(code_of([&] { ungroup(f.doc, 999); }), errc::unknown_id);
}

TEST(Scene, RemoveDropsConnectorsAndEmptyGroups) {
    fixture f;
    const auto a = f.at(0), b = f.at(1);
    const auto g = group(f.doc, {a});
    SpringConnector c;
    c.end_a = {a, {}};
    c.end_b = {b, {}};
    add_connector(f.doc, c);
    remove_object(f.doc, a);
    EXPECT_TRUE(f.doc.connectors.empty());
    EXPECT_FALSE(f.doc.groups.count(g));
    check_invariants(f.doc);
}

TEST(SceneProperty, DuplicateThenDeleteRestoresState) {
    auto g = rng(601);
    for (int trial = 0; trial < 50; ++trial) {
        fixture f;
        std::vector<ObjectId> ids;
        for (int i = 0; i < 8; ++i) {
            ids.push_back(spawn(f.doc, f.cube, random_transform(g)));
        }
        group(f.doc, {ids[0], ids[1]});
        set_keyframe(f.doc, ids[2], 1.0);
        std::vector<ObjectId> pick;
        for (auto id : ids) {
            if (g() % 2) pick.push_back(id);
        }
        const auto before = f.doc;
        const auto copies = duplicate(f.doc, pick);
        check_invariants(f.doc);
        for (auto id : copies) remove_object(f.doc, id);
        // Ids are never reused, so only the allocator differs.
        auto after = f.doc;
        after.next_id = before.next_id;
        EXPECT_TRUE(same_state(after, before));
    }
}

// ---------- membership keyframes

TEST(Membership, StepsAtKeyframeTime) {
    fixture f;
    const auto a = f.at(0), b = f.at(1);
    const auto g = group(f.doc, {b});
    set_membership_keyframe(f.doc, a, 2.0, g);
    EXPECT_EQ(membership(f.doc, g, 1.9), (std::set<ObjectId>{b}));
    EXPECT_EQ(membership(f.doc, g, 2.0), (std::set<ObjectId>{a, b}));
    EXPECT_EQ(membership(f.doc, g, 9.0), (std::set<ObjectId>{a, b}));
    // A t=0 keyframe was inserted holding the old state.
    ASSERT_EQ(f.doc.object(a).keyframes.size(), 2u);
    EXPECT_EQ(f.doc.object(a).keyframes[0].time, 0);
    EXPECT_FALSE(f.doc.object(a).keyframes[0].group.has_value());
    check_invariants(f.doc);
}

TEST(Membership, MovesBetweenGroups) {
    fixture f;
    const auto a = f.at(0), x = f.at(1), y = f.at(2);
    const auto ga = group(f.doc, {x});
    const auto gb = group(f.doc, {y});
    set_membership_keyframe(f.doc, a, 0.0, ga);
    set_membership_keyframe(f.doc, a, 5.0, gb);
    EXPECT_TRUE(membership(f.doc, ga, 4.999).count(a));
    EXPECT_FALSE(membership(f.doc, gb, 4.999).count(a));
    EXPECT_FALSE(membership(f.doc, ga, 5.0).count(a));
    EXPECT_TRUE(membership(f.doc, gb, 5.0).count(a));
    EXPECT_EQ(code_of([&] { set_membership_keyframe(f.doc, a, 11.0, ga); }), errc::time_out_of_range);
    EXPECT_EQ(code_of([&] { set_membership_keyframe(f.doc, a, 1.0, 999); }), errc::unknown_id);
}

// ---------- crystal chains

TEST(Chain, CreateAndUpdate) {
    fixture f;
    const auto base = f.at(0), second = f.at(1);
    const auto id = chain_create(f.doc, base, second, 6);
    const auto& c = f.doc.chains.at(id);
    ASSERT_EQ(c.members.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& o = f.doc.object(c.members[i]);
        EXPECT_NEAR(o.transform.translation.x, static_cast<double>(i), 1e-12);
        EXPECT_EQ(o.chain_index, i);
        EXPECT_EQ(o.mesh_ref, f.cube);
    }
    f.doc.object(second).transform = RigidTransform::translate(2, 0, 0);
    chain_update(f.doc, id);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_NEAR(f.doc.object(c.members[i]).transform.translation.x, 2.0 * static_cast<double>(i), 1e-12);
    }
    check_invariants(f.doc);
}

TEST(Chain, SetTabAndMoveRigid) {
    fixture f;
    const auto id = chain_create(f.doc, f.at(0), f.at(1), 5);
    const auto step = compose(rot_z_deg(30), RigidTransform::translate(1, 0, 0.5));
    chain_set_tab(f.doc, id, step);
    const auto& c = f.doc.chains.at(id);
    for (std::size_t i = 1; i < 5; ++i) {
        EXPECT_LE(max_component_difference(relative_transform(f.doc.object(c.members[i - 1]).transform, f.doc.object(c.members[i]).transform), step), 1e-12);
    }
    const auto target = compose(RigidTransform::translate(5, 5, 5), rot_z_deg(10));
    chain_move_rigid(f.doc, id, 3, target);
    EXPECT_LE(max_component_difference(f.doc.object(c.members[3]).transform, target), 1e-12);
    EXPECT_LE(max_component_difference(relative_transform(f.doc.object(c.members[0]).transform, f.doc.object(c.members[1]).transform), step), 1e-12);
    EXPECT_EQ(code_of([&] { chain_move_rigid(f.doc, id, 5, target); }), errc::invalid_argument);
}

TEST(Chain, Errors) {
    fixture f;
    const auto a = f.at(0), b = f.at(1);
    const auto other = add_mesh(f.doc, cube_asset(2.0));
    const auto c = spawn(f.doc, other, {});
    EXPECT_EQ(code_of([&] { chain_create(f.doc, a, b, 1); }), errc::invalid_argument);
    EXPECT_EQ(code_of([&] { chain_create(f.doc, a, a, 3); }), errc::invalid_argument);
    EXPECT_EQ(code_of([&] { chain_create(f.doc, a, c, 3); }), errc::mesh_mismatch);
    chain_create(f.doc, a, b, 3);
    const auto d = f.at(5);
    EXPECT_EQ(code_of([&] { chain_create(f.doc, a, d, 3); }), errc::conflicting_membership);
    EXPECT_EQ(code_of([&] { group(f.doc, {a}); }), errc::conflicting_membership);
    EXPECT_EQ(code_of([&] { chain_update(f.doc, 999); }), errc::unknown_id);
}

TEST(Chain, RemovingAnyMemberDissolves) {
    for (std::size_t victim = 0; victim < 4; ++victim) {
        fixture f;
        const auto id = chain_create(f.doc, f.at(0), f.at(1), 4);
        const auto members = f.doc.chains.at(id).members;
        remove_object(f.doc, members[victim]);
        EXPECT_TRUE(f.doc.chains.empty());
        for (auto m : members) {
            if (m != members[victim]) {
                EXPECT_FALSE(f.doc.object(m).chain.has_value());
            }
        }
        check_invariants(f.doc);
    }
}

TEST(ChainProperty, MembersFollowPowerLaw) {
    auto g = rng(602);
    for (int trial = 0; trial < 50; ++trial) {
        fixture f;
        const auto base = spawn(f.doc, f.cube, random_transform(g));
        const auto second = spawn(f.doc, f.cube, compose(f.doc.object(base).transform, random_transform(g, 1)));
        const std::size_t n = 2 + g() % 40;
        const auto id = chain_create(f.doc, base, second, n);
        // Move the second copy, re-derive, then move the whole chain.
        f.doc.object(second).transform = compose(f.doc.object(base).transform, random_transform(g, 1));
        chain_update(f.doc, id);
        chain_move_rigid(f.doc, id, g() % n, random_transform(g));
        const auto& c = f.doc.chains.at(id);
        const auto t0 = f.doc.object(c.base()).transform;
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_LE(max_component_difference(f.doc.object(c.members[i]).transform,
                                               compose(t0, transform_power(c.t_ab, static_cast<unsigned>(i)))), 1e-9);
        }
    }
}

// ---------- keyframes and evaluation

TEST(Keyframes, ReplaceAtSameTime) {
    fixture f;
    const auto a = f.at(0);
    set_keyframe(f.doc, a, 1.0);
    f.doc.object(a).transform = RigidTransform::translate(5, 0, 0);
    set_keyframe(f.doc, a, 1.0);
    ASSERT_EQ(f.doc.object(a).keyframes.size(), 1u);
    EXPECT_EQ(f.doc.object(a).keyframes[0].transform.translation.x, 5);
    set_keyframe(f.doc, a, 0.5);
    EXPECT_EQ(f.doc.object(a).keyframes.front().time, 0.5);
    EXPECT_TRUE(has_keyframe_at(f.doc.object(a), 1.0));
    EXPECT_FALSE(has_keyframe_at(f.doc.object(a), 0.75));
    EXPECT_EQ(code_of([&] { set_keyframe(f.doc, a, -1); }), errc::time_out_of_range);
    EXPECT_EQ(code_of([&] { set_keyframe(f.doc, a, 10.5); }), errc::time_out_of_range);
}

TEST(Evaluate, TwoKeyframes) {
    fixture f;
    const auto a = f.at(0);
    set_keyframe(f.doc, a, 0.0);
    f.doc.object(a).transform = compose(RigidTransform::translate(2, 0, 0), rot_z_deg(90));
    f.doc.object(a).color.rgb = {0, 0, 0};
    set_keyframe(f.doc, a, 2.0);
    const auto m = evaluate_object(f.doc.object(a), 1.0);
    expect_vec(m.transform.translation, {1, 0, 0}, 1e-12);
    EXPECT_LE(max_component_difference({m.transform.rotation, {}}, rot_z_deg(45)), 1e-12);
    EXPECT_NEAR(m.color.rgb[0], 0.4, 1e-12);
    // Clamped outside the keyed range.
    EXPECT_EQ(evaluate_object(f.doc.object(a), 5.0).transform, f.doc.object(a).keyframes.back().transform);
}

TEST(Evaluate, ExactAtKnots) {
    auto g = rng(603);
    fixture f;
    const auto a = f.at(0);
    for (double t : {0.0, 1.5, 2.0, 4.0, 7.25}) {
        f.doc.object(a).transform = random_transform(g);
        set_keyframe(f.doc, a, t);
    }
    for (const auto& k : f.doc.object(a).keyframes) EXPECT_EQ(evaluate_object(f.doc.object(a), k.time).transform, k.transform);
}

TEST(Evaluate, CatmullRomMatchesHermiteOracle) {
    auto g = rng(604);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p0 = random_vec(g, -3, 3), p1 = random_vec(g, -3, 3), p2 = random_vec(g, -3, 3), p3 = random_vec(g, -3, 3);
        const double u = uniform(g, 0, 1);
        const Vec3 got = catmull_rom_centripetal(p0, p1, p2, p3, u);
        const Vec3 want = hermite_oracle(p0, p1, p2, p3, u);
        ASSERT_LE(norm(got - want), 1e-9 * (1 + norm(want)));
    }
    expect_vec(catmull_rom_centripetal({}, {1, 0, 0}, {1, 0, 0}, {}, 0.3), {1, 0, 0}, 0);
}

TEST(Evaluate, SquarePathHasNoJumps) {
    fixture f;
    const auto a = f.at(0);
    const Vec3 corners[4] = {{0, 0, 0}, {4, 0, 0}, {4, 4, 0}, {0, 4, 0}};
    for (int i = 0; i < 4; ++i) {
        f.doc.object(a).transform = RigidTransform::translate(corners[i].x, corners[i].y, corners[i].z);
        set_keyframe(f.doc, a, 3.0 * i);
    }
    std::vector<double> steps;
    Vec3 prev = evaluate_object(f.doc.object(a), 0).transform.translation;
    for (int i = 1; i <= 9000; ++i) {
        const Vec3 p = evaluate_object(f.doc.object(a), i * 1e-3).transform.translation;
        steps.push_back(norm(p - prev));
        prev = p;
    }
    auto sorted = steps;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    EXPECT_GT(median, 0);
    EXPECT_LE(*std::max_element(steps.begin(), steps.end()), 10 * median);
}

TEST(Evaluate, ApplyTimeWritesStateAndUpdatesChains) {
    fixture f;
    const auto base = f.at(0), second = f.at(1);
    const auto id = chain_create(f.doc, base, second, 4);
    set_keyframe(f.doc, second, 0.0);
    f.doc.object(second).transform = RigidTransform::translate(2, 0, 0);
    set_keyframe(f.doc, second, 2.0);
    apply_time(f.doc, 2.0);
    EXPECT_EQ(f.doc.current_time, 2.0);
    const auto& c = f.doc.chains.at(id);
    EXPECT_NEAR(f.doc.object(c.members[3]).transform.translation.x, 6, 1e-12);
    EXPECT_EQ(code_of([&] { apply_time(f.doc, 11); }), errc::time_out_of_range);
}

// ---------- overlay

TEST(Overlay, SingleObject) {
    fixture f;
    const auto a = f.at(2, 0, 0);
    set_keyframe(f.doc, a, 0.0);
    const auto o = selection_overlay(f.doc, {Selection::Kind::object, a});
    EXPECT_EQ(o.tag, "single");
    ASSERT_EQ(o.edges.size(), 12u);
    for (const auto& e : o.edges) EXPECT_NEAR(norm(e.q - e.p), 1, 1e-12);
    EXPECT_TRUE(o.ribbons.at(a));
}

TEST(Overlay, GroupUsesCombinedBox) {
    fixture f;
    const auto a = f.at(0), b = f.at(3, 1, 0);
    const auto g = group(f.doc, {a, b});
    set_keyframe(f.doc, b, 0.0);
    const auto o = selection_overlay(f.doc, {Selection::Kind::group, g});
    EXPECT_EQ(o.tag, "group");
    ASSERT_EQ(o.edges.size(), 12u);
    double total = 0;
    for (const auto& e : o.edges) total += norm(e.q - e.p);
    EXPECT_NEAR(total, 4 * (4 + 2 + 1), 1e-12);
    EXPECT_FALSE(o.ribbons.at(a));
    EXPECT_TRUE(o.ribbons.at(b));
    EXPECT_EQ(code_of([&] { selection_overlay(f.doc, {Selection::Kind::group, 999}); }), errc::unknown_id);
}

TEST(Colormap, Endpoints) {
    EXPECT_TRUE(is_known_colormap("rainbow"));
    EXPECT_FALSE(is_known_colormap("viridis"));
    const auto lo = colormap_rgb("blue-white-red", 0), mid = colormap_rgb("blue-white-red", 0.5), hi = colormap_rgb("blue-white-red", 7);
    EXPECT_EQ(lo, (std::array<double, 3>{0, 0, 1}));
    EXPECT_EQ(mid, (std::array<double, 3>{1, 1, 1}));
    EXPECT_EQ(hi, (std::array<double, 3>{1, 0, 0}));
    EXPECT_EQ(code_of([] { colormap_rgb("viridis", 0.5); }), errc::invalid_argument);
}
