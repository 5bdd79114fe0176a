#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "asmb/asset.hpp"
#include "asmb/transforms.hpp"

namespace asmb {

using ObjectId = std::uint64_t;

enum class PhysicsMode { full, pose, off };

const char* to_string(PhysicsMode mode);
PhysicsMode physics_mode_from_string(std::string_view s);

// Canonical: a < b.
struct CandidatePair {
    ObjectId a = 0;
    ObjectId b = 0;

    static CandidatePair make(ObjectId x, ObjectId y) { return x < y ? CandidatePair{x, y} : CandidatePair{y, x}; }
    auto operator<=>(const CandidatePair&) const = default;
};

struct ContactReport {
    CandidatePair pair;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> triangle_pairs; // (tri of a, tri of b), sorted
    Vec3 contact_normal; // unit, world, from b toward a
    double penetration_estimate = 0; // nm, >= 0
    Vec3 contact_point; // world
    // Chain-internal report standing for every member pair at this offset.
    std::optional<std::uint32_t> chain_offset;
};

struct CollisionStats {
    std::uint64_t n_objects = 0;
    std::uint64_t n_moving = 0;
    std::uint64_t pair_tests_executed = 0;
    std::uint64_t pairs_colliding = 0;
    std::uint64_t broad_candidates = 0;

    bool operator==(const CollisionStats&) const = default;
};

// --- triangle level ---

struct Segment {
    Vec3 p, q;
};

// Triangle/triangle overlap, touching counts. On intersection `seg` receives
// the intersection segment; coplanar overlaps report a degenerate segment at
// the mean of the overlap witness points.
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0, const Vec3& b1,
                         const Vec3& b2, Segment* seg = nullptr);

// --- broad phase ---

struct BoxEntry {
    ObjectId id;
    LocalBox box; // world frame
};

struct SweepResult {
    std::vector<CandidatePair> pairs; // sorted
    std::uint64_t pair_tests = 0; // x-overlapping pairs whose y/z extents were compared
};

// Sweep along x over closed intervals; endpoints sorted by (value, start before end, id).
SweepResult broad_phase_sweep(std::span<const BoxEntry> objects);

// --- narrow phase ---

struct NarrowResult {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> triangle_pairs;
    Vec3 contact_normal;
    double penetration_estimate = 0;
    Vec3 contact_point;
};

std::optional<NarrowResult> narrow_phase(const MeshAsset& a, const RigidTransform& ta, const MeshAsset& b,
                                         const RigidTransform& tb);

// O(T^2) reference over every triangle pair, used to check the BVH descent.
std::vector<std::pair<std::uint32_t, std::uint32_t>> brute_force_triangle_pairs(const MeshAsset& a,
                                                                                const RigidTransform& ta,
                                                                                const MeshAsset& b,
                                                                                const RigidTransform& tb);

// --- pose mode and crystal filtering ---

// Pairs with at least one moving member: m(n-m) + m(m-1)/2 of them.
std::vector<CandidatePair> pose_mode_pairs(std::span<const ObjectId> moving, std::span<const ObjectId> all);

struct ChainMember {
    ObjectId id;
    RigidTransform transform;
    const MeshAsset* asset;
};

// (first, j) for j = 2..n. Throws chain_invariant_violated when the members
// do not share a mesh or adjacent relative transforms differ by more than 1e-6.
std::vector<CandidatePair> crystal_internal_pairs(std::span<const ChainMember> members);

// --- orchestration ---

struct CollisionBody {
    ObjectId id;
    const MeshAsset* asset;
    RigidTransform transform;
};

struct ChainGroup {
    std::vector<ObjectId> members; // chain order, members[0] is the base
    // Base pair edited: internal shape changes and needs the internal shortcut.
    bool reshaping = false;
};

struct CollisionResult {
    std::vector<ContactReport> contacts; // canonical pair order
    CollisionStats stats;
};

// Bodies must be sorted by id. In pose mode, `moving` lists every object that
// moves this step (chains whose members all move are treated as units).
CollisionResult collide_scene(std::span<const CollisionBody> bodies, std::span<const ChainGroup> chains,
                              PhysicsMode mode, std::span<const ObjectId> moving);

} // namespace asmb
