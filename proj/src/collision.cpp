#include "asmb/collision.hpp"

#include <algorithm>
#include <numeric>

#include "asmb/error.hpp"
#include "asmb/kernels.hpp"

namespace asmb {

const char* to_string(PhysicsMode mode) {
    switch (mode) {
    case PhysicsMode::full: return "full";
    case PhysicsMode::pose: return "pose";
    case PhysicsMode::off: return "off";
    }
    return "off";
}

PhysicsMode physics_mode_from_string(std::string_view s) {
    if (s == "full") return PhysicsMode::full;
    if (s == "pose") return PhysicsMode::pose;
    if (s == "off") return PhysicsMode::off;
    throw error(errc::invalid_argument, "unknown physics mode '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Triangle/triangle

namespace {

struct plane {
    Vec3 n; // unit
    double d; // n . p + d == 0
    double tol;
};

bool make_plane(const Vec3& p0, const Vec3& p1, const Vec3& p2, plane& out) {
    const Vec3 n = cross(p1 - p0, p2 - p0);
    const double len = norm(n);
    if (len == 0) return false;
    out.n = n / len;
    out.d = -dot(out.n, p0);
    out.tol = 1e-12 * (1.0 + std::abs(out.d));
    return true;
}

void signed_distances(const plane& pl, const Vec3 t[3], double d[3]) {
    for (int i = 0; i < 3; ++i) {
        d[i] = dot(pl.n, t[i]) + pl.d;
        if (std::abs(d[i]) <= pl.tol) d[i] = 0;
    }
}

bool same_side(const double d[3]) {
    return (d[0] > 0 && d[1] > 0 && d[2] > 0) || (d[0] < 0 && d[1] < 0 && d[2] < 0);
}

int plane_cut(const Vec3 t[3], const double d[3], Vec3 out[4]) {
    int k = 0;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        if (d[i] == 0) out[k++] = t[i];
        if ((d[i] < 0 && d[j] > 0) || (d[i] > 0 && d[j] < 0)) {
            out[k++] = t[i] + (t[j] - t[i]) * (d[i] / (d[i] - d[j]));
        }
    }
    return k;
}

struct v2 {
    double u, v;
};

double orient(const v2& a, const v2& b, const v2& c) {
    return (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u);
}

bool point_in_tri(const v2& p, const v2& a, const v2& b, const v2& c) {
    const double o1 = orient(a, b, p), o2 = orient(b, c, p), o3 = orient(c, a, p);
    const bool has_neg = o1 < 0 || o2 < 0 || o3 < 0;
    const bool has_pos = o1 > 0 || o2 > 0 || o3 > 0;
    return !(has_neg && has_pos);
}

bool on_segment(const v2& a, const v2& b, const v2& p) {
    return std::min(a.u, b.u) <= p.u && p.u <= std::max(a.u, b.u) && std::min(a.v, b.v) <= p.v &&
           p.v <= std::max(a.v, b.v);
}

// Returns true and the parameter along (p1, p2) of one witness point.
bool segments_cross(const v2& p1, const v2& p2, const v2& q1, const v2& q2, double& s) {
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        s = d1 / (d1 - d2);
        return true;
    }
    if (d1 == 0 && on_segment(q1, q2, p1)) { s = 0; return true; }
    if (d2 == 0 && on_segment(q1, q2, p2)) { s = 1; return true; }
    if (d3 == 0 && on_segment(p1, p2, q1)) {
        const double len = std::abs(p2.u - p1.u) > std::abs(p2.v - p1.v) ? (q1.u - p1.u) / (p2.u - p1.u)
                                                                          : (q1.v - p1.v) / (p2.v - p1.v);
        s = len;
        return true;
    }
    if (d4 == 0 && on_segment(p1, p2, q2)) {
        const double len = std::abs(p2.u - p1.u) > std::abs(p2.v - p1.v) ? (q2.u - p1.u) / (p2.u - p1.u)
                                                                          : (q2.v - p1.v) / (p2.v - p1.v);
        s = len;
        return true;
    }
    return false;
}

bool coplanar_overlap(const Vec3 a[3], const Vec3 b[3], const Vec3& n, Segment* seg) {
    const Vec3 an{std::abs(n.x), std::abs(n.y), std::abs(n.z)};
    std::size_t drop = 0;
    if (an.y > an[drop]) drop = 1;
    if (an.z > an[drop]) drop = 2;
    const std::size_t iu = drop == 0 ? 1 : 0;
    const std::size_t iv = drop == 2 ? 1 : 2;
    v2 pa[3], pb[3];
    for (int i = 0; i < 3; ++i) {
        pa[i] = {a[i][iu], a[i][iv]};
        pb[i] = {b[i][iu], b[i][iv]};
    }
    Vec3 sum;
    int count = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            if (segments_cross(pa[i], pa[(i + 1) % 3], pb[j], pb[(j + 1) % 3], s)) {
                sum += a[i] + (a[(i + 1) % 3] - a[i]) * s;
                ++count;
            }
        }
    }
    for (int i = 0; i < 3; ++i) {
        if (point_in_tri(pa[i], pb[0], pb[1], pb[2])) { sum += a[i]; ++count; }
        if (point_in_tri(pb[i], pa[0], pa[1], pa[2])) { sum += b[i]; ++count; }
    }
    if (count == 0) return false;
    if (seg) seg->p = seg->q = sum / static_cast<double>(count);
    return true;
}

} // namespace

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0, const Vec3& b1,
                         const Vec3& b2, Segment* seg) {
    const Vec3 a[3] = {a0, a1, a2};
    const Vec3 b[3] = {b0, b1, b2};
    plane pa, pb;
    if (!make_plane(a0, a1, a2, pa) || !make_plane(b0, b1, b2, pb)) return false;

    double da[3], db[3];
    signed_distances(pb, a, da);
    if (same_side(da)) return false;
    if (da[0] == 0 && da[1] == 0 && da[2] == 0) return coplanar_overlap(a, b, pb.n, seg);
    signed_distances(pa, b, db);
    if (same_side(db)) return false;
    if (db[0] == 0 && db[1] == 0 && db[2] == 0) return coplanar_overlap(a, b, pa.n, seg);

    const Vec3 dir = cross(pa.n, pb.n);
    if (dot(dir, dir) < 1e-24) return coplanar_overlap(a, b, pb.n, seg);

    Vec3 ca[4], cb[4];
    const int ka = plane_cut(a, da, ca);
    const int kb = plane_cut(b, db, cb);
    if (ka == 0 || kb == 0) return false;

    auto extremes = [&](const Vec3* pts, int k, double& lo, double& hi, int& ilo, int& ihi) {
        lo = hi = dot(pts[0], dir);
        ilo = ihi = 0;
        for (int i = 1; i < k; ++i) {
            const double t = dot(pts[i], dir);
            if (t < lo) { lo = t; ilo = i; }
            if (t > hi) { hi = t; ihi = i; }
        }
    };
    double alo, ahi, blo, bhi;
    int ialo, iahi, iblo, ibhi;
    extremes(ca, ka, alo, ahi, ialo, iahi);
    extremes(cb, kb, blo, bhi, iblo, ibhi);
    if (std::max(alo, blo) > std::min(ahi, bhi)) return false;
    if (seg) {
        seg->p = alo >= blo ? ca[ialo] : cb[iblo];
        seg->q = ahi <= bhi ? ca[iahi] : cb[ibhi];
    }
    return true;
}

// ---------------------------------------------------------------------------
// Broad phase

SweepResult broad_phase_sweep(std::span<const BoxEntry> objects) {
    struct endpoint {
        double value;
        int is_end;
        ObjectId id;
        std::uint32_t index;
    };
    std::vector<endpoint> ends;
    ends.reserve(objects.size() * 2);
    for (std::uint32_t i = 0; i < objects.size(); ++i) {
        ends.push_back({objects[i].box.min.x, 0, objects[i].id, i});
        ends.push_back({objects[i].box.max.x, 1, objects[i].id, i});
    }
    std::sort(ends.begin(), ends.end(), [](const endpoint& l, const endpoint& r) {
        if (l.value != r.value) return l.value < r.value;
        if (l.is_end != r.is_end) return l.is_end < r.is_end;
        return l.id < r.id;
    });

    SweepResult out;
    std::vector<std::uint32_t> active;
    for (const auto& e : ends) {
        if (e.is_end) {
            active.erase(std::find(active.begin(), active.end(), e.index));
            continue;
        }
        const LocalBox& box = objects[e.index].box;
        for (auto other : active) {
            const LocalBox& ob = objects[other].box;
            ++out.pair_tests;
            if (box.min.y <= ob.max.y && ob.min.y <= box.max.y && box.min.z <= ob.max.z && ob.min.z <= box.max.z) {
                out.pairs.push_back(CandidatePair::make(e.id, objects[other].id));
            }
        }
        active.push_back(e.index);
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

// ---------------------------------------------------------------------------
// Narrow phase

namespace {

LocalBox transform_box(const LocalBox& box, const Mat34& m) {
    const Vec3 c = m.apply(box.center());
    const Vec3 e = box.extent() * 0.5;
    Vec3 r;
    for (int i = 0; i < 3; ++i) {
        r[static_cast<std::size_t>(i)] = std::abs(m(i, 0)) * e.x + std::abs(m(i, 1)) * e.y + std::abs(m(i, 2)) * e.z;
        r[static_cast<std::size_t>(i)] += 1e-12 * (1.0 + std::abs(c[static_cast<std::size_t>(i)]) + r[static_cast<std::size_t>(i)]);
    }
    return {c - r, c + r};
}

double volume(const LocalBox& b) {
    const Vec3 e = b.extent();
    return e.x * e.y * e.z + 1e-30 * (e.x + e.y + e.z);
}

NarrowResult summarize(const MeshAsset& a, const RigidTransform& ta, const MeshAsset& b, const RigidTransform& tb,
                       std::span<const Vec3> b_in_a, std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs,
                       std::span<const Segment> segments) {
    NarrowResult r;
    // Work in A's local frame; rotate the normal and point to world at the end.
    Vec3 mid_sum;
    for (const auto& s : segments) mid_sum += (s.p + s.q) * 0.5;
    const Vec3 point_a = mid_sum / static_cast<double>(segments.size());

    std::vector<std::uint32_t> tris_a, tris_b;
    for (const auto& [ia, ib] : pairs) {
        tris_a.push_back(ia);
        tris_b.push_back(ib);
    }
    std::sort(tris_a.begin(), tris_a.end());
    tris_a.erase(std::unique(tris_a.begin(), tris_a.end()), tris_a.end());
    std::sort(tris_b.begin(), tris_b.end());
    tris_b.erase(std::unique(tris_b.begin(), tris_b.end()), tris_b.end());

    // Net area-weighted normal per side. The side whose normals agree most
    // (a face rather than an edge or corner) defines the contact direction.
    Vec3 sum_b, sum_a;
    double total = 0;
    for (auto ib : tris_b) {
        const auto& t = b.mesh.triangles[ib];
        const Vec3 c = cross(b_in_a[t[1]] - b_in_a[t[0]], b_in_a[t[2]] - b_in_a[t[0]]);
        sum_b += c;
        total += norm(c);
    }
    for (auto ia : tris_a) {
        const auto& t = a.mesh.triangles[ia];
        const Vec3 c = cross(a.mesh.vertices[t[1]] - a.mesh.vertices[t[0]], a.mesh.vertices[t[2]] - a.mesh.vertices[t[0]]);
        sum_a += c;
        total += norm(c);
    }
    // A's outward normals point toward B, hence the sign flip.
    Vec3 weighted = norm(sum_b) >= norm(sum_a) ? sum_b : -sum_a;
    if (!(norm(weighted) > 1e-9 * total)) weighted = sum_b - sum_a;
    Vec3 n_a;
    const double wl = norm(weighted);
    if (wl > 1e-9 * total && wl > 0) {
        n_a = weighted / wl;
    } else {
        const Vec3 ca = a.centroid;
        const Vec3 cb = inverse(ta).apply(tb.apply(b.centroid));
        const Vec3 d = ca - cb;
        const double dl = norm(d);
        n_a = dl > 1e-12 ? d / dl : Vec3{0, 0, 1};
    }

    // Depth along the normal of the intersecting-triangle vertices that sit inside
    // the other body's box; far corners of large triangles would overstate it.
    const RigidTransform b_from_a = inverse(relative_transform(ta, tb));
    double pen = 0, pen_any = 0;
    bool inside_any = false;
    for (auto ia : tris_a) {
        for (auto v : a.mesh.triangles[ia]) {
            const double d = dot(point_a - a.mesh.vertices[v], n_a);
            pen_any = std::max(pen_any, d);
            if (b.box.contains(b_from_a.apply(a.mesh.vertices[v]))) {
                inside_any = true;
                pen = std::max(pen, d);
            }
        }
    }
    for (auto ib : tris_b) {
        for (auto v : b.mesh.triangles[ib]) {
            const double d = dot(b_in_a[v] - point_a, n_a);
            pen_any = std::max(pen_any, d);
            if (a.box.contains(b_in_a[v])) {
                inside_any = true;
                pen = std::max(pen, d);
            }
        }
    }
    if (!inside_any) {
        // Bounded by the overlap of the two vertex sets projected on the normal.
        double a_lo = 1e300, a_hi = -1e300, b_lo = 1e300, b_hi = -1e300;
        for (const auto& v : a.mesh.vertices) {
            a_lo = std::min(a_lo, dot(v, n_a));
            a_hi = std::max(a_hi, dot(v, n_a));
        }
        for (const auto& v : b_in_a) {
            b_lo = std::min(b_lo, dot(v, n_a));
            b_hi = std::max(b_hi, dot(v, n_a));
        }
        pen = std::min(pen_any, std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo)));
    }

    Vec3 n_world = ta.apply_vector(n_a);
    n_world = n_world / norm(n_world);
    r.contact_normal = n_world;
    r.contact_point = ta.apply(point_a);
    r.penetration_estimate = pen;
    r.triangle_pairs = std::move(pairs);
    return r;
}

} // namespace

std::optional<NarrowResult> narrow_phase(const MeshAsset& a, const RigidTransform& ta, const MeshAsset& b,
                                         const RigidTransform& tb) {
    const RigidTransform rel = relative_transform(ta, tb);
    const Mat34 m = rel.to_matrix();
    std::vector<Vec3> bv(b.mesh.vertices.size());
    kernels::transform_points(m, b.mesh.vertices, bv);

    struct hit {
        std::pair<std::uint32_t, std::uint32_t> tris;
        Segment seg;
    };
    std::vector<hit> hits;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0, 0}};
    const auto& na_nodes = a.bvh.nodes;
    const auto& nb_nodes = b.bvh.nodes;
    while (!stack.empty()) {
        const auto [ia, ib] = stack.back();
        stack.pop_back();
        const BvhNode& na = na_nodes[ia];
        const BvhNode& nb = nb_nodes[ib];
        if (!overlaps(na.box, transform_box(nb.box, m))) continue;
        if (na.is_leaf() && nb.is_leaf()) {
            for (std::uint32_t i = na.first; i < na.first + na.count; ++i) {
                const auto ta_i = a.bvh.order[i];
                const auto& t = a.mesh.triangles[ta_i];
                const Vec3& a0 = a.mesh.vertices[t[0]];
                const Vec3& a1 = a.mesh.vertices[t[1]];
                const Vec3& a2 = a.mesh.vertices[t[2]];
                for (std::uint32_t j = nb.first; j < nb.first + nb.count; ++j) {
                    const auto tb_j = b.bvh.order[j];
                    const auto& u = b.mesh.triangles[tb_j];
                    Segment s;
                    if (triangles_intersect(a0, a1, a2, bv[u[0]], bv[u[1]], bv[u[2]], &s)) {
                        hits.push_back({{ta_i, tb_j}, s});
                    }
                }
            }
        } else if (nb.is_leaf() || (!na.is_leaf() && volume(na.box) >= volume(nb.box))) {
            stack.push_back({na.right, ib});
            stack.push_back({na.left, ib});
        } else {
            stack.push_back({ia, nb.right});
            stack.push_back({ia, nb.left});
        }
    }
    if (hits.empty()) return std::nullopt;
    std::sort(hits.begin(), hits.end(), [](const hit& l, const hit& r) { return l.tris < r.tris; });
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::vector<Segment> segs;
    pairs.reserve(hits.size());
    segs.reserve(hits.size());
    for (const auto& h : hits) {
        pairs.push_back(h.tris);
        segs.push_back(h.seg);
    }
    return summarize(a, ta, b, tb, bv, std::move(pairs), segs);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> brute_force_triangle_pairs(const MeshAsset& a,
                                                                                const RigidTransform& ta,
                                                                                const MeshAsset& b,
                                                                                const RigidTransform& tb) {
    const Mat34 m = relative_transform(ta, tb).to_matrix();
    std::vector<Vec3> bv(b.mesh.vertices.size());
    kernels::scalar::transform_points(m, b.mesh.vertices, bv);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t i = 0; i < a.mesh.triangles.size(); ++i) {
        const auto& t = a.mesh.triangles[i];
        for (std::uint32_t j = 0; j < b.mesh.triangles.size(); ++j) {
            const auto& u = b.mesh.triangles[j];
            if (triangles_intersect(a.mesh.vertices[t[0]], a.mesh.vertices[t[1]], a.mesh.vertices[t[2]], bv[u[0]],
                                    bv[u[1]], bv[u[2]])) {
                out.push_back({i, j});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pose mode and crystal filtering

std::vector<CandidatePair> pose_mode_pairs(std::span<const ObjectId> moving, std::span<const ObjectId> all) {
    std::vector<ObjectId> mv(moving.begin(), moving.end());
    std::sort(mv.begin(), mv.end());
    mv.erase(std::unique(mv.begin(), mv.end()), mv.end());
    std::vector<ObjectId> everyone(all.begin(), all.end());
    std::sort(everyone.begin(), everyone.end());
    everyone.erase(std::unique(everyone.begin(), everyone.end()), everyone.end());
    for (auto id : mv) {
        if (!std::binary_search(everyone.begin(), everyone.end(), id)) {
            throw error(errc::unknown_id, "moving object " + std::to_string(id) + " is not in the scene");
        }
    }
    std::vector<CandidatePair> out;
    out.reserve(mv.size() * everyone.size());
    for (auto m : mv) {
        for (auto o : everyone) {
            if (o == m) continue;
            const bool other_moving = std::binary_search(mv.begin(), mv.end(), o);
            if (!other_moving || o > m) out.push_back(CandidatePair::make(m, o));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CandidatePair> crystal_internal_pairs(std::span<const ChainMember> members) {
    std::vector<CandidatePair> out;
    if (members.size() < 2) return out;
    const RigidTransform step = relative_transform(members[0].transform, members[1].transform);
    for (std::size_t i = 0; i + 1 < members.size(); ++i) {
        if (members[i + 1].asset != members[0].asset) {
            throw error(errc::chain_invariant_violated, "chain members do not share one mesh", std::nullopt,
                        std::to_string(members[i + 1].id));
        }
        const RigidTransform rel = relative_transform(members[i].transform, members[i + 1].transform);
        if (max_component_difference(rel, step) > 1e-6) {
            throw error(errc::chain_invariant_violated,
                        "relative transform of members " + std::to_string(i + 1) + "," + std::to_string(i + 2) +
                            " differs from the chain step",
                        std::nullopt, std::to_string(members[i + 1].id));
        }
    }
    for (std::size_t j = 1; j < members.size(); ++j) out.push_back(CandidatePair::make(members[0].id, members[j].id));
    return out;
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

struct candidate {
    CandidatePair pair;
    std::optional<std::uint32_t> offset;
    bool operator<(const candidate& o) const { return pair < o.pair; }
};

} // namespace

CollisionResult collide_scene(std::span<const CollisionBody> bodies, std::span<const ChainGroup> chains,
                              PhysicsMode mode, std::span<const ObjectId> moving) {
    CollisionResult result;
    result.stats.n_objects = bodies.size();

    std::vector<ObjectId> mv(moving.begin(), moving.end());
    std::sort(mv.begin(), mv.end());
    mv.erase(std::unique(mv.begin(), mv.end()), mv.end());
    result.stats.n_moving = mv.size();
    if (mode == PhysicsMode::off) return result;

    auto index_of = [&](ObjectId id) -> std::size_t {
        const auto it = std::lower_bound(bodies.begin(), bodies.end(), id,
                                         [](const CollisionBody& b, ObjectId v) { return b.id < v; });
        if (it == bodies.end() || it->id != id) throw error(errc::unknown_id, "unknown object " + std::to_string(id));
        return static_cast<std::size_t>(it - bodies.begin());
    };
    for (std::size_t i = 1; i < bodies.size(); ++i) {
        if (bodies[i - 1].id >= bodies[i].id) throw error(errc::invalid_argument, "bodies must be sorted by unique id");
    }

    std::vector<LocalBox> boxes;
    boxes.reserve(bodies.size());
    for (const auto& b : bodies) boxes.push_back(world_aabb(b.asset->box, b.transform));

    std::vector<candidate> cands;
    if (mode == PhysicsMode::full) {
        std::vector<BoxEntry> entries;
        entries.reserve(bodies.size());
        for (std::size_t i = 0; i < bodies.size(); ++i) entries.push_back({bodies[i].id, boxes[i]});
        auto sweep = broad_phase_sweep(entries);
        result.stats.pair_tests_executed = sweep.pair_tests;
        for (const auto& p : sweep.pairs) cands.push_back({p, std::nullopt});
    } else {
        std::vector<std::size_t> moving_idx;
        for (auto id : mv) moving_idx.push_back(index_of(id));

        // Chains moving as a unit: members tested externally only, plus the
        // internal shortcut when the base pair is being edited.
        std::vector<int> chain_of(bodies.size(), -1);
        for (std::size_t c = 0; c < chains.size(); ++c) {
            const bool all_moving = std::all_of(chains[c].members.begin(), chains[c].members.end(), [&](ObjectId id) {
                return std::binary_search(mv.begin(), mv.end(), id);
            });
            if (!all_moving) {
                if (chains[c].reshaping) throw error(errc::invalid_argument, "reshaping chain must be moving");
                continue;
            }
            for (auto id : chains[c].members) chain_of[index_of(id)] = static_cast<int>(c);
        }

        kernels::BoxSoA stationary;
        std::vector<std::size_t> stationary_idx;
        stationary.reserve(bodies.size());
        for (std::size_t i = 0; i < bodies.size(); ++i) {
            if (!std::binary_search(mv.begin(), mv.end(), bodies[i].id)) {
                stationary.push_back({boxes[i].min, boxes[i].max});
                stationary_idx.push_back(i);
            }
        }

        std::vector<std::uint32_t> hits;
        for (std::size_t k = 0; k < moving_idx.size(); ++k) {
            const std::size_t i = moving_idx[k];
            hits.clear();
            kernels::overlapping_boxes({boxes[i].min, boxes[i].max}, stationary, hits);
            result.stats.pair_tests_executed += stationary.size();
            for (auto h : hits) cands.push_back({CandidatePair::make(bodies[i].id, bodies[stationary_idx[h]].id), {}});
            for (std::size_t l = k + 1; l < moving_idx.size(); ++l) {
                const std::size_t j = moving_idx[l];
                if (chain_of[i] >= 0 && chain_of[i] == chain_of[j]) continue;
                ++result.stats.pair_tests_executed;
                if (overlaps(boxes[i], boxes[j])) cands.push_back({CandidatePair::make(bodies[i].id, bodies[j].id), {}});
            }
        }

        for (const auto& chain : chains) {
            if (!chain.reshaping) continue;
            std::vector<ChainMember> members;
            for (auto id : chain.members) {
                const auto& b = bodies[index_of(id)];
                members.push_back({b.id, b.transform, b.asset});
            }
            const auto internal = crystal_internal_pairs(members);
            for (std::size_t k = 0; k < internal.size(); ++k) {
                ++result.stats.pair_tests_executed;
                if (overlaps(boxes[index_of(chain.members[0])], boxes[index_of(chain.members[k + 1])])) {
                    cands.push_back({internal[k], static_cast<std::uint32_t>(k + 1)});
                }
            }
        }
        std::sort(cands.begin(), cands.end());
    }

    result.stats.broad_candidates = cands.size();
    for (const auto& c : cands) {
        const auto& ba = bodies[index_of(c.pair.a)];
        const auto& bb = bodies[index_of(c.pair.b)];
        auto r = narrow_phase(*ba.asset, ba.transform, *bb.asset, bb.transform);
        if (!r) continue;
        ContactReport rep;
        rep.pair = c.pair;
        rep.triangle_pairs = std::move(r->triangle_pairs);
        rep.contact_normal = r->contact_normal;
        rep.penetration_estimate = r->penetration_estimate;
        rep.contact_point = r->contact_point;
        rep.chain_offset = c.offset;
        result.contacts.push_back(std::move(rep));
    }
    result.stats.pairs_colliding = result.contacts.size();
    return result;
}

} // namespace asmb
