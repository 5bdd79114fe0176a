#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "asmb/asset.hpp"
#include "asmb/geometry.hpp"
#include "asmb/scene.hpp"
#include "asmb/transforms.hpp"

namespace asmb::test {

inline std::uint64_t seed() {
    if (const char* s = std::getenv("ASMB_SEED")) return std::strtoull(s, nullptr, 10);
    return 20240611;
}

inline std::mt19937_64 rng(std::uint64_t salt = 0) { return std::mt19937_64(seed() ^ (salt * 0x9e3779b97f4a7c15ull)); }

inline double uniform(std::mt19937_64& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

inline Vec3 random_vec(std::mt19937_64& g, double lo, double hi) {
    return {uniform(g, lo, hi), uniform(g, lo, hi), uniform(g, lo, hi)};
}

inline UnitQuat random_rotation(std::mt19937_64& g) {
    std::normal_distribution<double> n(0, 1);
    return UnitQuat(n(g), n(g), n(g), n(g));
}

inline RigidTransform random_transform(std::mt19937_64& g, double span = 5) {
    return {random_rotation(g), random_vec(g, -span, span)};
}

inline RigidTransform rot_z_deg(double deg) { return RigidTransform::rotate({0, 0, 1}, deg * std::numbers::pi / 180.0); }

// --- 4x4 homogeneous matrix oracle, independent of the quaternion code ---

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 identity4() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) m[i][i] = 1;
    return m;
}

inline Mat4 mul4(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
        }
    }
    return r;
}

// Rotation matrix straight from the axis-angle (Rodrigues), not via quaternions.
inline Mat4 axis_angle4(Vec3 axis, double angle, Vec3 t = {}) {
    axis = axis / norm(axis);
    const double c = std::cos(angle), s = std::sin(angle), C = 1 - c;
    const double x = axis.x, y = axis.y, z = axis.z;
    Mat4 m = identity4();
    m[0] = {c + x * x * C, x * y * C - z * s, x * z * C + y * s, t.x};
    m[1] = {y * x * C + z * s, c + y * y * C, y * z * C - x * s, t.y};
    m[2] = {z * x * C - y * s, z * y * C + x * s, c + z * z * C, t.z};
    return m;
}

inline Mat4 translate4(Vec3 t) {
    Mat4 m = identity4();
    m[0][3] = t.x;
    m[1][3] = t.y;
    m[2][3] = t.z;
    return m;
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat4 inverse4(Mat4 a) {
    Mat4 inv = identity4();
    for (int c = 0; c < 4; ++c) {
        int p = c;
        for (int r = c + 1; r < 4; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        std::swap(a[c], a[p]);
        std::swap(inv[c], inv[p]);
        const double d = a[c][c];
        for (int j = 0; j < 4; ++j) {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            for (int j = 0; j < 4; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

// Quaternion -> matrix by the textbook formula (kept separate from to_matrix()).
inline Mat4 to_mat4(const RigidTransform& t) {
    const double w = t.rotation.w, x = t.rotation.x, y = t.rotation.y, z = t.rotation.z;
    Mat4 m = identity4();
    m[0] = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y), t.translation.x};
    m[1] = {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x), t.translation.y};
    m[2] = {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y), t.translation.z};
    return m;
}

inline double max_diff(const Mat4& a, const Mat4& b) {
    double d = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
    }
    return d;
}

inline double max_diff(const RigidTransform& t, const Mat4& m) { return max_diff(to_mat4(t), m); }

// --- meshes ---

// Axis-aligned box with 12 outward-wound triangles.
inline TriMesh box_mesh(Vec3 lo, Vec3 hi) {
    TriMesh m;
    for (int i = 0; i < 8; ++i) m.vertices.push_back({i & 1 ? hi.x : lo.x, i & 2 ? hi.y : lo.y, i & 4 ? hi.z : lo.z});
    const std::uint32_t f[12][3] = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                                    {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
    for (const auto& t : f) m.triangles.push_back({t[0], t[1], t[2]});
    return m;
}

inline TriMesh unit_cube() { return box_mesh({0, 0, 0}, {1, 1, 1}); }

inline AssetPtr cube_asset(double edge = 1.0) { return make_asset(box_mesh({0, 0, 0}, {edge, edge, edge})); }

inline AssetPtr centered_box_asset(Vec3 half) { return make_asset(box_mesh(-half, half)); }

// UV sphere with roughly `target` triangles, outward winding.
inline TriMesh uv_sphere(double radius, unsigned rings, unsigned segments, Vec3 center = {}) {
    TriMesh m;
    m.vertices.push_back(center + Vec3{0, 0, radius});
    for (unsigned r = 1; r < rings; ++r) {
        const double th = std::numbers::pi * r / rings;
        for (unsigned s = 0; s < segments; ++s) {
            const double ph = 2 * std::numbers::pi * s / segments;
            m.vertices.push_back(center + Vec3{radius * std::sin(th) * std::cos(ph), radius * std::sin(th) * std::sin(ph),
                                               radius * std::cos(th)});
        }
    }
    m.vertices.push_back(center + Vec3{0, 0, -radius});
    const auto ring = [&](unsigned r, unsigned s) { return 1 + (r - 1) * segments + (s % segments); };
    const std::uint32_t south = static_cast<std::uint32_t>(m.vertices.size() - 1);
    for (unsigned s = 0; s < segments; ++s) m.triangles.push_back({0, ring(1, s), ring(1, s + 1)});
    for (unsigned r = 1; r + 1 < rings; ++r) {
        for (unsigned s = 0; s < segments; ++s) {
            m.triangles.push_back({ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)});
            m.triangles.push_back({ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)});
        }
    }
    for (unsigned s = 0; s < segments; ++s) m.triangles.push_back({ring(rings - 1, s), south, ring(rings - 1, s + 1)});
    return m;
}

// --- triangle oracle: segment/triangle crossing, independent of the library ---

inline bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Moller-Trumbore on the segment p->q, closed intervals.
    const Vec3 d = q - p;
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 h = cross(d, e2);
    const double det = dot(e1, h);
    if (std::abs(det) < 1e-14) return false;
    const double inv = 1.0 / det;
    const Vec3 s = p - a;
    const double u = inv * dot(s, h);
    if (u < -1e-12 || u > 1 + 1e-12) return false;
    const Vec3 qv = cross(s, e1);
    const double v = inv * dot(d, qv);
    if (v < -1e-12 || u + v > 1 + 1e-12) return false;
    const double t = inv * dot(e2, qv);
    return t >= -1e-12 && t <= 1 + 1e-12;
}

// Valid for non-coplanar triangle pairs.
inline bool oracle_triangles_intersect(const std::array<Vec3, 3>& A, const std::array<Vec3, 3>& B) {
    for (int i = 0; i < 3; ++i) {
        if (segment_hits_triangle(A[i], A[(i + 1) % 3], B[0], B[1], B[2])) return true;
        if (segment_hits_triangle(B[i], B[(i + 1) % 3], A[0], A[1], A[2])) return true;
    }
    return false;
}

inline std::array<Vec3, 3> world_triangle(const MeshAsset& a, const RigidTransform& t, std::uint32_t i) {
    const auto& tri = a.mesh.triangles[i];
    return {t.apply(a.mesh.vertices[tri[0]]), t.apply(a.mesh.vertices[tri[1]]), t.apply(a.mesh.vertices[tri[2]])};
}

} // namespace asmb::test
