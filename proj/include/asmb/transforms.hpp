#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace asmb {

// Scene units are nanometers.
struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
constexpr Vec3 min(const Vec3& a, const Vec3& b) {
    return {a.x < b.x ? a.x : b.x, a.y < b.y ? a.y : b.y, a.z < b.z ? a.z : b.z};
}
constexpr Vec3 max(const Vec3& a, const Vec3& b) {
    return {a.x > b.x ? a.x : b.x, a.y > b.y ? a.y : b.y, a.z > b.z ? a.z : b.z};
}

// Row-major 3x3 rotation plus translation column.
struct Mat34 {
    std::array<double, 12> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 4 + c)]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 4 + c)]; }

    Vec3 apply(const Vec3& p) const {
        return {m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3],
                m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
                m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11]};
    }
    Vec3 rotate(const Vec3& p) const {
        return {m[0] * p.x + m[1] * p.y + m[2] * p.z,
                m[4] * p.x + m[5] * p.y + m[6] * p.z,
                m[8] * p.x + m[9] * p.y + m[10] * p.z};
    }
};

// Rotation as a unit quaternion. Every producing operation renormalizes.
struct UnitQuat {
    double w = 1, x = 0, y = 0, z = 0;

    constexpr UnitQuat() = default;
    // Normalizes its input; a zero quaternion becomes the identity.
    UnitQuat(double w_, double x_, double y_, double z_);

    static UnitQuat identity() { return {}; }
    // Right-handed rotation of `angle` radians about `axis` (need not be unit).
    static UnitQuat from_axis_angle(const Vec3& axis, double angle);
    // Accepts any proper rotation matrix (rows r[0..2]).
    static UnitQuat from_matrix(const std::array<std::array<double, 3>, 3>& r);

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    UnitQuat conjugate() const;
    Vec3 rotate(const Vec3& v) const;
    std::array<std::array<double, 3>, 3> to_matrix() const;

    // Same rotation with w >= 0; if w == 0, first nonzero of x, y, z positive.
    UnitQuat canonical() const;
    // Axis and angle in [0, pi] of this rotation. Axis is +x for the identity.
    void to_axis_angle(Vec3& axis, double& angle) const;

    bool operator==(const UnitQuat&) const = default;
};

// Hamilton product; (a * b).rotate(v) == a.rotate(b.rotate(v)).
UnitQuat operator*(const UnitQuat& a, const UnitQuat& b);

UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double u);

// p -> rotation.rotate(p) + translation.
struct RigidTransform {
    UnitQuat rotation;
    Vec3 translation;

    static RigidTransform identity() { return {}; }
    static RigidTransform translate(double x, double y, double z) { return {UnitQuat{}, {x, y, z}}; }
    static RigidTransform translate(const Vec3& t) { return {UnitQuat{}, t}; }
    static RigidTransform rotate(const Vec3& axis, double angle) {
        return {UnitQuat::from_axis_angle(axis, angle), {}};
    }

    Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }
    Vec3 apply_vector(const Vec3& v) const { return rotation.rotate(v); }
    Mat34 to_matrix() const;

    bool operator==(const RigidTransform&) const = default;
};

// Matrix product a*b: the result applies b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& t);
// T_AB with compose(a, T_AB) == b.
RigidTransform relative_transform(const RigidTransform& a, const RigidTransform& b);
// k-fold composition by repeated multiplication; power(t, 0) is the identity.
RigidTransform transform_power(const RigidTransform& t, unsigned k);
// Element i (0-based) is base * step^i, built incrementally from element i-1.
std::vector<RigidTransform> crystal_chain(const RigidTransform& base, const RigidTransform& step,
                                          std::size_t count);

// Largest absolute difference between rotation-matrix entries and translation
// components. Sign-independent with respect to the quaternion representative.
double max_component_difference(const RigidTransform& a, const RigidTransform& b);

} // namespace asmb
