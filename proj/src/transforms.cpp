#include "asmb/transforms.hpp"

#include <algorithm>

namespace asmb {

UnitQuat::UnitQuat(double w_, double x_, double y_, double z_) {
    const double n = std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
    if (n == 0 || !std::isfinite(n)) {
        w = 1;
        x = y = z = 0;
        return;
    }
    w = w_ / n;
    x = x_ / n;
    y = y_ / n;
    z = z_ / n;
}

UnitQuat UnitQuat::from_axis_angle(const Vec3& axis, double angle) {
    const double n = asmb::norm(axis);
    if (n == 0) return {};
    const double s = std::sin(angle / 2) / n;
    return {std::cos(angle / 2), axis.x * s, axis.y * s, axis.z * s};
}

UnitQuat UnitQuat::from_matrix(const std::array<std::array<double, 3>, 3>& r) {
    const double trace = r[0][0] + r[1][1] + r[2][2];
    if (trace > 0) {
        const double s = std::sqrt(trace + 1.0) * 2;
        return {s / 4, (r[2][1] - r[1][2]) / s, (r[0][2] - r[2][0]) / s, (r[1][0] - r[0][1]) / s};
    }
    if (r[0][0] > r[1][1] && r[0][0] > r[2][2]) {
        const double s = std::sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]) * 2;
        return {(r[2][1] - r[1][2]) / s, s / 4, (r[0][1] + r[1][0]) / s, (r[0][2] + r[2][0]) / s};
    }
    if (r[1][1] > r[2][2]) {
        const double s = std::sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]) * 2;
        return {(r[0][2] - r[2][0]) / s, (r[0][1] + r[1][0]) / s, s / 4, (r[1][2] + r[2][1]) / s};
    }
    const double s = std::sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]) * 2;
    return {(r[1][0] - r[0][1]) / s, (r[0][2] + r[2][0]) / s, (r[1][2] + r[2][1]) / s, s / 4};
}

UnitQuat UnitQuat::conjugate() const {
    UnitQuat q;
    q.w = w;
    q.x = -x;
    q.y = -y;
    q.z = -z;
    return q;
}

Vec3 UnitQuat::rotate(const Vec3& v) const {
    // v' = v + 2w (u x v) + 2 u x (u x v)
    const Vec3 u{x, y, z};
    const Vec3 t = cross(u, v) * 2.0;
    return v + t * w + cross(u, t);
}

std::array<std::array<double, 3>, 3> UnitQuat::to_matrix() const {
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, xz = x * z, yz = y * z;
    const double wx = w * x, wy = w * y, wz = w * z;
    return {{{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
             {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
             {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}}};
}

UnitQuat UnitQuat::canonical() const {
    bool flip = false;
    if (w < 0) {
        flip = true;
    } else if (w == 0) {
        if (x != 0) flip = x < 0;
        else if (y != 0) flip = y < 0;
        else flip = z < 0;
    }
    UnitQuat q = *this;
    if (flip) {
        q.w = -w;
        q.x = -x;
        q.y = -y;
        q.z = -z;
    }
    // Avoid serializing negative zero.
    q.w += 0.0;
    q.x += 0.0;
    q.y += 0.0;
    q.z += 0.0;
    return q;
}

void UnitQuat::to_axis_angle(Vec3& axis, double& angle) const {
    const UnitQuat q = w < 0 ? UnitQuat{-w, -x, -y, -z} : *this;
    const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
    angle = 2 * std::atan2(s, q.w);
    if (s < 1e-300) {
        axis = {1, 0, 0};
        angle = 0;
        return;
    }
    axis = {q.x / s, q.y / s, q.z / s};
}

UnitQuat operator*(const UnitQuat& a, const UnitQuat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double u) {
    double bw = b.w, bx = b.x, by = b.y, bz = b.z;
    double c = a.w * bw + a.x * bx + a.y * by + a.z * bz;
    if (c < 0) {
        c = -c;
        bw = -bw;
        bx = -bx;
        by = -by;
        bz = -bz;
    }
    double wa, wb;
    if (c > 1 - 1e-12) {
        wa = 1 - u;
        wb = u;
    } else {
        const double theta = std::acos(std::min(c, 1.0));
        const double s = std::sin(theta);
        wa = std::sin((1 - u) * theta) / s;
        wb = std::sin(u * theta) / s;
    }
    return {wa * a.w + wb * bw, wa * a.x + wb * bx, wa * a.y + wb * by, wa * a.z + wb * bz};
}

Mat34 RigidTransform::to_matrix() const {
    const auto r = rotation.to_matrix();
    Mat34 out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out(i, j) = r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    out(0, 3) = translation.x;
    out(1, 3) = translation.y;
    out(2, 3) = translation.z;
    return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    return {a.rotation * b.rotation, a.rotation.rotate(b.translation) + a.translation};
}

RigidTransform inverse(const RigidTransform& t) {
    const UnitQuat r = t.rotation.conjugate();
    return {r, -r.rotate(t.translation)};
}

RigidTransform relative_transform(const RigidTransform& a, const RigidTransform& b) {
    return compose(inverse(a), b);
}

RigidTransform transform_power(const RigidTransform& t, unsigned k) {
    RigidTransform out;
    for (unsigned i = 0; i < k; ++i) out = compose(out, t);
    return out;
}

std::vector<RigidTransform> crystal_chain(const RigidTransform& base, const RigidTransform& step,
                                          std::size_t count) {
    std::vector<RigidTransform> out;
    out.reserve(count);
    if (count == 0) return out;
    out.push_back(base);
    for (std::size_t i = 1; i < count; ++i) out.push_back(compose(out.back(), step));
    return out;
}

double max_component_difference(const RigidTransform& a, const RigidTransform& b) {
    const auto ra = a.rotation.to_matrix();
    const auto rb = b.rotation.to_matrix();
    double d = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) d = std::max(d, std::abs(ra[i][j] - rb[i][j]));
        d = std::max(d, std::abs(a.translation[i] - b.translation[i]));
    }
    return d;
}

} // namespace asmb
