#include "asmb/kernels.hpp"

namespace asmb::kernels {

void BoxSoA::clear() {
    for (auto* v : {&min_x, &min_y, &min_z, &max_x, &max_y, &max_z}) v->clear();
}

void BoxSoA::reserve(std::size_t n) {
    for (auto* v : {&min_x, &min_y, &min_z, &max_x, &max_y, &max_z}) v->reserve(n);
}

void BoxSoA::push_back(const Bounds& b) {
    min_x.push_back(b.min.x);
    min_y.push_back(b.min.y);
    min_z.push_back(b.min.z);
    max_x.push_back(b.max.x);
    max_y.push_back(b.max.y);
    max_z.push_back(b.max.z);
}

namespace scalar {

Bounds point_bounds(std::span<const Vec3> points) {
    Bounds b{points[0], points[0]};
    for (const Vec3& p : points.subspan(1)) {
        b.min = min(b.min, p);
        b.max = max(b.max, p);
    }
    // -0 and +0 compare equal, so which survives depends on order; fold both to +0.
    b.min += Vec3{0.0, 0.0, 0.0};
    b.max += Vec3{0.0, 0.0, 0.0};
    return b;
}

void transform_points(const Mat34& m, std::span<const Vec3> in, std::span<Vec3> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = m.apply(in[i]);
}

void overlapping_boxes(const Bounds& q, const BoxSoA& boxes, std::vector<std::uint32_t>& out) {
    const std::size_t n = boxes.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (q.min.x <= boxes.max_x[j] && boxes.min_x[j] <= q.max.x &&
            q.min.y <= boxes.max_y[j] && boxes.min_y[j] <= q.max.y &&
            q.min.z <= boxes.max_z[j] && boxes.min_z[j] <= q.max.z) {
            out.push_back(static_cast<std::uint32_t>(j));
        }
    }
}

} // namespace scalar
} // namespace asmb::kernels
