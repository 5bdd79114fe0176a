#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference in
// kernels::scalar and vector variants selected at runtime; all variants
// produce bit-identical results (no FMA contraction, same operation order).

#include <cstdint>
#include <span>
#include <vector>

#include "asmb/transforms.hpp"

namespace asmb::kernels {

static_assert(sizeof(Vec3) == 3 * sizeof(double), "Vec3 must be three packed doubles");

enum class isa { scalar, avx2 };

struct Bounds {
    Vec3 min;
    Vec3 max;
};

// Axis-aligned boxes in structure-of-arrays layout.
struct BoxSoA {
    std::vector<double> min_x, min_y, min_z, max_x, max_y, max_z;

    std::size_t size() const { return min_x.size(); }
    void clear();
    void reserve(std::size_t n);
    void push_back(const Bounds& b);
};

bool isa_available(isa which);
// Widest available variant unless ASMB_KERNELS=scalar is set in the environment.
isa active_isa();
const char* isa_name(isa which);

// Precondition for point_bounds: points nonempty.
Bounds point_bounds(std::span<const Vec3> points);
void transform_points(const Mat34& m, std::span<const Vec3> in, std::span<Vec3> out);
// Appends indices of boxes that overlap `query` (closed intervals) in ascending order.
void overlapping_boxes(const Bounds& query, const BoxSoA& boxes, std::vector<std::uint32_t>& out);

namespace scalar {
Bounds point_bounds(std::span<const Vec3> points);
void transform_points(const Mat34& m, std::span<const Vec3> in, std::span<Vec3> out);
void overlapping_boxes(const Bounds& query, const BoxSoA& boxes, std::vector<std::uint32_t>& out);
} // namespace scalar

namespace avx2 {
Bounds point_bounds(std::span<const Vec3> points);
void transform_points(const Mat34& m, std::span<const Vec3> in, std::span<Vec3> out);
void overlapping_boxes(const Bounds& query, const BoxSoA& boxes, std::vector<std::uint32_t>& out);
} // namespace avx2

} // namespace asmb::kernels
