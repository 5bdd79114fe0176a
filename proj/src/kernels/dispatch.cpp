#include <cstdlib>
#include <string_view>

#include "asmb/kernels.hpp"

namespace asmb::kernels {

namespace {

struct table {
    isa which;
    Bounds (*point_bounds)(std::span<const Vec3>);
    void (*transform_points)(const Mat34&, std::span<const Vec3>, std::span<Vec3>);
    void (*overlapping_boxes)(const Bounds&, const BoxSoA&, std::vector<std::uint32_t>&);
};

table select() {
    const char* env = std::getenv("ASMB_KERNELS");
    const bool force_scalar = env != nullptr && std::string_view(env) == "scalar";
#ifdef ASMB_HAVE_AVX2
    if (!force_scalar && isa_available(isa::avx2)) {
        return {isa::avx2, &avx2::point_bounds, &avx2::transform_points, &avx2::overlapping_boxes};
    }
#else
    (void)force_scalar;
#endif
    return {isa::scalar, &scalar::point_bounds, &scalar::transform_points, &scalar::overlapping_boxes};
}

const table& active() {
    static const table t = select();
    return t;
}

} // namespace

bool isa_available(isa which) {
    switch (which) {
    case isa::scalar: return true;
    case isa::avx2:
#ifdef ASMB_HAVE_AVX2
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }
    return false;
}

isa active_isa() { return active().which; }

const char* isa_name(isa which) { return which == isa::avx2 ? "avx2" : "scalar"; }

Bounds point_bounds(std::span<const Vec3> points) { return active().point_bounds(points); }

void transform_points(const Mat34& m, std::span<const Vec3> in, std::span<Vec3> out) {
    active().transform_points(m, in, out);
}

void overlapping_boxes(const Bounds& query, const BoxSoA& boxes, std::vector<std::uint32_t>& out) {
    active().overlapping_boxes(query, boxes, out);
}

} // namespace asmb::kernels
