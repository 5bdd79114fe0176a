#include "asmb/kernels.hpp"

#include <immintrin.h>

namespace asmb::kernels::avx2 {

Bounds point_bounds(std::span<const Vec3> points) {
    const double* p = &points[0].x;
    const std::size_t n = points.size();
    const std::size_t blocks = n / 4;
    Bounds b{points[0], points[0]};
    if (blocks > 0) {
        // Four packed points span three registers; lane roles repeat per block.
        __m256d lo0 = _mm256_loadu_pd(p), lo1 = _mm256_loadu_pd(p + 4), lo2 = _mm256_loadu_pd(p + 8);
        __m256d hi0 = lo0, hi1 = lo1, hi2 = lo2;
        for (std::size_t k = 1; k < blocks; ++k) {
            const double* q = p + 12 * k;
            const __m256d a = _mm256_loadu_pd(q), c = _mm256_loadu_pd(q + 4), d = _mm256_loadu_pd(q + 8);
            lo0 = _mm256_min_pd(lo0, a);
            lo1 = _mm256_min_pd(lo1, c);
            lo2 = _mm256_min_pd(lo2, d);
            hi0 = _mm256_max_pd(hi0, a);
            hi1 = _mm256_max_pd(hi1, c);
            hi2 = _mm256_max_pd(hi2, d);
        }
        alignas(32) double l[12], h[12];
        _mm256_store_pd(l, lo0);
        _mm256_store_pd(l + 4, lo1);
        _mm256_store_pd(l + 8, lo2);
        _mm256_store_pd(h, hi0);
        _mm256_store_pd(h + 4, hi1);
        _mm256_store_pd(h + 8, hi2);
        for (int i = 0; i < 12; ++i) {
            const int axis = i % 3;
            if (l[i] < b.min[static_cast<std::size_t>(axis)]) b.min[static_cast<std::size_t>(axis)] = l[i];
            if (h[i] > b.max[static_cast<std::size_t>(axis)]) b.max[static_cast<std::size_t>(axis)] = h[i];
        }
    }
    for (std::size_t i = blocks * 4; i < n; ++i) {
        b.min = min(b.min, points[i]);
        b.max = max(b.max, points[i]);
    }
    // -0 and +0 compare equal, so which survives depends on order; fold both to +0.
    b.min += Vec3{0.0, 0.0, 0.0};
    b.max += Vec3{0.0, 0.0, 0.0};
    return b;
}

void transform_points(const Mat34& m, std::span<const Vec3> in, std::span<Vec3> out) {
    const auto& a = m.m;
    const __m256d c0 = _mm256_setr_pd(a[0], a[4], a[8], 0);
    const __m256d c1 = _mm256_setr_pd(a[1], a[5], a[9], 0);
    const __m256d c2 = _mm256_setr_pd(a[2], a[6], a[10], 0);
    const __m256d c3 = _mm256_setr_pd(a[3], a[7], a[11], 0);
    const __m256i mask = _mm256_setr_epi64x(-1, -1, -1, 0);
    for (std::size_t i = 0; i < in.size(); ++i) {
        const Vec3& p = in[i];
        __m256d r = _mm256_mul_pd(c0, _mm256_set1_pd(p.x));
        r = _mm256_add_pd(r, _mm256_mul_pd(c1, _mm256_set1_pd(p.y)));
        r = _mm256_add_pd(r, _mm256_mul_pd(c2, _mm256_set1_pd(p.z)));
        r = _mm256_add_pd(r, c3);
        _mm256_maskstore_pd(&out[i].x, mask, r);
    }
}

void overlapping_boxes(const Bounds& q, const BoxSoA& boxes, std::vector<std::uint32_t>& out) {
    const std::size_t n = boxes.size();
    const __m256d qminx = _mm256_set1_pd(q.min.x), qmaxx = _mm256_set1_pd(q.max.x);
    const __m256d qminy = _mm256_set1_pd(q.min.y), qmaxy = _mm256_set1_pd(q.max.y);
    const __m256d qminz = _mm256_set1_pd(q.min.z), qmaxz = _mm256_set1_pd(q.max.z);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d hit = _mm256_and_pd(_mm256_cmp_pd(qminx, _mm256_loadu_pd(&boxes.max_x[j]), _CMP_LE_OQ),
                                    _mm256_cmp_pd(_mm256_loadu_pd(&boxes.min_x[j]), qmaxx, _CMP_LE_OQ));
        hit = _mm256_and_pd(hit, _mm256_cmp_pd(qminy, _mm256_loadu_pd(&boxes.max_y[j]), _CMP_LE_OQ));
        hit = _mm256_and_pd(hit, _mm256_cmp_pd(_mm256_loadu_pd(&boxes.min_y[j]), qmaxy, _CMP_LE_OQ));
        hit = _mm256_and_pd(hit, _mm256_cmp_pd(qminz, _mm256_loadu_pd(&boxes.max_z[j]), _CMP_LE_OQ));
        hit = _mm256_and_pd(hit, _mm256_cmp_pd(_mm256_loadu_pd(&boxes.min_z[j]), qmaxz, _CMP_LE_OQ));
        int bits = _mm256_movemask_pd(hit);
        while (bits != 0) {
            const int lane = __builtin_ctz(static_cast<unsigned>(bits));
            out.push_back(static_cast<std::uint32_t>(j + static_cast<std::size_t>(lane)));
            bits &= bits - 1;
        }
    }
    for (; j < n; ++j) {
        if (q.min.x <= boxes.max_x[j] && boxes.min_x[j] <= q.max.x &&
            q.min.y <= boxes.max_y[j] && boxes.min_y[j] <= q.max.y &&
            q.min.z <= boxes.max_z[j] && boxes.min_z[j] <= q.max.z) {
            out.push_back(static_cast<std::uint32_t>(j));
        }
    }
}

} // namespace asmb::kernels::avx2
