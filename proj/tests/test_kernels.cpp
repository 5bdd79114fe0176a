#include <gtest/gtest.h>

#include <cstring>

#include "asmb/kernels.hpp"
#include "support.hpp"

using namespace asmb;
using namespace asmb::test;
namespace k = asmb::kernels;

namespace {

bool same_bits(const Vec3& a, const Vec3& b) { return std::memcmp(&a, &b, sizeof(Vec3)) == 0; }

std::vector<Vec3> cloud(std::mt19937_64& g, std::size_t n) {
    std::vector<Vec3> v(n);
    for (auto& p : v) p = random_vec(g, -50, 50);
    return v;
}

k::BoxSoA random_boxes(std::mt19937_64& g, std::size_t n) {
    k::BoxSoA boxes;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 lo = random_vec(g, -10, 10);
        boxes.push_back({lo, lo + random_vec(g, 0, 3)});
    }
    return boxes;
}

} // namespace

TEST(KernelsScalar, PointBoundsMatchesLinearScan) {
    auto g = rng(201);
    const auto pts = cloud(g, 1000);
    const auto b = k::scalar::point_bounds(pts);
    Vec3 lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
        lo = asmb::min(lo, p);
        hi = asmb::max(hi, p);
    }
    EXPECT_EQ(b.min, lo);
    EXPECT_EQ(b.max, hi);
}

TEST(KernelsScalar, TransformPointsMatchesMat34) {
    auto g = rng(202);
    const auto pts = cloud(g, 37);
    const auto m = random_transform(g).to_matrix();
    std::vector<Vec3> out(pts.size());
    k::scalar::transform_points(m, pts, out);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_TRUE(same_bits(out[i], m.apply(pts[i])));
}

TEST(KernelsScalar, OverlappingBoxesClosedIntervals) {
    k::BoxSoA boxes;
    boxes.push_back({{0, 0, 0}, {1, 1, 1}});
    boxes.push_back({{1, 1, 1}, {2, 2, 2}});    // touches at a corner
    boxes.push_back({{1.01, 0, 0}, {2, 1, 1}}); // separated on x
    std::vector<std::uint32_t> out;
    k::scalar::overlapping_boxes({{0, 0, 0}, {1, 1, 1}}, boxes, out);
    EXPECT_EQ(out, (std::vector<std::uint32_t>{0, 1}));
}

TEST(KernelsDispatch, ActiveIsaIsAvailable) {
    EXPECT_TRUE(k::isa_available(k::active_isa()));
    EXPECT_TRUE(k::isa_available(k::isa::scalar));
    const char* env = std::getenv("ASMB_KERNELS");
    if (env && std::string_view(env) == "scalar") {
        EXPECT_EQ(k::active_isa(), k::isa::scalar);
    }
}

#ifdef ASMB_HAVE_AVX2

class KernelsAvx2 : public ::testing::Test {
protected:
    void SetUp() override {
        if (!k::isa_available(k::isa::avx2)) GTEST_SKIP() << "AVX2 not available on this CPU";
    }
};

TEST_F(KernelsAvx2, PointBoundsBitExact) {
    auto g = rng(203);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 63u, 1000u, 1001u}) {
        const auto pts = cloud(g, n);
        const auto s = k::scalar::point_bounds(pts);
        const auto v = k::avx2::point_bounds(pts);
        EXPECT_TRUE(same_bits(s.min, v.min)) << n;
        EXPECT_TRUE(same_bits(s.max, v.max)) << n;
    }
}

TEST_F(KernelsAvx2, TransformPointsBitExact) {
    auto g = rng(204);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 17u, 1024u, 1027u}) {
        const auto pts = cloud(g, n);
        const auto m = random_transform(g, 20).to_matrix();
        std::vector<Vec3> a(n), b(n);
        k::scalar::transform_points(m, pts, a);
        k::avx2::transform_points(m, pts, b);
        for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i])) << "n=" << n << " i=" << i;
    }
}

TEST_F(KernelsAvx2, OverlappingBoxesIdentical) {
    auto g = rng(205);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 100u, 1003u}) {
        const auto boxes = random_boxes(g, n);
        for (int q = 0; q < 20; ++q) {
            const Vec3 lo = random_vec(g, -10, 10);
            const k::Bounds query{lo, lo + random_vec(g, 0, 4)};
            std::vector<std::uint32_t> a{99}, b{99};
            k::scalar::overlapping_boxes(query, boxes, a);
            k::avx2::overlapping_boxes(query, boxes, b);
            ASSERT_EQ(a, b);
            EXPECT_EQ(a.front(), 99u); // appends, never clears
        }
    }
}

TEST_F(KernelsAvx2, SpecialValuesBitExact) {
    // Signed zeros and exact ties must resolve the same way in both variants.
    const std::vector<Vec3> pts = {{0.0, -0.0, 1}, {-0.0, 0.0, 1}, {2, 2, -0.0}, {2, 2, 0.0}, {1e-300, -1e300, 5}};
    const auto s = k::scalar::point_bounds(pts);
    const auto v = k::avx2::point_bounds(pts);
    EXPECT_TRUE(same_bits(s.min, v.min));
    EXPECT_TRUE(same_bits(s.max, v.max));
}

#endif
