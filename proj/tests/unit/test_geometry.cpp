#include <doctest.h>

#include "airdbm/error.hpp"
#include "airdbm/geometry.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace airdbm;
namespace at = airdbm::testing;

namespace {

SeligVector from_surfaces(const std::vector<double>& upper, const std::vector<double>& lower)
{
    // upper/lower listed from the leading edge (i = 0) to the trailing edge.
    const int half = static_cast<int>(upper.size()) - 1;
    std::vector<double> y(static_cast<std::size_t>(2 * half + 1));
    for (int i = 0; i <= half; ++i) {
        y[static_cast<std::size_t>(half - i)] = upper[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(half + i)] = lower[static_cast<std::size_t>(i)];
    }
    return SeligVector(y);
}

} // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("station layout follows the Selig traversal")
    {
        const auto v = SeligVector::zeros(8);
        CHECK(v.resolution() == 8);
        CHECK(v.x(0) == doctest::Approx(1.0));
        CHECK(v.x(4) == doctest::Approx(0.0));
        CHECK(v.x(8) == doctest::Approx(1.0));
        CHECK(v.x(2) == doctest::Approx(0.5));
        CHECK(v.x(6) == doctest::Approx(0.5));
    }

    TEST_CASE("construction rejects odd, short and non-finite vectors")
    {
        CHECK_THROWS_AS(SeligVector(std::vector<double>{0.0, 0.0}), Error);
        CHECK_THROWS_AS(SeligVector(std::vector<double>{0.0}), Error);
        CHECK_THROWS_AS(SeligVector(std::vector<double>{0.0, NAN, 0.0}), Error);
    }

    TEST_CASE("similarity of hand-computed pairs")
    {
        const SeligVector a(std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0});
        const SeligVector b(std::vector<double>{0.1, 0.0, 0.0, 0.0, -0.1});
        // (2/4)(0.1 + 0.1)
        CHECK(similarity(a, b) == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(similarity(a, a) == 0.0);
        CHECK_THROWS_AS(similarity(a, SeligVector::zeros(6)), Error);
    }

    TEST_CASE("similarity matches the trapezoid decomposition")
    {
        std::mt19937_64 rng(11);
        for (int k = 0; k < 50; ++k) {
            const auto a = at::random_smooth_shape(rng, 200, true);
            const auto b = at::random_smooth_shape(rng, 200, true);
            CHECK(std::abs(similarity(a, b) - oracle::trapezoid_similarity(a.values(), b.values())) < 1e-12);
        }
    }

    TEST_CASE("detector: clean, crossed and touching shapes")
    {
        CHECK_FALSE(detect_self_intersection(from_surfaces({0, 0.05, 0.04, 0.0}, {0, -0.03, -0.02, 0.0})));
        CHECK(detect_self_intersection(from_surfaces({0, 0.05, -0.04, 0.0}, {0, -0.03, 0.02, 0.0})));
        // interior contact
        CHECK(detect_self_intersection(from_surfaces({0, 0.05, 0.01, 0.0}, {0, -0.03, 0.01, 0.0})));
        // a crossed trailing edge following positive thickness
        CHECK(detect_self_intersection(from_surfaces({0, 0.05, 0.01, -0.01}, {0, -0.03, 0.0, 0.01})));
        // sub-tolerance residue at a sealed trailing edge is not a crossing
        CHECK_FALSE(detect_self_intersection(from_surfaces({0, 0.05, 0.01, 1e-17}, {0, -0.03, 0.0, 0.0})));
    }

    TEST_CASE("detector agrees with the polygon oracle on random shapes")
    {
        std::mt19937_64 rng(5);
        int crossed = 0;
        for (int k = 0; k < 300; ++k) {
            const auto s = at::random_smooth_shape(rng, 200, true);
            const bool expected = oracle::polygon_self_intersects(s.values());
            crossed += expected ? 1 : 0;
            CHECK(detect_self_intersection(s) == expected);
        }
        CHECK(crossed > 50);
        CHECK(crossed < 250);
    }

    TEST_CASE("repair yields a detector-clean, idempotent shape")
    {
        std::mt19937_64 rng(17);
        int repaired = 0;
        for (int k = 0; k < 200; ++k) {
            const auto s = at::random_smooth_shape(rng, 200, true);
            if (!detect_self_intersection(s)) {
                CHECK(repair_self_intersection(s) == s);
                continue;
            }
            const auto r = repair_self_intersection(s);
            ++repaired;
            CHECK_FALSE(detect_self_intersection(r));
            CHECK(repair_self_intersection(r) == r);
            CHECK(r[100] == s[100]);
            for (int i = 1; i < 100; ++i)
                CHECK(r.thickness_at(i) >= 1e-3 - 1e-15);
        }
        CHECK(repaired > 0);
    }

    TEST_CASE("repair keeps an intact trailing edge and seals a crossed one")
    {
        const auto open = from_surfaces({0, 0.05, -0.01, 0.004, 0.002}, {0, -0.03, 0.01, -0.003, -0.001});
        REQUIRE(detect_self_intersection(open));
        const auto r = repair_self_intersection(open);
        CHECK(r[0] == open[0]);
        CHECK(r[8] == open[8]);

        const auto crossed = from_surfaces({0, 0.05, 0.02, 0.01, -0.002}, {0, -0.03, -0.01, 0.0, 0.002});
        REQUIRE(detect_self_intersection(crossed));
        const auto s = repair_self_intersection(crossed);
        CHECK(s[0] == doctest::Approx(0.0));
        CHECK(s[8] == doctest::Approx(0.0));
        CHECK_FALSE(detect_self_intersection(s));
    }

    TEST_CASE("repair options are validated")
    {
        const auto s = SeligVector::zeros(10);
        CHECK_THROWS_AS(repair_self_intersection(s, {0.0, 3}), Error);
        CHECK_THROWS_AS(repair_self_intersection(s, {1e-3, -1}), Error);
    }

    TEST_CASE("coordinate text round trip")
    {
        std::mt19937_64 rng(2);
        const auto s = at::random_smooth_shape(rng, 20, false);
        const auto text = to_coordinate_text(s, "probe");
        CHECK(text.rfind("probe\n", 0) == 0);
        const auto pts = to_points(s);
        REQUIRE(pts.size() == 21);
        CHECK(pts[10].first == 0.0);
        CHECK(pts[10].second == s[10]);
    }
}
