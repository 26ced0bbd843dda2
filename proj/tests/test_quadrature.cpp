#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eulerctl/quadrature.hpp"

using namespace eulerctl;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("gauss_legendre nodes integrate monomials exactly") {
    // Order-n rule is exact through degree 2n - 1 on [-1, 1].
    for (int order : {2, 4, 8, 12}) {
        const auto& rule = gauss_legendre(order);
        REQUIRE(static_cast<int>(rule.size()) == order);
        double wsum = 0.0;
        for (const auto& n : rule) wsum += n.w;
        CHECK(std::abs(wsum - 2.0) < 1e-14);
        for (int d = 0; d <= 2 * order - 1; ++d) {
            double q = 0.0;
            for (const auto& n : rule) q += n.w * std::pow(n.x, d);
            const double exact = (d % 2 == 0) ? 2.0 / (d + 1) : 0.0;
            CHECK(std::abs(q - exact) < 1e-13);
        }
    }
}

TEST_CASE("panel rule hits closed forms") {
    const double s = integrate_panels([](double t) { return std::sin(t); },
                                      0.0, kPi, 4);
    CHECK(std::abs(s - 2.0) < 1e-13);
    const double e = integrate_panels([](double t) { return std::exp(t); },
                                      0.0, 1.0, 4);
    CHECK(std::abs(e - (std::exp(1.0) - 1.0)) < 1e-13);
}

TEST_CASE("adaptive doubling converges and reports non-convergence") {
    const double v = integrate_adaptive(
        [](double t) { return std::cos(17.0 * t); }, 0.0, 2.0);
    CHECK(std::abs(v - std::sin(34.0) / 17.0) < 1e-11);

    // A discontinuity defeats panel doubling at tight tolerance.
    CHECK_THROWS_AS(integrate_adaptive(
                        [](double t) { return t < 0.3333333 ? 0.0 : 1.0; },
                        0.0, 1.0, 1e-14, 4),
                    std::runtime_error);
}

TEST_CASE("2d tensor rule integrates separable waves") {
    const double L = 2.0 * kPi;
    const double v = integrate2d_panels(
        [](double x, double y) {
            return std::sin(x) * std::sin(x) * std::cos(y) * std::cos(y);
        },
        L, L, 4);
    CHECK(std::abs(v - kPi * kPi) < 1e-12);
    const double w = integrate2d_adaptive(
        [](double x, double y) { return std::sin(2.0 * x + y); }, L, L);
    CHECK(std::abs(w) < 1e-12);
}

TEST_CASE("midpoint grid is exact for low torus harmonics") {
    const double L = 2.0 * kPi;
    const MidpointGrid g = midpoint_grid(L, L, 8);
    REQUIRE(g.points.size() == 64);
    // Exact for per-axis harmonics up to 7.
    for (int k : {1, 3, 7}) {
        double acc = 0.0;
        for (const auto& p : g.points) acc += std::cos(k * p[0]);
        CHECK(std::abs(acc * g.weight) < 1e-12);
    }
    double sq = 0.0;
    for (const auto& p : g.points) {
        const double f = std::sin(3.0 * p[0] + 2.0 * p[1]);
        sq += f * f;
    }
    CHECK(std::abs(sq * g.weight - 0.5 * L * L) < 1e-12);
}
