#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eulerctl/quadrature.hpp"
#include "eulerctl/trig.hpp"

using namespace eulerctl;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Quadrature oracle: compares a symbolic expansion with its pointwise values
// on a grid, then with a brute-force integral.
void check_against_grid(const ScalarExpansion& e,
                        const std::function<double(double, double)>& f,
                        double tol = 1e-12) {
    const auto& L = e.domain().lengths;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            const Eigen::Vector2d x(L[0] * (i + 0.31) / 7.0,
                                    L[1] * (j + 0.77) / 7.0);
            CHECK(std::abs(e.eval(x) - f(x[0], x[1])) < tol);
        }
}
}  // namespace

TEST_CASE("torus wave canonicalization folds sign flips") {
    const DomainSpec d = torus_domain(2.0 * kPi, 2.0 * kPi);
    // sin(-k . x) = -sin(k . x); the stored key is canonical.
    auto a = ScalarExpansion::torus_wave(d, {1, 2}, Parity::Sin, 1.0);
    auto b = ScalarExpansion::torus_wave(d, {-1, -2}, Parity::Sin, 1.0);
    auto sum = a + b;
    CHECK(sum.empty());
    auto c = ScalarExpansion::torus_wave(d, {-1, -2}, Parity::Cos, 1.0);
    auto diff = ScalarExpansion::torus_wave(d, {1, 2}, Parity::Cos, -1.0) + c;
    CHECK(diff.empty());
}

TEST_CASE("torus product-to-sum identity") {
    const DomainSpec d = torus_domain(2.0 * kPi, 2.0 * kPi);
    auto s = ScalarExpansion::torus_wave(d, {1, 0}, Parity::Sin, 2.0);
    auto c = ScalarExpansion::torus_wave(d, {0, 1}, Parity::Cos, 3.0);
    auto p = s.times(c);
    check_against_grid(p, [](double x, double y) {
        return 2.0 * std::sin(x) * 3.0 * std::cos(y);
    });
    // 2 sin cos = sin(sum) + sin(diff): two terms.
    CHECK(p.terms().size() == 2);
}

TEST_CASE("torus integrals and inner products match quadrature") {
    const double L = 2.0 * kPi;
    const DomainSpec d = torus_domain(L, L);
    auto e = ScalarExpansion::torus_wave(d, {2, 1}, Parity::Sin, 1.5) +
             ScalarExpansion::torus_wave(d, {1, -1}, Parity::Cos, -0.5) +
             ScalarExpansion::constant(d, 0.25);
    CHECK(std::abs(e.integral() - 0.25 * L * L) < 1e-12);
    const double ip = e.inner(e);
    const double q = integrate2d_panels(
        [&](double x, double y) {
            const double v = e.eval({x, y});
            return v * v;
        },
        L, L, 8);
    CHECK(std::abs(ip - q) < 1e-10);
}

TEST_CASE("derivatives are exact") {
    const DomainSpec d = torus_domain(2.0 * kPi, 2.0 * kPi);
    auto e = ScalarExpansion::torus_wave(d, {3, -2}, Parity::Sin, 1.0);
    auto dx = e.derivative(0);
    check_against_grid(dx, [](double x, double y) {
        return 3.0 * std::cos(3.0 * x - 2.0 * y);
    });
    auto dy = e.derivative(1);
    check_against_grid(dy, [](double x, double y) {
        return -2.0 * std::cos(3.0 * x - 2.0 * y);
    });
}

TEST_CASE("rectangle waves, products and derivatives") {
    const DomainSpec d = rectangle_domain(1.0, 2.0);
    auto s = ScalarExpansion::rect_wave(d, 2, 1, false, false, 1.0);
    check_against_grid(s, [](double x, double y) {
        return std::sin(2.0 * kPi * x) * std::sin(kPi * y / 2.0);
    });
    auto dx = s.derivative(0);
    check_against_grid(dx, [](double x, double y) {
        return 2.0 * kPi * std::cos(2.0 * kPi * x) * std::sin(kPi * y / 2.0);
    });
    auto p = s.times(s);
    check_against_grid(p, [](double x, double y) {
        const double v = std::sin(2.0 * kPi * x) * std::sin(kPi * y / 2.0);
        return v * v;
    });
    CHECK(std::abs(p.integral() - 0.5) < 1e-12);
}

TEST_CASE("vector expansions: advection and curl agree with finite differences") {
    const DomainSpec d = torus_domain(2.0 * kPi, 2.0 * kPi);
    VectorExpansion u(ScalarExpansion::torus_wave(d, {1, 1}, Parity::Cos, 1.0),
                      ScalarExpansion::torus_wave(d, {1, -1}, Parity::Sin, 2.0));
    VectorExpansion v(ScalarExpansion::torus_wave(d, {0, 1}, Parity::Sin, -1.0),
                      ScalarExpansion::torus_wave(d, {2, 0}, Parity::Cos, 0.5));
    auto adv = u.advect(v);
    const double h = 1e-6;
    for (const Eigen::Vector2d& x : {Eigen::Vector2d(0.3, 1.2),
                                     Eigen::Vector2d(2.0, 4.1)}) {
        const Eigen::Vector2d uu = u.eval(x);
        Eigen::Matrix2d J;  // J(r, c) = d v_r / d x_c
        for (int cidx = 0; cidx < 2; ++cidx) {
            Eigen::Vector2d xp = x, xm = x;
            xp[cidx] += h;
            xm[cidx] -= h;
            const Eigen::Vector2d dv = (v.eval(xp) - v.eval(xm)) / (2.0 * h);
            J(0, cidx) = dv[0];
            J(1, cidx) = dv[1];
        }
        const Eigen::Vector2d want = J * uu;
        const Eigen::Vector2d got = adv.eval(x);
        CHECK((want - got).norm() < 1e-8);
    }
    auto w = u.curl();
    const Eigen::Vector2d x(1.0, 2.5);
    const double num =
        (u.eval({x[0] + h, x[1]})[1] - u.eval({x[0] - h, x[1]})[1]) / (2.0 * h) -
        (u.eval({x[0], x[1] + h})[0] - u.eval({x[0], x[1] - h})[0]) / (2.0 * h);
    CHECK(std::abs(w.eval(x) - num) < 1e-8);
}
