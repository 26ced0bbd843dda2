#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eulerctl/field.hpp"
#include "eulerctl/quadrature.hpp"

using namespace eulerctl;

namespace {
constexpr double kPi = 3.14159265358979323846;

BasisPtr torus(int cutoff) {
    return make_basis(torus_domain(2.0 * kPi, 2.0 * kPi), cutoff);
}
}  // namespace

TEST_CASE("arithmetic and H inner product are coefficientwise") {
    const auto b = torus(2);
    Rng rng(5);
    Field u = Field::random_unit(b, rng);
    Field v = Field::random_unit(b, rng);
    CHECK(norm_H(u) == doctest::Approx(1.0).epsilon(1e-12));
    const Field w = 2.0 * u - v;
    CHECK(std::abs(inner_H(w, v) - (2.0 * inner_H(u, v) - 1.0)) < 1e-12);
    CHECK(std::abs(inner_H(u, v) - u.coeffs().dot(v.coeffs())) < 1e-15);
    CHECK_THROWS_AS(require_same_basis(u, Field(torus(3))),
                    std::invalid_argument);
}

TEST_CASE("H norm matches quadrature of the pointwise field") {
    const auto b = torus(2);
    Rng rng(11);
    const Field u = Field::random_unit(b, rng);
    const auto& L = b->domain().lengths;
    const MidpointGrid g = midpoint_grid(L[0], L[1], 4 * (b->cutoff() + 1));
    double acc = 0.0;
    for (const auto& p : g.points) acc += u.eval({p[0], p[1]}).squaredNorm();
    CHECK(std::abs(acc * g.weight - norm_H(u) * norm_H(u)) < 1e-12);
}

TEST_CASE("V norm and fractional scale are diagonal in lambda") {
    const auto b = torus(2);
    Field u(b);
    u.coeffs()[0] = 3.0;  // lambda = 2 mode
    u.coeffs()[b->size() - 1] = 4.0;
    const double lam_last = b->lambda(b->size() - 1);
    const double want = 9.0 * 2.0 + 16.0 * lam_last;
    CHECK(norm_V(u) * norm_V(u) == doctest::Approx(want).epsilon(1e-12));
    // |A^g y|^2 carries lambda^(2g) per mode; g = 1/2 reproduces the V norm.
    const double g = 0.75;
    const double wantg =
        9.0 * std::pow(2.0, 2.0 * g) + 16.0 * std::pow(lam_last, 2.0 * g);
    CHECK(norm_DAgamma(u, g) * norm_DAgamma(u, g) ==
          doctest::Approx(wantg).epsilon(1e-12));
    CHECK(energy(u) == doctest::Approx(0.5 * (9.0 + 16.0)));
    // Enstrophy weight is (lambda - 1) per mode.
    CHECK(enstrophy(u) ==
          doctest::Approx(0.5 * (9.0 * 1.0 + 16.0 * (lam_last - 1.0))));
}

TEST_CASE("curl evaluates to the pointwise vorticity") {
    const auto b = torus(2);
    Rng rng(3);
    const Field u = Field::random_unit(b, rng);
    const VorticityField w = curl(u);
    const double h = 1e-6;
    const Eigen::Vector2d x(1.3, 0.4);
    const double num =
        (u.eval({x[0] + h, x[1]})[1] - u.eval({x[0] - h, x[1]})[1]) / (2.0 * h) -
        (u.eval({x[0], x[1] + h})[0] - u.eval({x[0], x[1] - h})[0]) / (2.0 * h);
    CHECK(std::abs(w.eval(x) - num) < 1e-7);
    CHECK(w.l2_norm() * w.l2_norm() ==
          doctest::Approx(2.0 * enstrophy(u)).epsilon(1e-12));
}

TEST_CASE("c1_bound dominates the sampled sup of |y| + |grad y|") {
    const auto b = torus(3);
    Rng rng(17);
    const Field u = Field::random_unit(b, rng);
    const double bound = c1_bound(u);
    double worst = 0.0;
    for (double x1 = 0.0; x1 < 6.3; x1 += 0.17)
        for (double x2 = 0.0; x2 < 6.3; x2 += 0.19) {
            const Eigen::Vector2d x(x1, x2);
            const double v = u.eval(x).norm() + u.eval_gradient(x).norm();
            worst = std::max(worst, v);
        }
    CHECK(worst <= bound);
}

TEST_CASE("unit_mode and from_modes agree") {
    const auto b = torus(2);
    const Mode m{{1, 1}, Parity::Cos};
    const int idx = b->index_of(m);
    REQUIRE(idx >= 0);
    const Field u = Field::unit_mode(b, idx);
    const Field v = Field::from_modes(b, {{m, 1.0}});
    CHECK(norm_H(u - v) < 1e-15);
    CHECK_THROWS(Field::from_modes(b, {{Mode{{7, 7}, Parity::Sin}, 1.0}}));
}

TEST_CASE("json round-trip is bit exact") {
    const auto b = torus(2);
    Rng rng(23);
    const Field u = Field::random_unit(b, rng);
    const Field v = Field::from_json(b, u.to_json());
    for (int i = 0; i < u.size(); ++i) CHECK(u[i] == v[i]);
    // Serialized again, the text is identical.
    CHECK(u.to_json().dump() == v.to_json().dump());
}

TEST_CASE("random_unit respects the support prefix and the seed") {
    const auto b = torus(3);
    Rng r1(9), r2(9);
    const Field u = Field::random_unit(b, r1, 4);
    const Field v = Field::random_unit(b, r2, 4);
    for (int i = 0; i < u.size(); ++i) CHECK(u[i] == v[i]);
    for (int i = 4; i < u.size(); ++i) CHECK(u[i] == 0.0);
    CHECK(norm_H(u) == doctest::Approx(1.0).epsilon(1e-12));
}
