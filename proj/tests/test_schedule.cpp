#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eulerctl/schedule.hpp"

using namespace eulerctl;

namespace {
constexpr double kPi = 3.14159265358979323846;

BasisPtr torus(int cutoff) {
    return make_basis(torus_domain(2.0 * kPi, 2.0 * kPi), cutoff);
}

ClosedFormFn sample_fn() {
    // (1 - t/2) e^{-3(t-0)}, (t^2) e^{2(t-1)} sin(5t), cos(7t)
    ClosedFormFn f = ClosedFormFn::single({{1.0, -0.5}, -3.0, 0.0,
                                           ClosedFormFn::Osc::None, 0.0});
    f += ClosedFormFn::single({{0.0, 0.0, 1.0}, 2.0, 1.0,
                               ClosedFormFn::Osc::Sin, 5.0});
    f += ClosedFormFn::single({{1.0}, 0.0, 0.0, ClosedFormFn::Osc::Cos, 7.0});
    return f;
}

double num_derivative(const ClosedFormFn& f, double t, double h = 1e-5) {
    // Five-point stencil, O(h^4).
    return (-f.value(t + 2 * h) + 8 * f.value(t + h) - 8 * f.value(t - h) +
            f.value(t - 2 * h)) /
           (12 * h);
}
}  // namespace

TEST_CASE("closed-form values match a direct formula") {
    const ClosedFormFn f = sample_fn();
    for (double t = 0.0; t <= 2.0; t += 0.13) {
        const double want = (1.0 - 0.5 * t) * std::exp(-3.0 * t) +
                            t * t * std::exp(2.0 * (t - 1.0)) * std::sin(5.0 * t) +
                            std::cos(7.0 * t);
        CHECK(f.value(t) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("derivative is exact against finite differences") {
    const ClosedFormFn f = sample_fn();
    const ClosedFormFn df = f.derivative();
    for (double t = 0.1; t <= 1.9; t += 0.2)
        CHECK(df.value(t) == doctest::Approx(num_derivative(f, t)).epsilon(1e-7));
    // Second derivative stays in the family.
    const ClosedFormFn d2 = df.derivative();
    for (double t = 0.1; t <= 1.9; t += 0.4)
        CHECK(d2.value(t) == doctest::Approx(num_derivative(df, t)).epsilon(1e-7));
}

TEST_CASE("products stay closed and pointwise exact") {
    const ClosedFormFn f = sample_fn();
    const ClosedFormFn g =
        ClosedFormFn::polynomial({0.5, 1.0}) +
        ClosedFormFn::single({{1.0}, -1.0, 0.5, ClosedFormFn::Osc::Sin, 2.0});
    const ClosedFormFn p = f * g;
    for (double t = 0.0; t <= 2.0; t += 0.17)
        CHECK(p.value(t) ==
              doctest::Approx(f.value(t) * g.value(t)).epsilon(1e-11));
    // Leibniz rule ties product and derivative together.
    const ClosedFormFn lhs = p.derivative();
    const ClosedFormFn rhs = f.derivative() * g + f * g.derivative();
    for (double t = 0.0; t <= 2.0; t += 0.23)
        CHECK(lhs.value(t) == doctest::Approx(rhs.value(t)).epsilon(1e-10));
}

TEST_CASE("large-rate shoulders never overflow") {
    // (t/T) e^{mu (t - T)} with huge mu: values on [0, T] are bounded by 1.
    const double mu = 5000.0;
    const ClosedFormFn b =
        ClosedFormFn::single({{0.0, 1.0}, mu, 1.0, ClosedFormFn::Osc::None, 0.0});
    CHECK(std::isfinite(b.value(0.0)));
    CHECK(b.value(1.0) == doctest::Approx(1.0));
    const ClosedFormFn sq = b * b;
    for (double t = 0.0; t <= 1.0; t += 0.1) {
        CHECK(std::isfinite(sq.value(t)));
        CHECK(sq.value(t) ==
              doctest::Approx(b.value(t) * b.value(t)).epsilon(1e-12));
    }
    CHECK(b.max_rate() == doctest::Approx(mu));
}

TEST_CASE("closed-form json round-trip is exact on a fine grid") {
    const ClosedFormFn f = sample_fn();
    const ClosedFormFn g = ClosedFormFn::from_json(f.to_json());
    for (int i = 0; i <= 1000; ++i) {
        const double t = 2.0 * i / 1000.0;
        CHECK(std::abs(f.value(t) - g.value(t)) <= 1e-12 * (1.0 + std::abs(f.value(t))));
    }
}

TEST_CASE("schedule evaluates the actuator combination") {
    const auto b = torus(1);
    Rng rng(31);
    std::vector<Field> acts{Field::random_unit(b, rng),
                            Field::random_unit(b, rng)};
    std::vector<ClosedFormFn> coeffs{ClosedFormFn::constant(2.0),
                                     ClosedFormFn::polynomial({0.0, 1.0})};
    const ControlSchedule c(b, acts, coeffs, 1.0);
    CHECK(c.size() == 2);
    for (double t : {0.0, 0.3, 1.0}) {
        const Field want = 2.0 * acts[0] + t * acts[1];
        CHECK(norm_H(c.field_at(t) - want) < 1e-13);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(b->size());
        c.add_field_at(t, out);
        CHECK((out - want.coeffs()).norm() < 1e-13);
    }
    CHECK(c.coeff_values(0.5)[0] == doctest::Approx(2.0));
    CHECK(c.coeff_values(0.5)[1] == doctest::Approx(0.5));
}

TEST_CASE("schedule frequency and rate aggregates") {
    const auto b = torus(1);
    std::vector<Field> acts{Field::unit_mode(b, 0), Field::unit_mode(b, 1)};
    std::vector<ClosedFormFn> coeffs{
        ClosedFormFn::single({{1.0}, -4.0, 0.0, ClosedFormFn::Osc::Sin, 11.0}),
        ClosedFormFn::single({{1.0}, 2.0, 0.0, ClosedFormFn::Osc::Cos, 3.0})};
    const ControlSchedule c(b, acts, coeffs, 1.0);
    CHECK(c.max_frequency() == doctest::Approx(11.0));
    CHECK(c.max_rate() == doctest::Approx(4.0));
}

TEST_CASE("schedule json round-trip preserves values and structure") {
    const auto b = torus(1);
    Rng rng(37);
    std::vector<Field> acts{Field::random_unit(b, rng),
                            Field::random_unit(b, rng)};
    std::vector<ClosedFormFn> coeffs{
        sample_fn(),
        ClosedFormFn::single({{0.0, 2.0}, -1.5, 1.0, ClosedFormFn::Osc::Cos, 9.0})};
    const ControlSchedule c(b, acts, coeffs, 2.0);
    const ControlSchedule d = ControlSchedule::from_json(b, c.to_json());
    CHECK(d.horizon() == c.horizon());
    REQUIRE(d.size() == c.size());
    for (int i = 0; i <= 1000; ++i) {
        const double t = 2.0 * i / 1000.0;
        const Field cf = c.field_at(t);
        const Field df = d.field_at(t);
        CHECK(norm_H(cf - df) <= 1e-12 * (1.0 + norm_H(cf)));
    }
}

TEST_CASE("zero schedule is empty and evaluates to zero") {
    const auto b = torus(1);
    const ControlSchedule z = ControlSchedule::zero(b, 1.0);
    CHECK(z.size() == 0);
    CHECK(norm_H(z.field_at(0.5)) == 0.0);
    CHECK(z.max_frequency() == 0.0);
}
