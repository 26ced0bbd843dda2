#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eulerctl/simulate.hpp"

using namespace eulerctl;

namespace {
constexpr double kPi = 3.14159265358979323846;

BasisPtr torus(int cutoff) {
    return make_basis(torus_domain(2.0 * kPi, 2.0 * kPi), cutoff);
}
}  // namespace

TEST_CASE("single eigenfields are steady states") {
    const auto b = torus(2);
    const Forcing f = Forcing::zero(b);
    const ControlSchedule c = ControlSchedule::zero(b, 1.0);
    for (int i : {0, 3, 7}) {
        const Field y0 = 2.5 * Field::unit_mode(b, i);
        const Field y1 = integrate_endpoint(y0, 1.0, f, c);
        CHECK(norm_H(y1 - y0) < 1e-10);
    }
}

TEST_CASE("free flow conserves energy and enstrophy") {
    const auto b = torus(2);
    const Forcing f = Forcing::zero(b);
    const ControlSchedule c = ControlSchedule::zero(b, 1.0);
    Rng rng(101);
    for (int t = 0; t < 3; ++t) {
        const Field y0 = Field::random_unit(b, rng);
        const Field y1 = integrate_endpoint(y0, 1.0, f, c);
        CHECK(std::abs(energy(y1) - energy(y0)) < 1e-8);
        CHECK(std::abs(enstrophy(y1) - enstrophy(y0)) < 1e-6);
    }
}

TEST_CASE("integrator self-converges at fourth order") {
    const auto b = torus(2);
    const Forcing f = Forcing::zero(b);
    const ControlSchedule c = ControlSchedule::zero(b, 1.0);
    Rng rng(7);
    const Field y0 = Field::random_unit(b, rng);
    SimOptions fine;
    fine.dt = 1e-4;
    const Field ref = integrate_endpoint(y0, 1.0, f, c, fine);
    auto err_at = [&](double dt) {
        SimOptions o;
        o.dt = dt;
        return norm_H(integrate_endpoint(y0, 1.0, f, c, o) - ref);
    };
    const double e1 = err_at(0.02);
    const double e2 = err_at(0.01);
    const double ratio = e1 / e2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("forced energy balance matches the injection integral") {
    const auto b = torus(2);
    Rng rng(71);
    const Forcing f = Forcing::constant(0.4 * Field::random_unit(b, rng));
    const ControlSchedule c = ControlSchedule::zero(b, 1.0);
    const Field y0 = Field::random_unit(b, rng);
    SimOptions opts;
    opts.dt = 1e-3;
    const Trajectory traj = integrate(y0, 1.0, f, c, opts);
    // 2 E(T) - 2 E(0) = int injection dt, trapezoid on the recorded grid.
    double acc = 0.0;
    for (size_t i = 0; i + 1 < traj.times.size(); ++i)
        acc += 0.5 * (traj.injection[i] + traj.injection[i + 1]) *
               (traj.times[i + 1] - traj.times[i]);
    const double lhs = 2.0 * (traj.energy.back() - traj.energy.front());
    CHECK(std::abs(lhs - acc) < 1e-6);
}

TEST_CASE("blow-up guard throws with time and norm attached") {
    const auto b = torus(1);
    const Forcing f = Forcing::constant(10.0 * Field::unit_mode(b, 0));
    const ControlSchedule c = ControlSchedule::zero(b, 1.0);
    SimOptions opts;
    opts.blowup_bound = 1.0;
    const Field y0(b);
    try {
        integrate_endpoint(y0, 1.0, f, c, opts);
        FAIL("expected BlowupError");
    } catch (const BlowupError& e) {
        CHECK(e.norm > 1.0);
        CHECK(e.time > 0.0);
        CHECK(e.time <= 1.0);
    }
}

TEST_CASE("halvings rescue a step that is too coarse") {
    const auto b = torus(2);
    Rng rng(5);
    const Field y0 = 500.0 * Field::random_unit(b, rng);
    const Forcing f = Forcing::zero(b);
    const ControlSchedule c = ControlSchedule::zero(b, 0.05);

    // Calibrate: one unresolved step inflates the conserved norm.
    SimOptions wide;
    wide.dt = 0.05;
    wide.blowup_bound = 1e12;
    const double n0 = norm_H(y0);
    const double n1 = norm_H(integrate_endpoint(y0, 0.05, f, c, wide));
    REQUIRE(n1 > 1.2 * n0);

    SimOptions coarse = wide;
    coarse.blowup_bound = 1.2 * n0;
    try {
        integrate_endpoint(y0, 0.05, f, c, coarse);
        FAIL("expected BlowupError");
    } catch (const BlowupError& e) {
        CHECK(e.norm > coarse.blowup_bound);
        CHECK(e.time <= 0.05 + 1e-12);
    }

    // Retries shrink the step until the whole path clears the guard.
    SimOptions rescued = coarse;
    rescued.max_halvings = 14;
    const Field y1 = integrate_endpoint(y0, 0.05, f, c, rescued);
    CHECK(norm_H(y1) <= coarse.blowup_bound);
}

TEST_CASE("effective step obeys the carrier and rate rules") {
    const auto b = torus(1);
    const Forcing f = Forcing::zero(b);
    SimOptions opts;
    opts.dt = 1e-2;
    // No oscillation: the requested step divides the horizon evenly.
    const ControlSchedule z = ControlSchedule::zero(b, 1.0);
    const double h0 = effective_step(1.0, opts, f, z);
    CHECK(h0 == doctest::Approx(1e-2));
    CHECK(std::abs(1.0 / h0 - std::round(1.0 / h0)) < 1e-9);
    // A fast carrier forces at least 64 steps per half period.
    const double w = 400.0;
    const ControlSchedule c(
        b, {Field::unit_mode(b, 0)},
        {ClosedFormFn::single({{1.0}, 0.0, 0.0, ClosedFormFn::Osc::Sin, w})},
        1.0);
    const double h1 = effective_step(1.0, opts, f, c);
    CHECK(h1 <= kPi / (64.0 * w) * (1.0 + 1e-12));
    // A steep exponential forces at least 8 steps per e-fold.
    const ControlSchedule g(
        b, {Field::unit_mode(b, 0)},
        {ClosedFormFn::single({{1.0}, -800.0, 0.0, ClosedFormFn::Osc::None, 0.0})},
        1.0);
    const double h2 = effective_step(1.0, opts, f, g);
    CHECK(h2 <= 0.125 / 800.0 * (1.0 + 1e-12));
}

TEST_CASE("trajectory recording strides and csv output") {
    const auto b = torus(1);
    Rng rng(3);
    const Field y0 = Field::random_unit(b, rng);
    const Forcing f = Forcing::zero(b);
    const ControlSchedule c = ControlSchedule::zero(b, 1.0);
    SimOptions opts;
    opts.dt = 1e-2;
    opts.series_stride = 10;
    opts.snapshot_stride = 50;
    const Trajectory traj = integrate(y0, 1.0, f, c, opts);
    CHECK(traj.times.size() == 11);
    CHECK(traj.snapshot_times.size() == 3);
    CHECK(traj.final_time() == doctest::Approx(1.0));
    CHECK(norm_H(traj.initial_state() - y0) == 0.0);
    std::ostringstream csv;
    traj.write_csv(csv, &y0);
    std::istringstream in(csv.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,energy,enstrophy,distance");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("runs are deterministic bit for bit") {
    const auto b = torus(2);
    Rng rng(13);
    const Field y0 = Field::random_unit(b, rng);
    const Forcing f = Forcing::constant(0.2 * Field::unit_mode(b, 3));
    const ControlSchedule c(
        b, {Field::unit_mode(b, 1)},
        {ClosedFormFn::single({{0.5}, -1.0, 0.0, ClosedFormFn::Osc::Sin, 6.0})},
        1.0);
    const Field a = integrate_endpoint(y0, 1.0, f, c);
    const Field bb = integrate_endpoint(y0, 1.0, f, c);
    for (int i = 0; i < a.size(); ++i) CHECK(a[i] == bb[i]);
}
