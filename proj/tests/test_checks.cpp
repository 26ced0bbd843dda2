#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eulerctl/checks.hpp"

using namespace eulerctl;

namespace {
constexpr double kPi = 3.14159265358979323846;

BasisPtr torus(int cutoff) {
    return make_basis(torus_domain(2.0 * kPi, 2.0 * kPi), cutoff);
}
}  // namespace

TEST_CASE("loglog_slope recovers exact power laws") {
    const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v * v);
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
    // Non-positive samples are skipped, not propagated.
    const std::vector<double> y2{1.0, 0.0, 0.25, 1.0 / 16.0};
    const std::vector<double> x2{1.0, 2.0, 4.0, 8.0};
    CHECK(loglog_slope(x2, y2) == doctest::Approx(-4.0 / 3.0).epsilon(0.35));
    CHECK(std::isnan(loglog_slope({1.0}, {2.0})));
    CHECK(std::isnan(loglog_slope({1.0, 2.0}, {0.0, -1.0})));
}

TEST_CASE("oscillatory bounds hold for a smooth envelope") {
    const ClosedFormFn theta =
        ClosedFormFn::single({{0.0, 1.0}, -1.0, 0.0, ClosedFormFn::Osc::None,
                              0.0});  // t e^{-t}
    const CheckResult r =
        check_osc_integral(theta, 1.0, {2, 4, 8, 16, 32, 64, 128});
    CHECK(r.pass);
    // Every row respects both bounds with margin ratio <= 1.
    for (const auto& row : r.measured.at("rows")) {
        CHECK(std::abs(row.at("sin_integral").get<double>()) <=
              row.at("sin_bound").get<double>());
        CHECK(std::abs(row.at("cos_integral").get<double>()) <=
              row.at("cos_bound").get<double>());
    }
    CHECK(r.measured.at("headline").get<double>() <= 1.0);
    // The sine integral decays like 1/K for this smooth envelope.
    const double slope = r.measured.at("sin_slope").get<double>();
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.3));
    CHECK_THROWS_AS(check_osc_integral(theta, 1.0, {}),
                    std::invalid_argument);
}

TEST_CASE("quadrature Sobolev norms agree with the eigenvalue closed form") {
    const CheckResult r = check_curl_equiv(torus(3), 6);
    CHECK(r.pass);
    CHECK(r.id == "curl_equiv_c3");
    for (const auto& row : r.measured.at("rows"))
        CHECK(std::abs(row.at("ratio").get<double>() - 1.0) <= 1e-8);
    const auto rect = make_basis(rectangle_domain(1.0, 1.5), 2);
    CHECK(check_curl_equiv(rect, 4).pass);
}

TEST_CASE("trilinear identities pass clean and fail under a sign flip") {
    const auto b = torus(2);
    const CheckResult clean = check_trilinear(b, 100);
    CHECK(clean.pass);
    CHECK(clean.measured.at("max_self").get<double>() <= 1e-11);
    CHECK(clean.measured.at("max_antisymmetry").get<double>() <= 1e-11);
    // Sensitivity: corrupting one structure coefficient must be caught.
    const CheckResult bad =
        check_trilinear(b, 100, 11, Corruption::SignFlip);
    CHECK_FALSE(bad.pass);
    CHECK(bad.measured.at("max_antisymmetry").get<double>() > 1e-11);
}

TEST_CASE("energy and enstrophy drift stays within tolerance") {
    EnergyCheckConfig cfg;
    cfg.basis = torus(2);
    cfg.seeds = 3;
    const CheckResult r = check_energy(cfg);
    CHECK(r.pass);
    CHECK(r.measured.at("energy_drift").get<double>() <= cfg.energy_tol);
    CHECK(r.measured.at("enstrophy_drift").get<double>() <= cfg.enstrophy_tol);
    CHECK(r.measured.at("energy_law_error").get<double>() <= cfg.law_tol);
}

TEST_CASE("gram projector matches the dense oracle and tilts linearly") {
    const CheckResult r = check_oblique(24, 40, {1e-1, 1e-2, 1e-3, 1e-4});
    CHECK(r.pass);
    CHECK(r.measured.at("max_mismatch").get<double>() <= 1e-10);
    CHECK(r.measured.at("defect_slope").get<double>() ==
          doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("default suite passes, sorted and deterministic") {
    const auto results = default_suite(4);
    REQUIRE(!results.empty());
    CHECK(all_pass(results));
    for (size_t i = 0; i + 1 < results.size(); ++i)
        CHECK(results[i].id < results[i + 1].id);
    // Two runs serialize identically, byte for byte.
    std::ostringstream a, b;
    write_jsonl(a, results);
    write_jsonl(b, default_suite(4));
    CHECK(a.str() == b.str());
    // Summary CSV shape.
    std::ostringstream csv;
    write_csv_summary(csv, results);
    std::istringstream in(csv.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "check,pass,headline");
    size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == results.size());
}

TEST_CASE("check results round-trip through json") {
    const auto b = torus(2);
    const CheckResult r = check_trilinear(b, 20);
    const CheckResult s = CheckResult::from_json(r.to_json());
    CHECK(s.id == r.id);
    CHECK(s.pass == r.pass);
    CHECK(s.measured.dump() == r.measured.dump());
    CHECK(s.bound.dump() == r.bound.dump());
    CHECK(s.metadata.dump() == r.metadata.dump());
}
