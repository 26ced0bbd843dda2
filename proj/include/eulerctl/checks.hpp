#pragma once

#include "eulerctl/simulate.hpp"

namespace eulerctl {

// Machine-checkable evidence for one lemma or invariant: everything needed
// to recompute the pass decision offline.
struct CheckResult {
    std::string id;
    bool pass = false;
    nlohmann::json measured;
    nlohmann::json bound;
    nlohmann::json metadata;

    nlohmann::json to_json() const;
    static CheckResult from_json(const nlohmann::json& j);
};

// Least-squares slope of log|y| against log x, skipping non-positive values.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Oscillatory averaging bounds: for every K in the list,
// |int sin(pi K s / T) Theta| <= (pi C + 1) T / pi |Theta|_W11 / K and
// |int cos(pi K s / T) Theta| <= T / pi |Theta|_W11 / K,
// with C the per-Theta surrogate sup|Theta| / |Theta|_W11.
CheckResult check_osc_integral(const ClosedFormFn& theta, double horizon,
                               const std::vector<int>& ks);

// Sobolev norm by quadrature against the eigenvalue closed form: the ratio
// |y|_W12^2 / (|y|_H^2 + |curl y|^2) equals 1 on the eigenfield basis.
CheckResult check_curl_equiv(const BasisPtr& basis, int samples,
                             std::uint64_t seed = 7);

enum class Corruption : std::uint8_t { None = 0, SignFlip = 1 };

// b(y, z, z) = 0 and b(y, z, w) = -b(y, w, z) over seeded random triples.
// The SignFlip knob negates one structure coefficient, which must flip the
// antisymmetry verdict (suite sensitivity self-test).
CheckResult check_trilinear(const BasisPtr& basis, int trials,
                            std::uint64_t seed = 11,
                            Corruption corruption = Corruption::None);

struct EnergyCheckConfig {
    BasisPtr basis;
    double horizon = 1.0;
    double dt = 1e-3;
    int seeds = 20;
    std::uint64_t seed0 = 1;
    double energy_tol = 1e-8;     // relative drift, unforced
    double enstrophy_tol = 1e-6;  // relative drift, unforced (torus invariant)
    double law_tol = 1e-6;        // forced balance vs injection integral
};

// Unforced energy/enstrophy conservation plus the forced energy balance
// d/dt |y|_H^2 = 2 (f + c, y)_H integrated along one forced run.
CheckResult check_energy(const EnergyCheckConfig& cfg);

// Gram-system projector against a dense direct-sum solve on random splits,
// plus the perturbation study: the head defect of a delta-perturbed head
// span decays linearly in delta.
CheckResult check_oblique(int dim, int splits, const std::vector<double>& deltas,
                          std::uint64_t seed = 13);

// The verify suite: all checks above at their default scales, sorted by id.
std::vector<CheckResult> default_suite(int cutoff);

bool all_pass(const std::vector<CheckResult>& results);
void write_jsonl(std::ostream& os, const std::vector<CheckResult>& results);
void write_csv_summary(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace eulerctl
