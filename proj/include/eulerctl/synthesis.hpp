#pragma once

#include "eulerctl/oblique.hpp"
#include "eulerctl/saturation.hpp"
#include "eulerctl/simulate.hpp"

namespace eulerctl {

// Search knobs for the constructive steering pipeline. The proof only needs
// existence of (mu, beta, K); here every one is found by a monitored search
// with acceptance decided by the simulated endpoint.
struct SynthesisParams {
    double sbar = 0.25;      // tail exponent in (0, 1/2), logged diagnostic
    double mu0 = 1.0;        // decay-rate search start
    int mu_doublings = 14;   // cap mu0 * 2^k
    double beta0 = 1.0;      // amplitude grid start
    int beta_halvings = 12;  // grid beta0 * 2^-k
    int k0 = 8;              // carrier schedule start
    int k_doublings = 9;     // schedule k0 * 2^k
    double hb_fraction = 0.5;  // budget share the beta comparator must meet
    double span_tol = 1e-8;    // rank tolerance for working-basis assembly
    double sim_dt = 1e-3;
    double blowup = 1e6;
    bool log_proof_conditions = true;  // evaluate the sufficient inequalities
};

struct StageReport {
    std::string stage;
    bool pass = false;
    double error = 0.0;   // measured endpoint error, when the stage has one
    double budget = 0.0;  // allowance the error is held against
    nlohmann::json details;

    nlohmann::json to_json() const;
};

class CutoffTooSmallError : public std::runtime_error {
public:
    explicit CutoffTooSmallError(const std::string& what)
        : std::runtime_error(what) {}
};

class SaturationNeededError : public std::runtime_error {
public:
    explicit SaturationNeededError(const std::string& what)
        : std::runtime_error(what) {}
};

// Smallest M whose coefficient tails satisfy the split
// |tail y0|^2 < eps^2/20 e^{-3T}, |tail y_a|^2 < eps^2/20,
// |tail f|^2_{L2 H} < eps^2/20 e^{-3T}. Throws CutoffTooSmallError when no
// M within the basis works.
int choose_M(const Field& y0, const Field& ya, const Forcing& f, double eps,
             double horizon, double sbar, StageReport* report = nullptr);

// Fictitious actuator selection: projections of the first M eigenfields onto
// the lowest saturation level that pushes the oblique defect
// |P_(E_M^perp)^(U_M) P_(E_M)| under rho.
struct UMSelection {
    int jbar = 0;
    std::vector<Field> actuators;  // spans U_M, one per eigenfield
    double defect = 0.0;
    double rho = 0.0;
    StageReport report;
};
UMSelection build_UM(int M, const SaturationResult& sat, double rho);

// Steering inside span U_M: control eta' - P f with eta interpolating the
// projected endpoints under e^{-mu t} shoulders; mu doubles until the
// simulated endpoint lands within eps/2 of the aim.
struct StageAResult {
    ControlSchedule control;
    StageReport report;
    double mu = 0.0;
    double error = 0.0;
};
StageAResult stage_A(const Field& y0, const Field& ya, const Forcing& f,
                     double eps, double horizon, const std::vector<Field>& um,
                     const SynthesisParams& params);

// The normalized pair behind a bracket actuator calB(psi) phi.
struct BracketProvenance {
    Field psi;
    Field phi;
};

// Replaces the last actuator of u (the bracket calB(psi) phi) by the
// oscillatory force kappa1 beta^-2 - d/dt kappa2 over the remaining
// actuators, searching beta then K until the endpoint error increase stays
// within budget. Also simulates the intermediate comparator (the schedule
// minus beta^2 B(phi, phi)) and logs both gaps.
struct ImitationResult {
    ControlSchedule control;
    StageReport report;
};
ImitationResult imitation_step(const Field& y0, const Field& ya,
                               const Forcing& f, const ControlSchedule& u,
                               const BracketProvenance& prov, double budget,
                               const SynthesisParams& params);

// Fixed-beta carrier sweep: endpoint gap to the comparator and error to the
// aim for every K in the schedule. Feed for the decay-slope checks.
struct SweepPoint {
    int K = 0;
    double gap = 0.0;
    double error = 0.0;
};
std::vector<SweepPoint> imitation_K_sweep(const Field& y0, const Field& ya,
                                          const Forcing& f,
                                          const ControlSchedule& u,
                                          const BracketProvenance& prov,
                                          double beta,
                                          const SynthesisParams& params);

// Worst H-norm residual of c(t) outside span(fields) over an even time grid.
double span_residual(const ControlSchedule& c, const std::vector<Field>& fields,
                     int samples);

// Stage A at the terminal saturation level, then one imitation step per
// bracket actuator, level by level down to the physical actuator set.
struct PipelineResult {
    ControlSchedule control;
    std::vector<Field> actuators;  // physical actuator set U
    double final_error = 0.0;
    double eps = 0.0;
    bool pass = false;
    Trajectory verification;
    nlohmann::json report;
};
PipelineResult full_pipeline(const Field& y0, const Field& ya, const Forcing& f,
                             double eps, const std::vector<Field>& generators,
                             double horizon, const SynthesisParams& params);

// Self-contained record of a synthesis run: domain, fields, forcing,
// schedule, integration step and the endpoint error to reproduce.
nlohmann::json synthesis_artifact(const DomainSpec& domain, int cutoff,
                                  const Field& y0, const Field& ya,
                                  const Forcing& f, const PipelineResult& result,
                                  const SynthesisParams& params);

struct ReplayResult {
    double replayed_error = 0.0;
    double logged_error = 0.0;
    bool match = false;  // agreement to 1e-10
};
ReplayResult replay_artifact(const nlohmann::json& artifact);

}  // namespace eulerctl
