#pragma once

#include <iosfwd>
#include <stdexcept>

#include "eulerctl/bilinear.hpp"
#include "eulerctl/forcing.hpp"

namespace eulerctl {

struct SimOptions {
    double dt = 1e-3;           // requested step; shrunk by the carrier rules
    double blowup_bound = 1e6;  // H-norm guard
    int series_stride = 1;      // energy series sampling (steps)
    int snapshot_stride = 0;    // full-state sampling; 0 keeps endpoints only
    int max_halvings = 0;       // retries with dt/2 after a guard trip
};

class BlowupError : public std::runtime_error {
public:
    BlowupError(double time, double norm);
    double time;
    double norm;
};

// Coefficient-space path of one integration. The scalar series cover the
// recorded grid; full states are kept only at the snapshot times.
struct Trajectory {
    BasisPtr basis;
    double step = 0.0;
    std::vector<double> times;
    std::vector<double> energy;     // 0.5 |y|_H^2
    std::vector<double> enstrophy;  // 0.5 |curl y|^2
    std::vector<double> injection;  // 2 (f(t) + c(t), y(t))_H
    std::vector<double> snapshot_times;
    std::vector<Eigen::VectorXd> snapshots;

    Field initial_state() const;
    Field final_state() const;
    double final_time() const { return times.back(); }

    // Rows at the snapshot times: t, energy, enstrophy and, when a target is
    // given, the H-distance to it.
    void write_csv(std::ostream& os, const Field* target = nullptr) const;
    nlohmann::json to_json() const;
};

// -B(y, y) + f(t) + c(t), all on the shared truncated basis.
Field rhs(const Field& y, double t, const Forcing& f, const ControlSchedule& c);

// Step actually used: the requested dt capped so the fastest carrier gets at
// least 64 steps per half period and the steepest exponential at least 8
// steps per e-fold, then rounded down to divide the horizon evenly.
double effective_step(double horizon, const SimOptions& opts, const Forcing& f,
                      const ControlSchedule& c);

Trajectory integrate(const Field& y0, double horizon, const Forcing& f,
                     const ControlSchedule& c, const SimOptions& opts = {});

// Endpoint-only variant for search loops.
Field integrate_endpoint(const Field& y0, double horizon, const Forcing& f,
                         const ControlSchedule& c, const SimOptions& opts = {});

}  // namespace eulerctl
