#include "eulerctl/simulate.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace eulerctl {

BlowupError::BlowupError(double time_, double norm_)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << "state left the guard region at t = " << time_
              << " with |y|_H = " << norm_;
          return msg.str();
      }()),
      time(time_),
      norm(norm_) {}

Field Trajectory::initial_state() const {
    Field f(basis);
    f.coeffs() = snapshots.front();
    return f;
}

Field Trajectory::final_state() const {
    Field f(basis);
    f.coeffs() = snapshots.back();
    return f;
}

void Trajectory::write_csv(std::ostream& os, const Field* target) const {
    os << "t,energy,enstrophy";
    if (target) os << ",distance";
    os << "\n";
    os.precision(17);
    for (size_t i = 0; i < snapshots.size(); ++i) {
        const Eigen::VectorXd& x = snapshots[i];
        double ens = 0.0;
        for (Eigen::Index k = 0; k < x.size(); ++k)
            ens += (basis->lambda(static_cast<int>(k)) - 1.0) * x[k] * x[k];
        os << snapshot_times[i] << "," << 0.5 * x.squaredNorm() << ","
           << 0.5 * ens;
        if (target) os << "," << (x - target->coeffs()).norm();
        os << "\n";
    }
}

nlohmann::json Trajectory::to_json() const {
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& x : snapshots) {
        std::vector<double> row(x.data(), x.data() + x.size());
        snaps.push_back(row);
    }
    return {{"step", step},
            {"times", times},
            {"energy", energy},
            {"enstrophy", enstrophy},
            {"injection", injection},
            {"snapshot_times", snapshot_times},
            {"snapshots", snaps}};
}

Field rhs(const Field& y, double t, const Forcing& f, const ControlSchedule& c) {
    Field out = bilinear_B_self(y);
    out.coeffs() = -out.coeffs();
    f.add_at(t, out.coeffs());
    c.add_field_at(t, out.coeffs());
    return out;
}

double effective_step(double horizon, const SimOptions& opts, const Forcing& f,
                      const ControlSchedule& c) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(opts.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    double dt = opts.dt;
    const double w = std::max(f.max_frequency(), c.max_frequency());
    if (w > 0.0) dt = std::min(dt, std::acos(-1.0) / (64.0 * w));
    const double r = std::max(f.max_rate(), c.max_rate());
    if (r > 0.0) dt = std::min(dt, 0.125 / r);
    const auto n = static_cast<long long>(std::ceil(horizon / dt - 1e-9));
    return horizon / static_cast<double>(std::max(1ll, n));
}

namespace {

Trajectory integrate_once(const Field& y0, double horizon, const Forcing& f,
                          const ControlSchedule& c, const SimOptions& opts,
                          double h, bool record_series) {
    const BasisPtr& basis = y0.basis_ptr();
    if (!(*f.basis_ptr() == *basis && *c.basis_ptr() == *basis))
        throw std::invalid_argument("forcing/control basis mismatch");
    const auto table = InteractionTable::get(basis);
    const auto n = static_cast<long long>(std::llround(horizon / h));

    Trajectory out;
    out.basis = basis;
    out.step = h;

    Eigen::VectorXd x = y0.coeffs();
    Eigen::VectorXd k1, k2, k3, k4, work;
    auto eval = [&](const Eigen::VectorXd& xx, double tt, Eigen::VectorXd& kk) {
        kk = -table->apply_self(xx);
        f.add_at(tt, kk);
        c.add_field_at(tt, kk);
    };
    auto record = [&](long long i, double t) {
        const bool series =
            record_series &&
            (i % opts.series_stride == 0 || i == n || i == 0);
        const bool snap = i == 0 || i == n ||
                          (opts.snapshot_stride > 0 && i % opts.snapshot_stride == 0);
        if (series) {
            out.times.push_back(t);
            out.energy.push_back(0.5 * x.squaredNorm());
            double ens = 0.0;
            work.setZero(x.size());
            f.add_at(t, work);
            c.add_field_at(t, work);
            for (Eigen::Index k = 0; k < x.size(); ++k)
                ens += (basis->lambda(static_cast<int>(k)) - 1.0) * x[k] * x[k];
            out.enstrophy.push_back(0.5 * ens);
            out.injection.push_back(2.0 * work.dot(x));
        }
        if (snap) {
            out.snapshot_times.push_back(t);
            out.snapshots.push_back(x);
        }
    };

    record(0, 0.0);
    for (long long i = 0; i < n; ++i) {
        const double t = h * static_cast<double>(i);
        eval(x, t, k1);
        eval(x + (0.5 * h) * k1, t + 0.5 * h, k2);
        eval(x + (0.5 * h) * k2, t + 0.5 * h, k3);
        eval(x + h * k3, t + h, k4);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double tn = i + 1 == n ? horizon : h * static_cast<double>(i + 1);
        if (!x.allFinite() || x.norm() > opts.blowup_bound)
            throw BlowupError(tn, x.allFinite() ? x.norm()
                                                : std::numeric_limits<double>::infinity());
        record(i + 1, tn);
    }
    if (!record_series) {
        out.times = {0.0, horizon};
    }
    return out;
}

Trajectory integrate_guarded(const Field& y0, double horizon, const Forcing& f,
                             const ControlSchedule& c, const SimOptions& opts,
                             bool record_series) {
    double h = effective_step(horizon, opts, f, c);
    for (int attempt = 0;; ++attempt) {
        try {
            return integrate_once(y0, horizon, f, c, opts, h, record_series);
        } catch (const BlowupError&) {
            if (attempt >= opts.max_halvings) throw;
            h *= 0.5;
        }
    }
}

}  // namespace

Trajectory integrate(const Field& y0, double horizon, const Forcing& f,
                     const ControlSchedule& c, const SimOptions& opts) {
    if (opts.series_stride < 1)
        throw std::invalid_argument("series stride must be >= 1");
    return integrate_guarded(y0, horizon, f, c, opts, true);
}

Field integrate_endpoint(const Field& y0, double horizon, const Forcing& f,
                         const ControlSchedule& c, const SimOptions& opts) {
    return integrate_guarded(y0, horizon, f, c, opts, false).final_state();
}

}  // namespace eulerctl
