#include "eulerctl/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "eulerctl/oblique.hpp"
#include "eulerctl/quadrature.hpp"

namespace eulerctl {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadrature W^{1,2} seminorm pieces of a field, by midpoint rule on the
// torus (exact for the trig polynomials involved) and composite panels on
// the rectangle.
double quad_w12_sq(const Field& y) {
    const DomainSpec& dom = y.basis().domain();
    auto density = [&](double x1, double x2) {
        Eigen::Vector2d x(x1, x2);
        const Eigen::Vector2d v = y.eval(x);
        const Eigen::Matrix2d g = y.eval_gradient(x);
        return v.squaredNorm() + g.squaredNorm();
    };
    if (dom.kind == DomainKind::Torus) {
        const int n = 4 * (y.basis().cutoff() + 1);
        MidpointGrid grid = midpoint_grid(dom.lengths[0], dom.lengths[1], n);
        double sum = 0.0;
        for (const auto& p : grid.points) sum += density(p[0], p[1]);
        return sum * grid.weight;
    }
    const int panels = y.basis().cutoff() + 2;
    return integrate2d_panels(density, dom.lengths[0], dom.lengths[1], panels,
                              12);
}

}  // namespace

nlohmann::json CheckResult::to_json() const {
    return {{"id", id},
            {"pass", pass},
            {"measured", measured},
            {"bound", bound},
            {"metadata", metadata}};
}

CheckResult CheckResult::from_json(const nlohmann::json& j) {
    CheckResult r;
    r.id = j.at("id").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    r.measured = j.at("measured");
    r.bound = j.at("bound");
    r.metadata = j.at("metadata");
    return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("loglog_slope: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / denom;
}

CheckResult check_osc_integral(const ClosedFormFn& theta, double horizon,
                               const std::vector<int>& ks) {
    if (!(horizon > 0.0))
        throw std::invalid_argument("check_osc_integral: horizon must be > 0");
    if (ks.empty())
        throw std::invalid_argument("check_osc_integral: empty K list");
    const double T = horizon;
    const ClosedFormFn dtheta = theta.derivative();

    // Per-Theta surrogate for the embedding constant: sup over a dense grid
    // against the W^{1,1} norm of Theta itself.
    double sup = 0.0;
    const int grid = 4096;
    for (int i = 0; i <= grid; ++i)
        sup = std::max(sup, std::abs(theta.value(T * i / grid)));
    const double quad_tol = 1e-12;
    const double l1 = integrate_adaptive(
        [&](double s) { return std::abs(theta.value(s)); }, 0.0, T, quad_tol);
    const double dl1 = integrate_adaptive(
        [&](double s) { return std::abs(dtheta.value(s)); }, 0.0, T, quad_tol);
    const double w11 = l1 + dl1;
    const double surrogate_c = w11 > 0.0 ? sup / w11 : 0.0;

    nlohmann::json rows = nlohmann::json::array();
    std::vector<double> kd, sin_abs;
    bool pass = true;
    double worst_margin = 0.0;
    for (int K : ks) {
        if (K < 1)
            throw std::invalid_argument("check_osc_integral: K must be >= 1");
        const double w = kPi * K / T;
        const double is = integrate_adaptive(
            [&](double s) { return std::sin(w * s) * theta.value(s); }, 0.0, T,
            quad_tol);
        const double ic = integrate_adaptive(
            [&](double s) { return std::cos(w * s) * theta.value(s); }, 0.0, T,
            quad_tol);
        const double sin_bound = (kPi * surrogate_c + 1.0) * T / kPi * w11 / K;
        const double cos_bound = T / kPi * w11 / K;
        const bool ok = std::abs(is) <= sin_bound && std::abs(ic) <= cos_bound;
        pass = pass && ok;
        worst_margin = std::max(
            worst_margin, std::max(sin_bound > 0 ? std::abs(is) / sin_bound : 0.0,
                                   cos_bound > 0 ? std::abs(ic) / cos_bound : 0.0));
        rows.push_back({{"K", K},
                        {"sin_integral", is},
                        {"cos_integral", ic},
                        {"sin_bound", sin_bound},
                        {"cos_bound", cos_bound},
                        {"pass", ok}});
        kd.push_back(static_cast<double>(K));
        sin_abs.push_back(std::abs(is));
    }

    CheckResult r;
    r.id = "osc_integral";
    r.pass = pass;
    r.measured = {{"headline", worst_margin},
                  {"rows", rows},
                  {"sin_slope", loglog_slope(kd, sin_abs)}};
    r.bound = {{"sin_factor", (kPi * surrogate_c + 1.0) * T / kPi * w11},
               {"cos_factor", T / kPi * w11},
               {"decay", "K^-1"}};
    r.metadata = {{"horizon", T},
                  {"theta", theta.to_json()},
                  {"sup", sup},
                  {"w11_norm", w11},
                  {"surrogate_C", surrogate_c},
                  {"quad_tol", quad_tol}};
    return r;
}

CheckResult check_curl_equiv(const BasisPtr& basis, int samples,
                             std::uint64_t seed) {
    if (samples < 1)
        throw std::invalid_argument("check_curl_equiv: samples must be >= 1");
    Rng rng(seed);
    const double tol = 1e-8;
    nlohmann::json rows = nlohmann::json::array();
    double worst = 0.0;
    bool pass = true;
    // Single eigenfields first: the quadrature ratio must match the
    // eigenvalue closed form lambda / lambda = 1 mode by mode.
    const int probes = std::min(4, basis->size());
    for (int i = 0; i < probes; ++i) {
        Field e = Field::unit_mode(basis, i);
        const double num = quad_w12_sq(e);
        const double den = 1.0 + curl(e).coeffs().squaredNorm();
        const double ratio = num / den;
        pass = pass && std::abs(ratio - 1.0) <= tol;
        worst = std::max(worst, std::abs(ratio - 1.0));
        rows.push_back({{"kind", "mode"},
                        {"index", i},
                        {"lambda", basis->lambda(i)},
                        {"ratio", ratio}});
    }
    for (int s = 0; s < samples; ++s) {
        Field y = Field::random_unit(basis, rng);
        const double num = quad_w12_sq(y);
        const double den =
            y.coeffs().squaredNorm() + curl(y).coeffs().squaredNorm();
        const double ratio = num / den;
        pass = pass && std::isfinite(ratio) && std::abs(ratio - 1.0) <= tol;
        worst = std::max(worst, std::abs(ratio - 1.0));
        rows.push_back({{"kind", "random"}, {"sample", s}, {"ratio", ratio}});
    }
    CheckResult r;
    r.id = "curl_equiv_c" + std::to_string(basis->cutoff());
    r.pass = pass;
    r.measured = {{"headline", worst}, {"rows", rows}};
    r.bound = {{"ratio", 1.0}, {"tolerance", tol}};
    r.metadata = {{"cutoff", basis->cutoff()},
                  {"domain", basis->domain().to_json()},
                  {"samples", samples},
                  {"seed", seed}};
    return r;
}

CheckResult check_trilinear(const BasisPtr& basis, int trials,
                            std::uint64_t seed, Corruption corruption) {
    if (trials < 1)
        throw std::invalid_argument("check_trilinear: trials must be >= 1");
    Rng rng(seed);

    // The sign-flip mutation negates one structure coefficient; evaluated as
    // a rank-one correction -2 c y_i z_j w_k on top of the honest form.
    int ci = -1, cj = -1, ck = -1;
    double cval = 0.0;
    if (corruption == Corruption::SignFlip) {
        const int probe = std::min(basis->size(), 12);
        for (int i = 0; i < probe && ci < 0; ++i)
            for (int j = 0; j < probe && ci < 0; ++j)
                for (int k = 0; k < probe && ci < 0; ++k) {
                    const double v = b_form(Field::unit_mode(basis, i),
                                            Field::unit_mode(basis, j),
                                            Field::unit_mode(basis, k));
                    if (std::abs(v) > 1e-8) {
                        ci = i;
                        cj = j;
                        ck = k;
                        cval = v;
                    }
                }
        if (ci < 0)
            throw std::runtime_error(
                "check_trilinear: no nonzero coefficient to corrupt");
    }
    auto form = [&](const Field& y, const Field& z, const Field& w) {
        double v = b_form(y, z, w);
        if (ci >= 0) v -= 2.0 * cval * y[ci] * z[cj] * w[ck];
        return v;
    };

    const double tol = 1e-11;
    double max_self = 0.0, max_sym = 0.0;
    for (int t = 0; t < trials; ++t) {
        Field y = Field::random_unit(basis, rng);
        Field z = Field::random_unit(basis, rng);
        Field w = Field::random_unit(basis, rng);
        max_self = std::max(max_self, std::abs(form(y, z, z)));
        max_sym = std::max(max_sym, std::abs(form(y, z, w) + form(y, w, z)));
    }
    CheckResult r;
    r.id = "trilinear";
    r.pass = max_self <= tol && max_sym <= tol;
    r.measured = {{"headline", std::max(max_self, max_sym)},
                  {"max_self", max_self},
                  {"max_antisymmetry", max_sym}};
    r.bound = {{"tolerance", tol}, {"scale", "unit H-norm triples"}};
    r.metadata = {{"cutoff", basis->cutoff()},
                  {"domain", basis->domain().to_json()},
                  {"trials", trials},
                  {"seed", seed},
                  {"corruption",
                   corruption == Corruption::SignFlip ? "sign_flip" : "none"}};
    return r;
}

CheckResult check_energy(const EnergyCheckConfig& cfg) {
    if (!cfg.basis) throw std::invalid_argument("check_energy: basis required");
    if (cfg.seeds < 1)
        throw std::invalid_argument("check_energy: seeds must be >= 1");
    const BasisPtr& basis = cfg.basis;
    const bool torus = basis->domain().kind == DomainKind::Torus;

    SimOptions opts;
    opts.dt = cfg.dt;
    opts.series_stride = 1;

    Forcing no_force = Forcing::zero(basis);
    ControlSchedule no_control = ControlSchedule::zero(basis, cfg.horizon);

    double worst_energy = 0.0, worst_enstrophy = 0.0;
    for (int s = 0; s < cfg.seeds; ++s) {
        Rng rng(cfg.seed0 + static_cast<std::uint64_t>(s));
        Field y0 = Field::random_unit(basis, rng);
        Trajectory traj =
            integrate(y0, cfg.horizon, no_force, no_control, opts);
        const double e0 = traj.energy.front();
        const double z0 = traj.enstrophy.front();
        for (size_t i = 0; i < traj.times.size(); ++i) {
            worst_energy =
                std::max(worst_energy, std::abs(traj.energy[i] - e0) / e0);
            if (z0 > 0.0)
                worst_enstrophy = std::max(
                    worst_enstrophy, std::abs(traj.enstrophy[i] - z0) / z0);
        }
    }

    // Forced balance: |y(T)|^2 - |y0|^2 against the integrated injection.
    Rng rng(cfg.seed0 + 1000);
    Field y0 = Field::random_unit(basis, rng);
    Field g = Field::random_unit(basis, rng) * 0.3;
    Forcing force = Forcing::constant(g);
    Trajectory forced = integrate(y0, cfg.horizon, force, no_control, opts);
    double injected = 0.0;
    for (size_t i = 1; i < forced.times.size(); ++i)
        injected += 0.5 * (forced.injection[i] + forced.injection[i - 1]) *
                    (forced.times[i] - forced.times[i - 1]);
    const double delta_sq =
        2.0 * (forced.energy.back() - forced.energy.front());
    const double law_err =
        std::abs(delta_sq - injected) / std::max(1.0, std::abs(delta_sq));

    const bool pass = worst_energy <= cfg.energy_tol &&
                      (!torus || worst_enstrophy <= cfg.enstrophy_tol) &&
                      law_err <= cfg.law_tol;
    CheckResult r;
    r.id = "energy";
    r.pass = pass;
    r.measured = {{"headline", worst_energy},
                  {"energy_drift", worst_energy},
                  {"enstrophy_drift", worst_enstrophy},
                  {"energy_law_error", law_err}};
    r.bound = {{"energy_tol", cfg.energy_tol},
               {"enstrophy_tol", cfg.enstrophy_tol},
               {"enstrophy_enforced", torus},
               {"law_tol", cfg.law_tol}};
    r.metadata = {{"cutoff", basis->cutoff()},
                  {"domain", basis->domain().to_json()},
                  {"horizon", cfg.horizon},
                  {"dt", cfg.dt},
                  {"seeds", cfg.seeds},
                  {"seed0", cfg.seed0}};
    return r;
}

CheckResult check_oblique(int dim, int splits, const std::vector<double>& deltas,
                          std::uint64_t seed) {
    if (splits < 1)
        throw std::invalid_argument("check_oblique: splits must be >= 1");
    // Smallest torus basis whose span reaches the requested dimension.
    int cutoff = 1;
    BasisPtr basis = make_basis(torus_domain(2 * kPi, 2 * kPi), cutoff);
    while (basis->size() < dim && cutoff < 16)
        basis = make_basis(torus_domain(2 * kPi, 2 * kPi), ++cutoff);
    const int D = basis->size();

    Rng rng(seed);
    auto random_field = [&](int) {
        Eigen::VectorXd v(D);
        for (int i = 0; i < D; ++i) v[i] = rng.normal();
        return Field(basis, v / v.norm());
    };

    const double mismatch_tol = 1e-10;
    double max_mismatch = 0.0;
    int degenerate = 0;
    bool pass = true;
    for (int t = 0; t < splits; ++t) {
        const int p = 1 + static_cast<int>(rng.integer(
                              static_cast<std::uint64_t>(D - 1)));
        Subspace X(basis), Y(basis);
        for (int i = 0; i < p; ++i)
            span_extend(X, random_field(i), {}, 1e-10);
        for (int i = 0; i < D - p; ++i)
            span_extend(Y, random_field(i), {}, 1e-10);
        if (X.dim() != p || Y.dim() != D - p) {
            ++degenerate;
            continue;
        }
        try {
            ObliqueProjector proj = ObliqueProjector::general(X, Y);
            Eigen::MatrixXd sum(D, D);
            for (int i = 0; i < p; ++i)
                sum.col(i) = X.elements()[static_cast<size_t>(i)].coeffs();
            for (int i = 0; i < D - p; ++i)
                sum.col(p + i) = Y.elements()[static_cast<size_t>(i)].coeffs();
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(sum);
            Field z = random_field(0);
            Eigen::VectorXd ab = lu.solve(z.coeffs());
            Eigen::VectorXd oracle = sum.leftCols(p) * ab.head(p);
            const double mismatch = (proj.apply(z).coeffs() - oracle).norm();
            max_mismatch = std::max(max_mismatch, mismatch);
            pass = pass && mismatch <= mismatch_tol;
        } catch (const DegenerateSumError&) {
            ++degenerate;
        }
    }

    // Perturbation study: head fields tilted into the tail by delta; the
    // defect of the oblique pair must vanish linearly with delta.
    const int head = std::min(4, D - 1);
    std::vector<Eigen::VectorXd> tilt;
    for (int i = 0; i < head; ++i) {
        Eigen::VectorXd w(D);
        for (int k = 0; k < D; ++k) w[k] = rng.normal();
        w.head(head).setZero();
        tilt.push_back(w / w.norm());
    }
    nlohmann::json defect_rows = nlohmann::json::array();
    std::vector<double> defects;
    for (double delta : deltas) {
        std::vector<Field> span;
        for (int i = 0; i < head; ++i) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(D);
            v[i] = 1.0;
            v += delta * tilt[static_cast<size_t>(i)];
            span.emplace_back(basis, v);
        }
        const double defect =
            ObliqueProjector::along_tail(basis, span).head_defect(head);
        defects.push_back(defect);
        defect_rows.push_back({{"delta", delta}, {"defect", defect}});
    }
    const double slope =
        loglog_slope(std::vector<double>(deltas.begin(), deltas.end()), defects);
    const bool slope_ok = std::isfinite(slope) && std::abs(slope - 1.0) <= 0.1;
    pass = pass && slope_ok;

    CheckResult r;
    r.id = "oblique";
    r.pass = pass;
    r.measured = {{"headline", max_mismatch},
                  {"max_mismatch", max_mismatch},
                  {"degenerate_splits", degenerate},
                  {"defects", defect_rows},
                  {"defect_slope", slope}};
    r.bound = {{"mismatch_tol", mismatch_tol},
               {"slope", 1.0},
               {"slope_tol", 0.1}};
    r.metadata = {{"dim", D},
                  {"requested_dim", dim},
                  {"splits", splits},
                  {"seed", seed}};
    return r;
}

std::vector<CheckResult> default_suite(int cutoff) {
    BasisPtr basis = make_basis(torus_domain(2 * kPi, 2 * kPi), cutoff);
    BasisPtr coarse = make_basis(torus_domain(2 * kPi, 2 * kPi), 4);

    std::vector<int> ks;
    for (int K = 2; K <= 256; K *= 2) ks.push_back(K);

    std::vector<CheckResult> out;
    {
        // One oscillatory check per closed-form family member.
        struct Probe {
            const char* tag;
            ClosedFormFn theta;
        };
        ClosedFormFn::Term exp_term{{1.0}, 1.0, 0.0, ClosedFormFn::Osc::None,
                                    0.0};
        const Probe probes[] = {
            {"const", ClosedFormFn::constant(1.0)},
            {"linear", ClosedFormFn::polynomial({0.0, 1.0})},
            {"quadratic", ClosedFormFn::polynomial({0.0, 0.0, 1.0})},
            {"exp", ClosedFormFn::single(exp_term)}};
        for (const auto& probe : probes) {
            CheckResult r = check_osc_integral(probe.theta, 1.0, ks);
            r.id = "osc_integral_" + std::string(probe.tag);
            out.push_back(std::move(r));
        }
    }
    out.push_back(check_curl_equiv(coarse, 6));
    if (cutoff != coarse->cutoff()) out.push_back(check_curl_equiv(basis, 6));
    out.push_back(check_trilinear(basis, 200));
    EnergyCheckConfig energy;
    energy.basis = basis;
    energy.seeds = 5;
    out.push_back(check_energy(energy));
    out.push_back(check_oblique(24, 100, {1e-1, 1e-2, 1e-3, 1e-4}));
    std::sort(out.begin(), out.end(),
              [](const CheckResult& a, const CheckResult& b) {
                  return a.id < b.id;
              });
    return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.pass; });
}

void write_jsonl(std::ostream& os, const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results) os << r.to_json().dump() << "\n";
}

void write_csv_summary(std::ostream& os,
                       const std::vector<CheckResult>& results) {
    os << "check,pass,headline\n";
    for (const CheckResult& r : results) {
        os << r.id << "," << (r.pass ? 1 : 0) << ",";
        if (r.measured.contains("headline"))
            os << r.measured["headline"].dump();
        os << "\n";
    }
}

}  // namespace eulerctl
