#include "eulerctl/synthesis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace eulerctl {

namespace {

constexpr double kPi = 3.14159265358979323846;

SimOptions endpoint_options(const SynthesisParams& p) {
    SimOptions opts;
    opts.dt = p.sim_dt;
    opts.blowup_bound = p.blowup;
    return opts;
}

double endpoint_error(const Field& y0, double horizon, const Forcing& f,
                      const ControlSchedule& c, const Field& ya,
                      const SynthesisParams& p, Field* out = nullptr) {
    Field yT = integrate_endpoint(y0, horizon, f, c, endpoint_options(p));
    double err = norm_H(yT - ya);
    if (out) *out = std::move(yT);
    return err;
}

// Least-squares coordinates in a fixed list of fields. Coordinates below
// roundoff are snapped to zero so that negligible components never drag
// their carrier frequencies into the integrator step rule.
class SpanSolver {
public:
    SpanSolver(const BasisPtr& basis, const std::vector<Field>& fields)
        : mat_(basis->size(), static_cast<Eigen::Index>(fields.size())) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (!(fields[i].basis() == *basis))
                throw std::invalid_argument("SpanSolver: basis mismatch");
            mat_.col(static_cast<Eigen::Index>(i)) = fields[i].coeffs();
        }
        qr_.compute(mat_);
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& target, double residual_tol,
                          const char* what) const {
        Eigen::VectorXd x = mat_.cols() > 0
                                ? Eigen::VectorXd(qr_.solve(target))
                                : Eigen::VectorXd::Zero(0).eval();
        if (x.size() > 0) {
            const double snap = 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
            for (Eigen::Index i = 0; i < x.size(); ++i)
                if (std::abs(x[i]) < snap) x[i] = 0.0;
        }
        const double scale = std::max(1.0, target.norm());
        const double residual = (mat_ * x - target).norm();
        if (!(residual <= residual_tol * scale)) {
            std::ostringstream msg;
            msg << what << " leaves the working span: residual " << residual
                << " over scale " << scale;
            throw std::runtime_error(msg.str());
        }
        return x;
    }

private:
    Eigen::MatrixXd mat_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

// Everything a bracket replacement needs, independent of (beta, K).
struct ReplacementPlan {
    BasisPtr basis;
    double horizon = 0.0;
    std::vector<Field> rest;
    std::vector<ClosedFormFn> rest_coeffs;
    bool trivial = false;  // bracket coefficient identically zero
    ClosedFormFn vn;       // coefficient against the normalized pair
    ClosedFormFn vn_dot;
    Field psi_hat, phi_hat;
    Field b_psi, b_phi;  // self-interactions of the normalized pair
    bool has_b_psi = false, has_b_phi = false;
    Eigen::VectorXd x_psi, x_phi, x_b;  // coordinates in `rest`
};

ReplacementPlan make_plan(const ControlSchedule& u,
                          const BracketProvenance& prov) {
    if (u.size() < 1)
        throw std::invalid_argument("imitation_step: empty schedule");
    require_same_basis(prov.psi, prov.phi);
    if (!(prov.psi.basis() == *u.basis_ptr()))
        throw std::invalid_argument("imitation_step: provenance basis mismatch");

    ReplacementPlan plan;
    plan.basis = u.basis_ptr();
    plan.horizon = u.horizon();
    plan.rest.assign(u.actuators().begin(), u.actuators().end() - 1);
    plan.rest_coeffs.assign(u.coeffs().begin(), u.coeffs().end() - 1);

    const double npsi = norm_H(prov.psi);
    const double nphi = norm_H(prov.phi);
    if (!(npsi > 0.0) || !(nphi > 0.0))
        throw std::invalid_argument("imitation_step: zero bracket factor");

    const Field& last = u.actuators().back();
    Field bracket = calB(prov.psi, prov.phi);
    if (norm_H(bracket - last) > 1e-8 * std::max(1.0, norm_H(last)))
        throw std::invalid_argument(
            "imitation_step: last actuator is not the bracket of the pair");

    plan.psi_hat = prov.psi * (1.0 / npsi);
    plan.phi_hat = prov.phi * (1.0 / nphi);

    const ClosedFormFn& vraw = u.coeffs().back();
    if (vraw.is_zero()) {
        plan.trivial = true;
        return plan;
    }
    // v(t) calB(psi) phi = (v |psi| |phi|) calB(psi_hat) phi_hat.
    plan.vn = vraw.scaled(npsi * nphi);
    plan.vn_dot = plan.vn.derivative();
    plan.b_psi = bilinear_B_self(plan.psi_hat);
    plan.b_phi = bilinear_B_self(plan.phi_hat);
    plan.has_b_psi = norm_H(plan.b_psi) > 1e-12;
    plan.has_b_phi = norm_H(plan.b_phi) > 1e-12;

    SpanSolver solver(plan.basis, plan.rest);
    plan.x_psi = solver.solve(plan.psi_hat.coeffs(), 1e-10, "psi factor");
    plan.x_phi = solver.solve(plan.phi_hat.coeffs(), 1e-10, "phi factor");
    plan.x_b = plan.has_b_psi
                   ? solver.solve(plan.b_psi.coeffs(), 1e-10, "B(psi, psi)")
                   : Eigen::VectorXd::Zero(
                         static_cast<Eigen::Index>(plan.rest.size()));
    return plan;
}

ClosedFormFn carrier(ClosedFormFn::Osc osc, double freq) {
    ClosedFormFn::Term t;
    t.poly = {1.0};
    t.osc = osc;
    t.freq = freq;
    return ClosedFormFn::single(t);
}

// Replacement force kappa1 / beta^2 - d/dt kappa2 over the kept actuators,
// with kappa1 = vn^2 B(psi_hat, psi_hat) and
// kappa2 = sqrt2 sin(wt) (vn psi_hat / beta - beta phi_hat), w = pi K / T.
ControlSchedule build_candidate(const ReplacementPlan& plan, double beta,
                                int K) {
    const double w = kPi * static_cast<double>(K) / plan.horizon;
    const double s2 = std::sqrt(2.0);
    ClosedFormFn coswt = carrier(ClosedFormFn::Osc::Cos, w);
    ClosedFormFn sinwt = carrier(ClosedFormFn::Osc::Sin, w);

    ClosedFormFn g_psi = (coswt * plan.vn).scaled(-s2 * w / beta) +
                         (sinwt * plan.vn_dot).scaled(-s2 / beta);
    ClosedFormFn g_phi = coswt.scaled(s2 * beta * w);
    ClosedFormFn g_b = plan.has_b_psi
                           ? (plan.vn * plan.vn).scaled(1.0 / (beta * beta))
                           : ClosedFormFn::zero();

    std::vector<ClosedFormFn> coeffs = plan.rest_coeffs;
    for (size_t i = 0; i < plan.rest.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (plan.x_psi[k] != 0.0) coeffs[i] += g_psi.scaled(plan.x_psi[k]);
        if (plan.x_phi[k] != 0.0) coeffs[i] += g_phi.scaled(plan.x_phi[k]);
        if (plan.has_b_psi && plan.x_b[k] != 0.0)
            coeffs[i] += g_b.scaled(plan.x_b[k]);
    }
    return {plan.basis, plan.rest, std::move(coeffs), plan.horizon};
}

// The original schedule plus the pure drift -beta^2 B(phi_hat, phi_hat):
// the intermediate force both gaps are measured against.
ControlSchedule build_comparator(const ControlSchedule& u,
                                 const ReplacementPlan& plan, double beta) {
    std::vector<Field> acts = u.actuators();
    std::vector<ClosedFormFn> coeffs = u.coeffs();
    acts.push_back(plan.b_phi);
    coeffs.push_back(ClosedFormFn::constant(-beta * beta));
    return {plan.basis, std::move(acts), std::move(coeffs), plan.horizon};
}

int carrier_K(int base, int doubling) {
    const long long k = static_cast<long long>(base) << doubling;
    return static_cast<int>(std::min<long long>(k, 1LL << 30));
}

// Base of the carrier schedule for one replacement. Earlier replacements
// leave their own carriers inside the kept coefficients; a new carrier
// only averages cleanly when it runs well above all of them, so the
// schedule starts at twice the fastest oscillation present. The base is
// the exact ceiling, not a power of two: every later carrier rides on
// this one, so any slack here compounds through the remaining steps.
int carrier_base(const SynthesisParams& p, const Forcing& f,
                 const ControlSchedule& u) {
    const double w_have = std::max(f.max_frequency(), u.max_frequency());
    int base = p.k0;
    if (w_have > 0.0) {
        const double need = 2.0 * w_have * u.horizon() / kPi;
        if (need > static_cast<double>(1 << 29)) return 1 << 29;
        base = std::max(base, static_cast<int>(std::ceil(need)));
    }
    return base;
}

}  // namespace

nlohmann::json StageReport::to_json() const {
    return {{"stage", stage},
            {"pass", pass},
            {"error", error},
            {"budget", budget},
            {"details", details.is_null() ? nlohmann::json::object() : details}};
}

int choose_M(const Field& y0, const Field& ya, const Forcing& f, double eps,
             double horizon, double sbar, StageReport* report) {
    require_same_basis(y0, ya);
    if (!(f.basis_ptr() && *f.basis_ptr() == y0.basis()))
        throw std::invalid_argument("choose_M: forcing basis mismatch");
    if (!(eps > 0.0)) throw std::invalid_argument("choose_M: eps must be > 0");
    if (!(horizon > 0.0))
        throw std::invalid_argument("choose_M: horizon must be > 0");
    if (!(sbar > 0.0 && sbar < 0.5))
        throw std::invalid_argument("choose_M: sbar must lie in (0, 1/2)");

    const int D = y0.size();
    const double decay = std::exp(-3.0 * horizon);
    const double slice = eps * eps / 20.0;
    const double thr_y0 = slice * decay;
    const double thr_ya = slice;
    const double thr_f = slice * decay;

    for (int M = 1; M <= D; ++M) {
        const double tail_y0 = y0.coeffs().tail(D - M).squaredNorm();
        if (!(tail_y0 < thr_y0)) continue;
        const double tail_ya = ya.coeffs().tail(D - M).squaredNorm();
        if (!(tail_ya < thr_ya)) continue;
        const double tail_f = f.tail_l2_norm_sq(horizon, M);
        if (!(tail_f < thr_f)) continue;
        if (report) {
            report->stage = "choose_M";
            report->pass = true;
            report->error = 0.0;
            report->budget = 0.0;
            report->details = {{"M", M},
                               {"sbar", sbar},
                               {"eps", eps},
                               {"horizon", horizon},
                               {"tail_y0_sq", tail_y0},
                               {"tail_ya_sq", tail_ya},
                               {"tail_f_sq", tail_f},
                               {"threshold_y0_sq", thr_y0},
                               {"threshold_ya_sq", thr_ya},
                               {"threshold_f_sq", thr_f}};
        }
        return M;
    }
    std::ostringstream msg;
    msg << "choose_M: no head dimension within the cutoff space (D = " << D
        << ") meets the tail thresholds for eps = " << eps;
    throw CutoffTooSmallError(msg.str());
}

UMSelection build_UM(int M, const SaturationResult& sat, double rho) {
    const BasisPtr& basis = sat.space.basis_ptr();
    const int D = basis->size();
    if (M < 1 || M > D)
        throw std::invalid_argument("build_UM: M outside the cutoff space");
    if (!(rho >= 0.0)) throw std::invalid_argument("build_UM: rho must be >= 0");

    nlohmann::json trail = nlohmann::json::array();
    double best_defect = std::numeric_limits<double>::infinity();
    for (int j = 0; j < static_cast<int>(sat.levels.size()); ++j) {
        const int dim_j = sat.level_dim(j);
        Eigen::MatrixXd frame = sat.space.frame_prefix(dim_j);
        // Column i is the orthogonal projection of eigenfield e_i.
        Eigen::MatrixXd approx = frame * frame.topRows(M).transpose();
        double worst_residual = 0.0;
        for (int i = 0; i < M; ++i) {
            Eigen::VectorXd r = approx.col(i);
            r[i] -= 1.0;
            worst_residual = std::max(worst_residual, r.norm());
        }
        nlohmann::json entry = {{"level", j},
                                {"dim", dim_j},
                                {"worst_residual", worst_residual}};

        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_qr(approx);
        rank_qr.setThreshold(1e-10);
        if (rank_qr.rank() < M) {
            entry["full_rank"] = false;
            trail.push_back(entry);
            continue;
        }
        entry["full_rank"] = true;

        Eigen::HouseholderQR<Eigen::MatrixXd> qr(approx);
        Eigen::MatrixXd picks =
            qr.householderQ() * Eigen::MatrixXd::Identity(D, M);
        for (int i = 0; i < M; ++i)
            if (qr.matrixQR()(i, i) < 0.0) picks.col(i) = -picks.col(i);

        std::vector<Field> fields;
        fields.reserve(static_cast<size_t>(M));
        for (int i = 0; i < M; ++i) fields.emplace_back(basis, picks.col(i));

        try {
            ObliqueProjector proj = ObliqueProjector::along_tail(basis, fields);
            const double defect = proj.head_defect(M);
            best_defect = std::min(best_defect, defect);
            entry["defect"] = defect;
            entry["condition"] = proj.condition();
            trail.push_back(entry);
            if (defect < rho) {
                UMSelection sel{j, std::move(fields), defect, rho, {}};
                sel.report.stage = "build_UM";
                sel.report.pass = true;
                sel.report.error = defect;
                sel.report.budget = rho;
                sel.report.details = {{"M", M},
                                      {"jbar", j},
                                      {"rho", rho},
                                      {"defect", defect},
                                      {"condition", proj.condition()},
                                      {"levels", trail}};
                return sel;
            }
        } catch (const DegenerateSumError& e) {
            entry["degenerate_condition"] = e.condition;
            trail.push_back(entry);
        }
    }
    std::ostringstream msg;
    msg << "build_UM: projected head defect never fell under rho = " << rho
        << " (best " << best_defect << " across "
        << sat.levels.size() << " levels)";
    if (rho == 0.0)
        msg << "; rho = 0 is unreachable under the strict comparison";
    throw SaturationNeededError(msg.str());
}

StageAResult stage_A(const Field& y0, const Field& ya, const Forcing& f,
                     double eps, double horizon, const std::vector<Field>& um,
                     const SynthesisParams& params) {
    require_same_basis(y0, ya);
    if (um.empty())
        throw std::invalid_argument("stage_A: empty fictitious actuator set");
    if (f.kind() == Forcing::Kind::Sampled)
        throw std::invalid_argument(
            "stage_A: closed-form forcing required for the drift control");
    if (!(eps > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("stage_A: eps and horizon must be > 0");
    const BasisPtr& basis = y0.basis_ptr();
    for (const Field& g : um)
        if (!(g.basis() == *basis))
            throw std::invalid_argument("stage_A: actuator basis mismatch");

    const int M = static_cast<int>(um.size());
    const double T = horizon;
    const double budget = 0.5 * eps;

    ObliqueProjector proj = ObliqueProjector::along_tail(basis, um);
    Eigen::VectorXd v0 = proj.coords(y0.coeffs());
    Eigen::VectorXd va = proj.coords(ya.coeffs());

    const ControlSchedule* drive = f.schedule();
    std::vector<Eigen::VectorXd> drive_coords;
    if (f.kind() == Forcing::Kind::ClosedForm && drive) {
        drive_coords.reserve(static_cast<size_t>(drive->size()));
        for (int k = 0; k < drive->size(); ++k)
            drive_coords.push_back(proj.coords(drive->actuators()
                                                   [static_cast<size_t>(k)]
                                                       .coeffs()));
    }

    nlohmann::json trail = nlohmann::json::array();
    std::optional<ControlSchedule> accepted;
    std::optional<ControlSchedule> best;
    double best_err = std::numeric_limits<double>::infinity();
    double best_mu = 0.0;
    double used_mu = 0.0;

    for (int k = 0; k <= params.mu_doublings; ++k) {
        const double mu = params.mu0 * std::ldexp(1.0, k);
        // Shoulders (1 - t/T) e^{-mu t} and (t/T) e^{mu (t - T)}: the ramp
        // interpolates P y0 at t = 0 with P ya at t = T.
        ClosedFormFn::Term ta{{1.0, -1.0 / T}, -mu, 0.0,
                              ClosedFormFn::Osc::None, 0.0};
        ClosedFormFn::Term tb{{0.0, 1.0 / T}, mu, T, ClosedFormFn::Osc::None,
                              0.0};
        ClosedFormFn da = ClosedFormFn::single(ta).derivative();
        ClosedFormFn db = ClosedFormFn::single(tb).derivative();

        std::vector<ClosedFormFn> coeffs;
        coeffs.reserve(static_cast<size_t>(M));
        for (int j = 0; j < M; ++j) {
            ClosedFormFn c = da.scaled(v0[j]) + db.scaled(va[j]);
            for (size_t q = 0; q < drive_coords.size(); ++q)
                c += drive->coeffs()[q].scaled(-drive_coords[q][j]);
            coeffs.push_back(std::move(c));
        }
        ControlSchedule u(basis, um, coeffs, T);
        double err;
        try {
            err = endpoint_error(y0, T, f, u, ya, params);
        } catch (const BlowupError&) {
            // A faster decay rate weakens the transit, so keep doubling.
            trail.push_back({{"mu", mu}, {"blowup", true}});
            continue;
        }
        trail.push_back({{"mu", mu}, {"error", err}});
        if (err < best_err) {
            best_err = err;
            best_mu = mu;
            best = u;
        }
        if (err <= budget) {
            accepted = std::move(u);
            used_mu = mu;
            break;
        }
    }

    const bool pass = accepted.has_value();
    const double mu_final = pass ? used_mu : best_mu;
    const double err_final = pass ? trail.back().at("error").get<double>()
                                  : best_err;

    StageAResult result{pass ? *std::move(accepted) : *std::move(best),
                        {}, mu_final, err_final};
    result.report.stage = "stage_A";
    result.report.pass = pass;
    result.report.error = err_final;
    result.report.budget = budget;
    nlohmann::json details = {{"M", M},
                              {"mu", mu_final},
                              {"defect", proj.head_defect(M)},
                              {"projector_norm", op_norm(proj.matrix())},
                              {"condition", proj.condition()},
                              {"mu_trail", trail}};
    if (params.log_proof_conditions) {
        // Sufficient decay-rate inequalities; the acceptance above is by the
        // simulated endpoint, these are logged for the record.
        const double cb = measure_Cb(basis, 64, 0xC0FFEEULL);
        const double op = op_norm(proj.matrix());
        const int D = basis->size();
        Eigen::VectorXd h0 = y0.coeffs();
        Eigen::VectorXd ha = ya.coeffs();
        if (M < D) {
            h0.tail(D - M).setZero();
            ha.tail(D - M).setZero();
        }
        Field y0_head(basis, h0), ya_head(basis, ha);
        const double c10 = c1_bound(y0_head);
        const double c1a = c1_bound(ya_head);
        const double lhs_ramp = 2.0 * cb * op * (c10 + c1a) / mu_final;
        const double lhs_energy = 2.0 * cb * cb * std::pow(op, 4) *
                                  (h0.squaredNorm() + ha.squaredNorm()) *
                                  (c10 * c10 + c1a * c1a) / mu_final;
        const double rhs_energy =
            eps * eps / 20.0 * std::exp(-3.0 * T);
        details["proof_conditions"] = {
            {"C_b", cb},
            {"ramp_lhs", lhs_ramp},
            {"ramp_rhs", T},
            {"ramp_holds", lhs_ramp <= T},
            {"energy_lhs", lhs_energy},
            {"energy_rhs", rhs_energy},
            {"energy_holds", lhs_energy <= rhs_energy}};
    }
    result.report.details = std::move(details);
    return result;
}

ImitationResult imitation_step(const Field& y0, const Field& ya,
                               const Forcing& f, const ControlSchedule& u,
                               const BracketProvenance& prov, double budget,
                               const SynthesisParams& params) {
    if (!(budget > 0.0))
        throw std::invalid_argument("imitation_step: budget must be > 0");
    ReplacementPlan plan = make_plan(u, prov);
    const double T = plan.horizon;

    Field y_in;
    const double err_in = endpoint_error(y0, T, f, u, ya, params, &y_in);

    if (plan.trivial) {
        ControlSchedule out(plan.basis, plan.rest, plan.rest_coeffs, T);
        ImitationResult res{std::move(out), {}};
        res.report.stage = "imitation_step";
        res.report.pass = true;
        res.report.error = 0.0;
        res.report.budget = budget;
        res.report.details = {{"trivial", true},
                              {"error_in", err_in},
                              {"error_out", err_in},
                              {"comparator_gap", 0.0},
                              {"endpoint_gap", 0.0}};
        return res;
    }

    nlohmann::json trail = nlohmann::json::array();

    // A bracket term whose removal already fits the budget needs no carrier
    // at all, and skipping one keeps every later carrier slower.
    {
        ControlSchedule dropped(plan.basis, plan.rest, plan.rest_coeffs, T);
        try {
            Field y_out;
            const double err_out =
                endpoint_error(y0, T, f, dropped, ya, params, &y_out);
            trail.push_back({{"dropped", true}, {"error", err_out}});
            if (err_out - err_in <= budget) {
                ImitationResult res{std::move(dropped), {}};
                res.report.stage = "imitation_step";
                res.report.pass = true;
                res.report.error = err_out - err_in;
                res.report.budget = budget;
                res.report.details = {{"dropped", true},
                                      {"error_in", err_in},
                                      {"error_out", err_out},
                                      {"comparator_gap", 0.0},
                                      {"endpoint_gap", norm_H(y_out - y_in)},
                                      {"trail", trail}};
                return res;
            }
        } catch (const BlowupError&) {
            trail.push_back({{"dropped", true}, {"blowup", true}});
        }
    }

    std::optional<ControlSchedule> best;
    double best_err = std::numeric_limits<double>::infinity();
    double best_beta = 0.0, best_gap1 = 0.0, best_gap2 = 0.0;
    int best_K = 0;
    const int k_base = carrier_base(params, f, u);

    for (int bk = 0; bk <= params.beta_halvings; ++bk) {
        const double beta = params.beta0 * std::ldexp(1.0, -bk);
        Field y_mid = y_in;
        double gap1 = 0.0;
        if (plan.has_b_phi) {
            ControlSchedule comparator = build_comparator(u, plan, beta);
            try {
                y_mid = integrate_endpoint(y0, T, f, comparator,
                                           endpoint_options(params));
            } catch (const BlowupError&) {
                // A guard trip disqualifies this beta, nothing more.
                trail.push_back({{"beta", beta}, {"blowup", true}});
                continue;
            }
            gap1 = norm_H(y_mid - y_in);
        }
        trail.push_back({{"beta", beta}, {"comparator_gap", gap1}});
        if (gap1 > params.hb_fraction * budget) continue;

        for (int ki = 0; ki <= params.k_doublings; ++ki) {
            const int K = carrier_K(k_base, ki);
            ControlSchedule candidate = build_candidate(plan, beta, K);
            Field y_out;
            double err_out;
            try {
                err_out = endpoint_error(y0, T, f, candidate, ya, params,
                                         &y_out);
            } catch (const BlowupError&) {
                // Too slow a carrier for the amplitude; a faster one may
                // still average out, so keep doubling.
                trail.push_back(
                    {{"beta", beta}, {"K", K}, {"blowup", true}});
                continue;
            }
            const double gap2 = norm_H(y_out - y_mid);
            trail.push_back({{"beta", beta},
                             {"K", K},
                             {"error", err_out},
                             {"endpoint_gap", gap2}});
            if (err_out < best_err) {
                best_err = err_out;
                best = candidate;
                best_beta = beta;
                best_K = K;
                best_gap1 = gap1;
                best_gap2 = gap2;
            }
            if (err_out - err_in <= budget) {
                ImitationResult res{std::move(candidate), {}};
                res.report.stage = "imitation_step";
                res.report.pass = true;
                res.report.error = err_out - err_in;
                res.report.budget = budget;
                res.report.details = {{"beta", beta},
                                      {"K", K},
                                      {"error_in", err_in},
                                      {"error_out", err_out},
                                      {"comparator_gap", gap1},
                                      {"endpoint_gap", gap2},
                                      {"trail", trail}};
                return res;
            }
        }
    }

    ControlSchedule fallback =
        best ? *best : ControlSchedule(plan.basis, plan.rest, plan.rest_coeffs, T);
    ImitationResult res{std::move(fallback), {}};
    res.report.stage = "imitation_step";
    res.report.pass = false;
    res.report.error = best_err - err_in;
    res.report.budget = budget;
    res.report.details = {{"beta", best_beta},
                          {"K", best_K},
                          {"error_in", err_in},
                          {"error_out", best_err},
                          {"comparator_gap", best_gap1},
                          {"endpoint_gap", best_gap2},
                          {"exhausted", true},
                          {"trail", trail}};
    return res;
}

std::vector<SweepPoint> imitation_K_sweep(const Field& y0, const Field& ya,
                                          const Forcing& f,
                                          const ControlSchedule& u,
                                          const BracketProvenance& prov,
                                          double beta,
                                          const SynthesisParams& params) {
    if (!(beta > 0.0))
        throw std::invalid_argument("imitation_K_sweep: beta must be > 0");
    ReplacementPlan plan = make_plan(u, prov);
    if (plan.trivial) return {};
    const double T = plan.horizon;

    Field y_in;
    endpoint_error(y0, T, f, u, ya, params, &y_in);
    Field y_mid = y_in;
    if (plan.has_b_phi) {
        ControlSchedule comparator = build_comparator(u, plan, beta);
        y_mid =
            integrate_endpoint(y0, T, f, comparator, endpoint_options(params));
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<SweepPoint> points;
    points.reserve(static_cast<size_t>(params.k_doublings) + 1);
    const int k_base = carrier_base(params, f, u);
    for (int ki = 0; ki <= params.k_doublings; ++ki) {
        const int K = carrier_K(k_base, ki);
        ControlSchedule candidate = build_candidate(plan, beta, K);
        Field y_out;
        try {
            const double err =
                endpoint_error(y0, T, f, candidate, ya, params, &y_out);
            points.push_back({K, norm_H(y_out - y_mid), err});
        } catch (const BlowupError&) {
            // Slope fits skip non-finite points.
            points.push_back({K, nan, nan});
        }
    }
    return points;
}

double span_residual(const ControlSchedule& c, const std::vector<Field>& fields,
                     int samples) {
    if (samples < 2)
        throw std::invalid_argument("span_residual: need at least 2 samples");
    const int D = c.basis_ptr()->size();
    Eigen::MatrixXd ortho;
    if (!fields.empty()) {
        Eigen::MatrixXd mat(D, static_cast<Eigen::Index>(fields.size()));
        for (size_t i = 0; i < fields.size(); ++i) {
            if (!(fields[i].basis() == *c.basis_ptr()))
                throw std::invalid_argument("span_residual: basis mismatch");
            mat.col(static_cast<Eigen::Index>(i)) = fields[i].coeffs();
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mat);
        const Eigen::Index rank = qr.rank();
        ortho = qr.householderQ() * Eigen::MatrixXd::Identity(D, rank);
    }
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = c.horizon() * i / (samples - 1);
        Eigen::VectorXd w = c.field_at(t).coeffs();
        if (ortho.cols() > 0) w -= ortho * (ortho.transpose() * w);
        worst = std::max(worst, w.norm());
    }
    return worst;
}

namespace {

// Final integration with series sampling sized for reporting.
Trajectory verified_run(const Field& y0, double horizon, const Forcing& f,
                        const ControlSchedule& c, const SynthesisParams& p) {
    SimOptions opts = endpoint_options(p);
    const double h = effective_step(horizon, opts, f, c);
    const auto steps = static_cast<long long>(std::llround(horizon / h));
    opts.series_stride = static_cast<int>(std::max(1LL, steps / 4096));
    opts.snapshot_stride = static_cast<int>(std::max(1LL, steps / 16));
    return integrate(y0, horizon, f, c, opts);
}

}  // namespace

PipelineResult full_pipeline(const Field& y0, const Field& ya, const Forcing& f,
                             double eps, const std::vector<Field>& generators,
                             double horizon, const SynthesisParams& params) {
    require_same_basis(y0, ya);
    if (!(eps > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("full_pipeline: eps and horizon must be > 0");
    if (generators.empty())
        throw std::invalid_argument("full_pipeline: no generators");
    const BasisPtr& basis = y0.basis_ptr();

    nlohmann::json stages = nlohmann::json::array();
    auto assemble = [&](ControlSchedule control, std::vector<Field> actuators,
                        bool ok, nlohmann::json extra) -> PipelineResult {
        Trajectory traj = verified_run(y0, horizon, f, control, params);
        const double final_error = norm_H(traj.final_state() - ya);
        const double residual = span_residual(control, actuators, 201);
        const bool pass = ok && final_error <= eps;
        nlohmann::json report = std::move(extra);
        report["stages"] = stages;
        report["eps"] = eps;
        report["horizon"] = horizon;
        report["final_error"] = final_error;
        report["admissibility_residual"] = residual;
        report["pass"] = pass;
        return {std::move(control), std::move(actuators), final_error,
                eps,                pass,                 std::move(traj),
                std::move(report)};
    };

    // Free flow first: within eps already means the zero control wins.
    ControlSchedule rest = ControlSchedule::zero(basis, horizon);
    const double err_free = endpoint_error(y0, horizon, f, rest, ya, params);
    stages.push_back({{"stage", "free_flow"},
                      {"pass", err_free <= eps},
                      {"error", err_free},
                      {"budget", eps},
                      {"details", nlohmann::json::object()}});
    if (err_free <= eps)
        return assemble(rest, {}, true, {{"short_circuit", true}});

    SaturationOptions sat_opts;
    sat_opts.tol = params.span_tol;
    SaturationResult sat = run_saturation(basis, generators, sat_opts);
    stages.push_back({{"stage", "saturation"},
                      {"pass", true},
                      {"error", 0.0},
                      {"budget", 0.0},
                      {"details", sat.report()}});
    std::vector<Field> actuators =
        actuator_set(basis, generators, params.span_tol);

    StageReport report_m;
    const int M = choose_M(y0, ya, f, eps, horizon, params.sbar, &report_m);
    stages.push_back(report_m.to_json());

    const double rho = std::sqrt(eps * eps / 40.0 * std::exp(-3.0 * horizon)) /
                       std::sqrt(1.0 + f.l2_norm_sq(horizon));
    UMSelection sel = build_UM(M, sat, rho);
    stages.push_back(sel.report.to_json());
    const int jbar = sel.jbar;

    StageAResult stage_a =
        stage_A(y0, ya, f, eps, horizon, sel.actuators, params);
    stages.push_back(stage_a.report.to_json());

    nlohmann::json ledger = {{"stage_A_budget", 0.5 * eps}};
    if (!stage_a.report.pass) {
        ledger["levels"] = nlohmann::json::array();
        return assemble(stage_a.control, actuators, false,
                        {{"short_circuit", false},
                         {"M", M},
                         {"jbar", jbar},
                         {"rho", rho},
                         {"failed_stage", "stage_A"},
                         {"ledger", ledger}});
    }

    if (jbar == 0) {
        // The fictitious actuators already sit inside the generator span, so
        // the drift control is the final one.
        ledger["levels"] = nlohmann::json::array();
        ledger["step_budget_total"] = 0.0;
        ledger["grand_total"] = 0.5 * eps;
        return assemble(stage_a.control, actuators, true,
                        {{"short_circuit", false},
                         {"M", M},
                         {"jbar", 0},
                         {"rho", rho},
                         {"ledger", ledger}});
    }

    // Working actuator list: the physical set, then every saturation bracket
    // that extends it, level by level. The control starts over this list and
    // sheds the brackets from the back.
    Subspace working(basis);
    std::vector<Field> wfields;
    std::vector<int> wlevel;
    std::vector<std::array<int, 2>> wpair;
    for (const Field& g : actuators) {
        if (span_extend(working, g, {Origin::Kind::Generator, -1, -1},
                        params.span_tol) != ExtendResult::Added)
            throw std::logic_error("full_pipeline: dependent physical actuator");
        wfields.push_back(g);
        wlevel.push_back(0);
        wpair.push_back({-1, -1});
    }
    for (int j = 1; j <= jbar; ++j) {
        for (int e = sat.level_dim(j - 1); e < sat.level_dim(j); ++e) {
            const Origin& origin = sat.space.origins()[static_cast<size_t>(e)];
            const Field& elem = sat.space.elements()[static_cast<size_t>(e)];
            if (span_extend(working, elem, origin, params.span_tol) ==
                ExtendResult::Added) {
                wfields.push_back(elem);
                wlevel.push_back(j);
                wpair.push_back({origin.psi, origin.phi});
            }
        }
    }

    // Rewrite the drift control over the working list.
    SpanSolver working_solver(basis, wfields);
    std::vector<ClosedFormFn> wcoeffs(wfields.size());
    for (size_t i = 0; i < sel.actuators.size(); ++i) {
        Eigen::VectorXd x = working_solver.solve(sel.actuators[i].coeffs(),
                                                 1e-9, "fictitious actuator");
        for (size_t k = 0; k < wfields.size(); ++k) {
            const auto ki = static_cast<Eigen::Index>(k);
            if (x[ki] != 0.0)
                wcoeffs[k] += stage_a.control.coeffs()[i].scaled(x[ki]);
        }
    }
    ControlSchedule current(basis, wfields, wcoeffs, horizon);

    nlohmann::json levels_log = nlohmann::json::array();
    nlohmann::json steps_log = nlohmann::json::array();
    double step_budget_total = 0.0;
    double last_error = stage_a.error;
    bool ok = true;
    for (int j = jbar; j >= 1 && ok; --j) {
        const int nj = static_cast<int>(
            std::count(wlevel.begin(), wlevel.end(), j));
        if (nj == 0) {
            levels_log.push_back({{"level", j}, {"steps", 0}});
            continue;
        }
        const double step_budget = eps / (2.0 * nj * jbar);
        for (int s = 0; s < nj && ok; ++s) {
            const int idx = current.size() - 1;
            const auto& pair = wpair[static_cast<size_t>(idx)];
            BracketProvenance prov{
                sat.space.elements()[static_cast<size_t>(pair[0])],
                sat.space.elements()[static_cast<size_t>(pair[1])]};
            ImitationResult step =
                imitation_step(y0, ya, f, current, prov, step_budget, params);
            steps_log.push_back(step.report.to_json());
            step_budget_total += step_budget;
            current = std::move(step.control);
            last_error = step.report.details.at("error_out").get<double>();
            ok = step.report.pass;
        }
        const double allowance =
            (2.0 * jbar - (j - 1)) / (2.0 * jbar) * eps;
        levels_log.push_back({{"level", j},
                              {"steps", nj},
                              {"per_step_budget", step_budget},
                              {"error_after", last_error},
                              {"allowance_after", allowance},
                              {"within_allowance", last_error <= allowance}});
    }
    ledger["levels"] = levels_log;
    ledger["step_budget_total"] = step_budget_total;
    ledger["grand_total"] = 0.5 * eps + step_budget_total;

    if (ok && current.size() != static_cast<int>(actuators.size()))
        throw std::logic_error("full_pipeline: descent left extra actuators");

    nlohmann::json extra = {{"short_circuit", false},
                            {"M", M},
                            {"jbar", jbar},
                            {"rho", rho},
                            {"steps", steps_log},
                            {"ledger", ledger}};
    if (!ok) extra["failed_stage"] = "imitation_step";
    return assemble(std::move(current), std::move(actuators), ok,
                    std::move(extra));
}

nlohmann::json synthesis_artifact(const DomainSpec& domain, int cutoff,
                                  const Field& y0, const Field& ya,
                                  const Forcing& f, const PipelineResult& result,
                                  const SynthesisParams& params) {
    nlohmann::json acts = nlohmann::json::array();
    for (const Field& a : result.actuators) acts.push_back(a.to_json());
    return {{"kind", "synthesis_artifact"},
            {"domain", domain.to_json()},
            {"cutoff", cutoff},
            {"horizon", result.control.horizon()},
            {"eps", result.eps},
            {"sim_dt", params.sim_dt},
            {"blowup", params.blowup},
            {"y0", y0.to_json()},
            {"ya", ya.to_json()},
            {"forcing", f.to_json()},
            {"control", result.control.to_json()},
            {"actuators", acts},
            {"final_error", result.final_error},
            {"pass", result.pass},
            {"report", result.report}};
}

ReplayResult replay_artifact(const nlohmann::json& artifact) {
    if (!artifact.is_object() ||
        artifact.value("kind", std::string{}) != "synthesis_artifact")
        throw std::invalid_argument("replay: not a synthesis artifact");
    BasisPtr basis = make_basis(DomainSpec::from_json(artifact.at("domain")),
                                artifact.at("cutoff").get<int>());
    Field y0 = Field::from_json(basis, artifact.at("y0"));
    Field ya = Field::from_json(basis, artifact.at("ya"));
    Forcing f = Forcing::from_json(basis, artifact.at("forcing"));
    ControlSchedule control =
        ControlSchedule::from_json(basis, artifact.at("control"));
    SimOptions opts;
    opts.dt = artifact.at("sim_dt").get<double>();
    opts.blowup_bound = artifact.at("blowup").get<double>();
    Field yT = integrate_endpoint(y0, artifact.at("horizon").get<double>(), f,
                                  control, opts);
    ReplayResult r;
    r.replayed_error = norm_H(yT - ya);
    r.logged_error = artifact.at("final_error").get<double>();
    r.match = std::abs(r.replayed_error - r.logged_error) <= 1e-10;
    return r;
}

}  // namespace eulerctl
