#include "eulerctl/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eulerctl {

namespace {

double polyval(const std::vector<double>& p, double t) {
    double v = 0.0;
    for (size_t i = p.size(); i-- > 0;) v = v * t + p[i];
    return v;
}

std::vector<double> poly_add(const std::vector<double>& a,
                             const std::vector<double>& b) {
    std::vector<double> r(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

std::vector<double> poly_mul(const std::vector<double>& a,
                             const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

std::vector<double> poly_scale(std::vector<double> a, double s) {
    for (double& c : a) c *= s;
    return a;
}

std::vector<double> poly_derivative(const std::vector<double>& a) {
    if (a.size() <= 1) return {};
    std::vector<double> r(a.size() - 1);
    for (size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * static_cast<double>(i);
    return r;
}

void poly_trim(std::vector<double>& a) {
    while (!a.empty() && a.back() == 0.0) a.pop_back();
}

bool poly_is_zero(const std::vector<double>& a) {
    return std::all_of(a.begin(), a.end(), [](double c) { return c == 0.0; });
}

}  // namespace

ClosedFormFn ClosedFormFn::constant(double c) {
    return polynomial({c});
}

ClosedFormFn ClosedFormFn::polynomial(std::vector<double> coeffs) {
    ClosedFormFn f;
    Term t;
    t.poly = std::move(coeffs);
    f.add_term(std::move(t));
    return f;
}

ClosedFormFn ClosedFormFn::single(Term t) {
    ClosedFormFn f;
    f.add_term(std::move(t));
    return f;
}

void ClosedFormFn::add_term(Term t) {
    poly_trim(t.poly);
    if (t.poly.empty() || poly_is_zero(t.poly)) return;
    if (t.osc != Osc::None) {
        if (t.freq == 0.0) {
            if (t.osc == Osc::Sin) return;  // sin(0) = 0
            t.osc = Osc::None;              // cos(0) = 1
        } else if (t.freq < 0.0) {
            t.freq = -t.freq;
            if (t.osc == Osc::Sin) t.poly = poly_scale(std::move(t.poly), -1.0);
        }
    }
    if (t.osc == Osc::None) t.freq = 0.0;
    if (t.rate == 0.0) t.ref = 0.0;
    for (Term& u : terms_) {
        if (u.rate == t.rate && u.ref == t.ref && u.osc == t.osc && u.freq == t.freq) {
            u.poly = poly_add(u.poly, t.poly);
            poly_trim(u.poly);
            if (u.poly.empty()) {
                std::swap(u, terms_.back());
                terms_.pop_back();
            }
            return;
        }
    }
    terms_.push_back(std::move(t));
}

double ClosedFormFn::value(double t) const {
    double v = 0.0;
    for (const Term& u : terms_) {
        double part = polyval(u.poly, t);
        if (u.rate != 0.0) part *= std::exp(u.rate * (t - u.ref));
        if (u.osc == Osc::Sin)
            part *= std::sin(u.freq * t);
        else if (u.osc == Osc::Cos)
            part *= std::cos(u.freq * t);
        v += part;
    }
    return v;
}

ClosedFormFn ClosedFormFn::derivative() const {
    ClosedFormFn r;
    for (const Term& u : terms_) {
        // (p' + r p) e^{r (t - t0)} trig + p e^{r (t - t0)} trig'
        Term main = u;
        main.poly = poly_add(poly_derivative(u.poly), poly_scale(u.poly, u.rate));
        r.add_term(std::move(main));
        if (u.osc == Osc::Sin) {
            Term swing = u;
            swing.osc = Osc::Cos;
            swing.poly = poly_scale(u.poly, u.freq);
            r.add_term(std::move(swing));
        } else if (u.osc == Osc::Cos) {
            Term swing = u;
            swing.osc = Osc::Sin;
            swing.poly = poly_scale(u.poly, -u.freq);
            r.add_term(std::move(swing));
        }
    }
    return r;
}

ClosedFormFn& ClosedFormFn::operator+=(const ClosedFormFn& o) {
    for (const Term& t : o.terms_) add_term(t);
    return *this;
}

ClosedFormFn ClosedFormFn::operator+(const ClosedFormFn& o) const {
    ClosedFormFn r = *this;
    r += o;
    return r;
}

ClosedFormFn ClosedFormFn::operator-(const ClosedFormFn& o) const {
    return *this + o.scaled(-1.0);
}

ClosedFormFn ClosedFormFn::operator*(const ClosedFormFn& o) const {
    ClosedFormFn r;
    for (const Term& a : terms_)
        for (const Term& b : o.terms_) {
            Term base;
            base.poly = poly_mul(a.poly, b.poly);
            base.rate = a.rate + b.rate;
            if (base.rate != 0.0) {
                // Reference chosen so the correction factor is exactly 1.
                base.ref = (a.rate * a.ref + b.rate * b.ref) / base.rate;
            } else if (a.rate != 0.0) {
                // Rates cancel; the residue is the constant e^{r (b0 - a0)}.
                const double expo = a.rate * (b.ref - a.ref);
                const double factor = std::exp(expo);
                if (!std::isfinite(factor))
                    throw std::domain_error("closed-form product overflows");
                base.poly = poly_scale(std::move(base.poly), factor);
            }
            // Oscillation product table.
            if (a.osc == Osc::None && b.osc == Osc::None) {
                r.add_term(std::move(base));
                continue;
            }
            if (a.osc == Osc::None || b.osc == Osc::None) {
                const Term& osc_one = a.osc == Osc::None ? b : a;
                base.osc = osc_one.osc;
                base.freq = osc_one.freq;
                r.add_term(std::move(base));
                continue;
            }
            const double wp = a.freq + b.freq, wm = a.freq - b.freq;
            auto half = [&](Osc osc, double freq, double sign) {
                Term t = base;
                t.poly = poly_scale(t.poly, 0.5 * sign);
                t.osc = osc;
                t.freq = freq;
                r.add_term(std::move(t));
            };
            if (a.osc == Osc::Sin && b.osc == Osc::Sin) {
                half(Osc::Cos, wm, 1.0);
                half(Osc::Cos, wp, -1.0);
            } else if (a.osc == Osc::Cos && b.osc == Osc::Cos) {
                half(Osc::Cos, wm, 1.0);
                half(Osc::Cos, wp, 1.0);
            } else if (a.osc == Osc::Sin) {
                half(Osc::Sin, wp, 1.0);
                half(Osc::Sin, wm, 1.0);
            } else {
                half(Osc::Sin, wp, 1.0);
                half(Osc::Sin, wm, -1.0);
            }
        }
    return r;
}

ClosedFormFn ClosedFormFn::scaled(double s) const {
    ClosedFormFn r;
    if (s == 0.0) return r;
    for (Term t : terms_) {
        t.poly = poly_scale(std::move(t.poly), s);
        r.add_term(std::move(t));
    }
    return r;
}

double ClosedFormFn::max_frequency() const {
    double w = 0.0;
    for (const Term& t : terms_)
        if (t.osc != Osc::None) w = std::max(w, t.freq);
    return w;
}

double ClosedFormFn::max_rate() const {
    double r = 0.0;
    for (const Term& t : terms_) r = std::max(r, std::abs(t.rate));
    return r;
}

nlohmann::json ClosedFormFn::to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (const Term& t : terms_) {
        const char* osc = t.osc == Osc::None ? "none" : (t.osc == Osc::Sin ? "sin" : "cos");
        terms.push_back({{"poly", t.poly},
                         {"rate", t.rate},
                         {"ref", t.ref},
                         {"osc", osc},
                         {"freq", t.freq}});
    }
    return {{"terms", terms}};
}

ClosedFormFn ClosedFormFn::from_json(const nlohmann::json& j) {
    ClosedFormFn f;
    for (const auto& jt : j.at("terms")) {
        Term t;
        t.poly = jt.at("poly").get<std::vector<double>>();
        t.rate = jt.at("rate").get<double>();
        t.ref = jt.at("ref").get<double>();
        t.freq = jt.at("freq").get<double>();
        const std::string osc = jt.at("osc").get<std::string>();
        t.osc = osc == "none" ? Osc::None : (osc == "sin" ? Osc::Sin : Osc::Cos);
        f.add_term(std::move(t));
    }
    return f;
}

ControlSchedule::ControlSchedule(BasisPtr basis, std::vector<Field> actuators,
                                 std::vector<ClosedFormFn> coeffs, double horizon)
    : basis_(std::move(basis)),
      actuators_(std::move(actuators)),
      coeffs_(std::move(coeffs)),
      horizon_(horizon) {
    if (actuators_.size() != coeffs_.size())
        throw std::invalid_argument("schedule actuator/coefficient count mismatch");
    if (!(horizon_ > 0.0))
        throw std::invalid_argument("schedule horizon must be positive");
    actuator_matrix_.resize(basis_->size(), static_cast<Eigen::Index>(actuators_.size()));
    for (size_t i = 0; i < actuators_.size(); ++i) {
        if (!(actuators_[i].basis() == *basis_))
            throw std::invalid_argument("schedule actuator over a different basis");
        actuator_matrix_.col(static_cast<Eigen::Index>(i)) = actuators_[i].coeffs();
    }
}

ControlSchedule ControlSchedule::zero(BasisPtr basis, double horizon) {
    return ControlSchedule(std::move(basis), {}, {}, horizon);
}

Eigen::VectorXd ControlSchedule::coeff_values(double t) const {
    Eigen::VectorXd u(static_cast<Eigen::Index>(coeffs_.size()));
    for (size_t i = 0; i < coeffs_.size(); ++i)
        u[static_cast<Eigen::Index>(i)] = coeffs_[i].value(t);
    return u;
}

Field ControlSchedule::field_at(double t) const {
    Field f(basis_);
    if (size() > 0) f.coeffs() = actuator_matrix_ * coeff_values(t);
    return f;
}

void ControlSchedule::add_field_at(double t, Eigen::VectorXd& out) const {
    if (size() > 0) out.noalias() += actuator_matrix_ * coeff_values(t);
}

double ControlSchedule::max_frequency() const {
    double w = 0.0;
    for (const auto& c : coeffs_) w = std::max(w, c.max_frequency());
    return w;
}

double ControlSchedule::max_rate() const {
    double r = 0.0;
    for (const auto& c : coeffs_) r = std::max(r, c.max_rate());
    return r;
}

nlohmann::json ControlSchedule::to_json() const {
    nlohmann::json acts = nlohmann::json::array();
    for (const Field& f : actuators_) acts.push_back(f.to_json());
    nlohmann::json fns = nlohmann::json::array();
    for (const auto& c : coeffs_) fns.push_back(c.to_json());
    return {{"horizon", horizon_}, {"actuators", acts}, {"coeffs", fns}};
}

ControlSchedule ControlSchedule::from_json(const BasisPtr& basis,
                                           const nlohmann::json& j) {
    std::vector<Field> acts;
    for (const auto& ja : j.at("actuators")) acts.push_back(Field::from_json(basis, ja));
    std::vector<ClosedFormFn> fns;
    for (const auto& jc : j.at("coeffs")) fns.push_back(ClosedFormFn::from_json(jc));
    return ControlSchedule(basis, std::move(acts), std::move(fns),
                           j.at("horizon").get<double>());
}

}  // namespace eulerctl
