#pragma once

#include "eulerctl/field.hpp"

namespace eulerctl {

// Closed-form time coefficient: a sum of terms p(t) e^{r (t - t0)} trig(w t).
// The family is closed under sum, product and differentiation, which is
// exactly what the oscillatory control replacements generate. The exponential
// reference t0 keeps every evaluation scaled like the values on the horizon
// even when rates are large; products combine references so that no spurious
// e^{r T} factor ever materializes.
class ClosedFormFn {
public:
    enum class Osc : std::uint8_t { None = 0, Sin = 1, Cos = 2 };

    struct Term {
        std::vector<double> poly;  // p(t) = sum poly[i] t^i
        double rate = 0.0;
        double ref = 0.0;  // e^{rate (t - ref)}
        Osc osc = Osc::None;
        double freq = 0.0;  // trig(freq t); freq > 0 unless osc == None
    };

    ClosedFormFn() = default;

    static ClosedFormFn zero() { return {}; }
    static ClosedFormFn constant(double c);
    static ClosedFormFn polynomial(std::vector<double> coeffs);
    static ClosedFormFn single(Term t);

    bool is_zero() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    double value(double t) const;
    ClosedFormFn derivative() const;

    ClosedFormFn& operator+=(const ClosedFormFn& o);
    ClosedFormFn operator+(const ClosedFormFn& o) const;
    ClosedFormFn operator-(const ClosedFormFn& o) const;
    ClosedFormFn operator*(const ClosedFormFn& o) const;
    ClosedFormFn scaled(double s) const;

    double max_frequency() const;
    double max_rate() const;  // max |rate|

    nlohmann::json to_json() const;
    static ClosedFormFn from_json(const nlohmann::json& j);

private:
    void add_term(Term t);  // canonicalizes and merges
    std::vector<Term> terms_;
};

// Control schedule: a list of actuator fields with closed-form coefficients,
// c(t) = sum_i u_i(t) F_i on a fixed horizon.
class ControlSchedule {
public:
    ControlSchedule(BasisPtr basis, std::vector<Field> actuators,
                    std::vector<ClosedFormFn> coeffs, double horizon);
    static ControlSchedule zero(BasisPtr basis, double horizon);

    const BasisPtr& basis_ptr() const { return basis_; }
    double horizon() const { return horizon_; }
    int size() const { return static_cast<int>(actuators_.size()); }
    const std::vector<Field>& actuators() const { return actuators_; }
    const std::vector<ClosedFormFn>& coeffs() const { return coeffs_; }

    Eigen::VectorXd coeff_values(double t) const;
    Field field_at(double t) const;
    void add_field_at(double t, Eigen::VectorXd& out) const;  // out += c(t)

    double max_frequency() const;
    double max_rate() const;

    nlohmann::json to_json() const;
    static ControlSchedule from_json(const BasisPtr& basis, const nlohmann::json& j);

private:
    BasisPtr basis_;
    std::vector<Field> actuators_;
    std::vector<ClosedFormFn> coeffs_;
    double horizon_ = 0.0;
    Eigen::MatrixXd actuator_matrix_;  // D x m, cached for evaluation
};

}  // namespace eulerctl
