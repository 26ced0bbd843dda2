#include "eulerctl/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eulerctl/quadrature.hpp"

namespace eulerctl {

Forcing::Forcing(BasisPtr basis) : basis_(std::move(basis)) {
    if (!basis_) throw std::invalid_argument("forcing needs a basis");
}

Forcing Forcing::zero(BasisPtr basis) {
    return Forcing(std::move(basis));
}

Forcing Forcing::closed_form(ControlSchedule schedule) {
    Forcing f(schedule.basis_ptr());
    f.kind_ = Kind::ClosedForm;
    f.schedule_ = std::move(schedule);
    return f;
}

Forcing Forcing::constant(Field value) {
    ControlSchedule sched(value.basis_ptr(), {value}, {ClosedFormFn::constant(1.0)},
                          1.0);
    return closed_form(std::move(sched));
}

Forcing Forcing::sampled(BasisPtr basis, std::vector<double> times,
                         std::vector<Eigen::VectorXd> values) {
    Forcing f(std::move(basis));
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("sampled forcing needs >= 2 matched samples");
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("sampled forcing grid must increase");
    const auto dim = static_cast<Eigen::Index>(f.basis_->size());
    for (const auto& v : values)
        if (v.size() != dim)
            throw std::invalid_argument("sampled forcing value has wrong dimension");
    f.kind_ = Kind::Sampled;
    f.times_ = std::move(times);
    f.values_ = std::move(values);
    return f;
}

Field Forcing::at(double t) const {
    Field f(basis_);
    add_at(t, f.coeffs());
    return f;
}

void Forcing::add_at(double t, Eigen::VectorXd& out) const {
    switch (kind_) {
        case Kind::Zero:
            return;
        case Kind::ClosedForm:
            schedule_->add_field_at(t, out);
            return;
        case Kind::Sampled: {
            if (t <= times_.front()) {
                out += values_.front();
                return;
            }
            if (t >= times_.back()) {
                out += values_.back();
                return;
            }
            const auto it = std::upper_bound(times_.begin(), times_.end(), t);
            const size_t hi = static_cast<size_t>(it - times_.begin());
            const size_t lo = hi - 1;
            const double s = (t - times_[lo]) / (times_[hi] - times_[lo]);
            out += (1.0 - s) * values_[lo] + s * values_[hi];
            return;
        }
    }
}

double Forcing::l2_norm_sq(double horizon) const {
    return tail_l2_norm_sq(horizon, 0);
}

double Forcing::tail_l2_norm_sq(double horizon, int head) const {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (head < 0 || head > basis_->size())
        throw std::invalid_argument("tail split out of range");
    const auto dim = static_cast<Eigen::Index>(basis_->size());
    const auto tail = dim - head;
    if (kind_ == Kind::Zero || tail == 0) return 0.0;
    if (kind_ == Kind::ClosedForm) {
        // |tail of A u(t)|^2 = u(t)' G u(t) with G the tail Gram of the
        // actuator columns; the integrand is smooth so panel doubling settles.
        if (schedule_->size() == 0) return 0.0;
        const auto m = static_cast<Eigen::Index>(schedule_->size());
        Eigen::MatrixXd cols(tail, m);
        for (Eigen::Index i = 0; i < m; ++i)
            cols.col(i) = schedule_->actuators()[static_cast<size_t>(i)].coeffs().tail(tail);
        const Eigen::MatrixXd gram = cols.transpose() * cols;
        if (gram.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;
        auto integrand = [&](double t) {
            const Eigen::VectorXd u = schedule_->coeff_values(t);
            return u.dot(gram * u);
        };
        return integrate_adaptive(integrand, 0.0, horizon, 1e-12);
    }
    // Piecewise linear samples: |f|^2 is quadratic per interval, so the
    // three-point rule per interval is exact. Clamped tails are constant.
    auto seg = [&](double a, double b, const Eigen::VectorXd& fa,
                   const Eigen::VectorXd& fb) {
        const Eigen::VectorXd ta = fa.tail(tail), tb = fb.tail(tail);
        const double mid = 0.25 * (ta + tb).squaredNorm();
        return (b - a) / 6.0 * (ta.squaredNorm() + 4.0 * mid + tb.squaredNorm());
    };
    double total = 0.0;
    if (times_.front() > 0.0) {
        const double b = std::min(times_.front(), horizon);
        total += b * values_.front().tail(tail).squaredNorm();
    }
    for (size_t i = 0; i + 1 < times_.size(); ++i) {
        const double a = std::max(times_[i], 0.0);
        const double b = std::min(times_[i + 1], horizon);
        if (b <= a) continue;
        const double w = times_[i + 1] - times_[i];
        auto value_at = [&](double t) -> Eigen::VectorXd {
            const double s = (t - times_[i]) / w;
            return (1.0 - s) * values_[i] + s * values_[i + 1];
        };
        total += seg(a, b, value_at(a), value_at(b));
    }
    if (times_.back() < horizon)
        total += (horizon - times_.back()) * values_.back().tail(tail).squaredNorm();
    return total;
}

double Forcing::max_frequency() const {
    return kind_ == Kind::ClosedForm ? schedule_->max_frequency() : 0.0;
}

double Forcing::max_rate() const {
    return kind_ == Kind::ClosedForm ? schedule_->max_rate() : 0.0;
}

nlohmann::json Forcing::to_json() const {
    switch (kind_) {
        case Kind::Zero:
            return {{"kind", "zero"}};
        case Kind::ClosedForm:
            return {{"kind", "closed_form"}, {"schedule", schedule_->to_json()}};
        case Kind::Sampled: {
            nlohmann::json vals = nlohmann::json::array();
            for (const auto& v : values_) {
                std::vector<double> row(v.data(), v.data() + v.size());
                vals.push_back(row);
            }
            return {{"kind", "sampled"}, {"times", times_}, {"values", vals}};
        }
    }
    throw std::logic_error("unreachable");
}

Forcing Forcing::from_json(const BasisPtr& basis, const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return zero(basis);
    if (kind == "closed_form")
        return closed_form(ControlSchedule::from_json(basis, j.at("schedule")));
    if (kind == "sampled") {
        auto times = j.at("times").get<std::vector<double>>();
        std::vector<Eigen::VectorXd> values;
        for (const auto& jr : j.at("values")) {
            auto row = jr.get<std::vector<double>>();
            values.push_back(Eigen::Map<const Eigen::VectorXd>(
                row.data(), static_cast<Eigen::Index>(row.size())));
        }
        return sampled(basis, std::move(times), std::move(values));
    }
    throw std::invalid_argument("unknown forcing kind: " + kind);
}

}  // namespace eulerctl
