#pragma once

#include <optional>

#include "eulerctl/schedule.hpp"

namespace eulerctl {

// External force on the truncated solenoidal space. Three shapes: the zero
// force, a closed-form combination of fixed fields (differentiable in time),
// and a sampled field path with linear interpolation between grid points.
class Forcing {
public:
    enum class Kind : std::uint8_t { Zero = 0, ClosedForm = 1, Sampled = 2 };

    static Forcing zero(BasisPtr basis);
    static Forcing closed_form(ControlSchedule schedule);
    static Forcing constant(Field value);
    static Forcing sampled(BasisPtr basis, std::vector<double> times,
                           std::vector<Eigen::VectorXd> values);

    Kind kind() const { return kind_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    // Underlying schedule of the closed-form shape, null otherwise.
    const ControlSchedule* schedule() const {
        return schedule_ ? &*schedule_ : nullptr;
    }
    bool is_zero() const { return kind_ == Kind::Zero; }

    Field at(double t) const;
    void add_at(double t, Eigen::VectorXd& out) const;

    // int_0^T |f(t)|_H^2 dt; tail variant drops the first `head` coefficients.
    double l2_norm_sq(double horizon) const;
    double tail_l2_norm_sq(double horizon, int head) const;

    double max_frequency() const;
    double max_rate() const;

    nlohmann::json to_json() const;
    static Forcing from_json(const BasisPtr& basis, const nlohmann::json& j);

private:
    explicit Forcing(BasisPtr basis);

    Kind kind_ = Kind::Zero;
    BasisPtr basis_;
    std::optional<ControlSchedule> schedule_;
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> values_;
};

}  // namespace eulerctl
