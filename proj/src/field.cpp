#include "eulerctl/field.hpp"

#include <cmath>
#include <stdexcept>

namespace eulerctl {

Field::Field(BasisPtr basis, Eigen::VectorXd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != basis_->size())
        throw std::invalid_argument("field coefficient count does not match basis");
}

void require_same_basis(const Field& a, const Field& b) {
    if (!a.valid() || !b.valid())
        throw std::invalid_argument("operation on an empty field");
    if (a.basis_ptr().get() != b.basis_ptr().get() && !(a.basis() == b.basis()))
        throw std::invalid_argument("fields live over different bases");
}

Field& Field::operator+=(const Field& o) {
    require_same_basis(*this, o);
    coeffs_ += o.coeffs_;
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_basis(*this, o);
    coeffs_ -= o.coeffs_;
    return *this;
}

Field& Field::operator*=(double s) {
    coeffs_ *= s;
    return *this;
}

Field Field::unit_mode(const BasisPtr& basis, int i) {
    Field f(basis);
    if (i < 0 || i >= f.size()) throw std::out_of_range("mode index out of range");
    f.coeffs_[i] = 1.0;
    return f;
}

Field Field::from_modes(const BasisPtr& basis,
                        const std::vector<std::pair<Mode, double>>& parts) {
    Field f(basis);
    for (const auto& [m, c] : parts) {
        const int i = basis->index_of(m);
        if (i < 0) throw std::invalid_argument("mode is not in the basis");
        f.coeffs_[i] += c;
    }
    return f;
}

Field Field::random_unit(const BasisPtr& basis, Rng& rng, int support) {
    Field f(basis);
    const int n = support > 0 ? std::min(support, f.size()) : f.size();
    for (int i = 0; i < n; ++i) f.coeffs_[i] = rng.normal();
    const double nrm = f.coeffs_.norm();
    if (nrm == 0.0) {
        f.coeffs_[0] = 1.0;
        return f;
    }
    f.coeffs_ /= nrm;
    return f;
}

Eigen::Vector2d Field::eval(const Eigen::Vector2d& x) const {
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int i = 0; i < size(); ++i)
        if (coeffs_[i] != 0.0) v += coeffs_[i] * basis_->evaluate(i, x);
    return v;
}

Eigen::Matrix2d Field::eval_gradient(const Eigen::Vector2d& x) const {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (int i = 0; i < size(); ++i)
        if (coeffs_[i] != 0.0) g += coeffs_[i] * basis_->evaluate_gradient(i, x);
    return g;
}

nlohmann::json Field::to_json() const {
    nlohmann::json coeffs = nlohmann::json::array();
    for (int i = 0; i < size(); ++i) coeffs.push_back(coeffs_[i]);
    return {{"coeffs", coeffs}};
}

Field Field::from_json(const BasisPtr& basis, const nlohmann::json& j) {
    const auto& arr = j.at("coeffs");
    if (!arr.is_array() || static_cast<int>(arr.size()) != basis->size())
        throw std::invalid_argument("field coefficient count does not match basis");
    Eigen::VectorXd c(basis->size());
    for (int i = 0; i < basis->size(); ++i) c[i] = arr[i].get<double>();
    return Field(basis, std::move(c));
}

double inner_H(const Field& a, const Field& b) {
    require_same_basis(a, b);
    return a.coeffs().dot(b.coeffs());
}

double norm_H(const Field& y) { return y.coeffs().norm(); }

double norm_V(const Field& y) {
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i)
        s += y.basis().lambda(i) * y[i] * y[i];
    return std::sqrt(s);
}

double norm_DAgamma(const Field& y, double gamma) {
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i)
        s += std::pow(y.basis().lambda(i), 2.0 * gamma) * y[i] * y[i];
    return std::sqrt(s);
}

double VorticityField::eval(const Eigen::Vector2d& x) const {
    double v = 0.0;
    for (int i = 0; i < basis_->size(); ++i)
        if (coeffs_[i] != 0.0) {
            const double scale = std::sqrt(basis_->lambda(i) - 1.0);
            v += coeffs_[i] / scale * basis_->evaluate_vorticity(i, x);
        }
    return v;
}

VorticityField curl(const Field& y) {
    Eigen::VectorXd c(y.size());
    for (int i = 0; i < y.size(); ++i)
        c[i] = std::sqrt(y.basis().lambda(i) - 1.0) * y[i];
    return VorticityField(y.basis_ptr(), std::move(c));
}

double energy(const Field& y) { return 0.5 * y.coeffs().squaredNorm(); }

double enstrophy(const Field& y) {
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i)
        s += (y.basis().lambda(i) - 1.0) * y[i] * y[i];
    return 0.5 * s;
}

double c1_bound(const Field& y) {
    const double amp = y.basis().mode_amplitude();
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i)
        if (y[i] != 0.0) s += std::abs(y[i]) * (1.0 + y.basis().kappa(i).norm()) * amp;
    return s;
}

}  // namespace eulerctl
