#include "eulerctl/subspace.hpp"

#include <cmath>

namespace eulerctl {

Subspace::Subspace(BasisPtr basis)
    : basis_(std::move(basis)), frame_(basis_->size(), 0) {}

Eigen::VectorXd Subspace::project_coeffs(const Eigen::VectorXd& v) const {
    if (dim() == 0) return Eigen::VectorXd::Zero(v.size());
    return frame_ * (frame_.transpose() * v);
}

Field Subspace::project(const Field& y) const {
    return Field(basis_, project_coeffs(y.coeffs()));
}

double Subspace::coverage(int M) const {
    if (M <= 0) return 1.0;
    M = std::min(M, ambient_dim());
    if (dim() == 0) return 0.0;
    // e_i is the i-th coordinate vector, so |F^T e_i|^2 is the squared norm
    // of the i-th row of the frame.
    double sum = 0.0;
    for (int i = 0; i < M; ++i) sum += frame_.row(i).squaredNorm();
    return sum / M;
}

double Subspace::gram_defect() const {
    if (dim() == 0) return 0.0;
    const Eigen::MatrixXd g = frame_.transpose() * frame_ -
                              Eigen::MatrixXd::Identity(dim(), dim());
    return g.cwiseAbs().maxCoeff();
}

double Subspace::reconstruction_defect() const {
    double worst = 0.0;
    for (const Field& f : elements_) {
        const Eigen::VectorXd r = f.coeffs() - project_coeffs(f.coeffs());
        worst = std::max(worst, r.norm() / std::max(1.0, f.coeffs().norm()));
    }
    return worst;
}

ExtendResult span_extend(Subspace& s, const Field& candidate, Origin origin,
                         double tol) {
    if (!candidate.valid() || !(candidate.basis() == *s.basis_))
        throw std::invalid_argument("candidate lives over a different basis");
    Eigen::VectorXd r = candidate.coeffs();
    if (s.dim() > 0) {
        r -= s.frame_ * (s.frame_.transpose() * r);
        r -= s.frame_ * (s.frame_.transpose() * r);
    }
    const double thresh = tol * std::max(1.0, candidate.coeffs().norm());
    if (r.norm() <= thresh) return ExtendResult::AlreadySpanned;
    r /= r.norm();
    s.frame_.conservativeResize(Eigen::NoChange, s.dim() + 1);
    s.frame_.col(s.dim() - 1) = r;
    s.elements_.push_back(candidate);
    s.origins_.push_back(origin);
    return ExtendResult::Added;
}

}  // namespace eulerctl
