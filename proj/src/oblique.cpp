#include "eulerctl/oblique.hpp"

#include <Eigen/SVD>

#include <limits>
#include <sstream>

namespace eulerctl {

DegenerateSumError::DegenerateSumError(double condition_)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << "direct sum is numerically degenerate: Gram condition "
              << condition_;
          return msg.str();
      }()),
      condition(condition_) {}

double op_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

ObliqueProjector ObliqueProjector::along_tail(const BasisPtr& basis,
                                              const std::vector<Field>& span_x,
                                              double max_condition) {
    if (!basis) throw std::invalid_argument("projector needs a basis");
    const auto d = static_cast<Eigen::Index>(basis->size());
    const auto p = static_cast<Eigen::Index>(span_x.size());
    if (p < 1 || p > d)
        throw std::invalid_argument("spanning set size out of range");
    ObliqueProjector proj;
    proj.basis_ = basis;
    proj.span_.resize(d, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Field& f = span_x[static_cast<size_t>(i)];
        if (!(f.basis() == *basis))
            throw std::invalid_argument("spanning field over a different basis");
        proj.span_.col(i) = f.coeffs();
    }
    proj.witness_ = Eigen::MatrixXd::Zero(d, p);
    for (Eigen::Index i = 0; i < p; ++i) proj.witness_(i, i) = 1.0;
    proj.gram_ = proj.span_.topRows(p);
    proj.factor(max_condition);
    return proj;
}

ObliqueProjector ObliqueProjector::general(const Subspace& X, const Subspace& Y,
                                           double max_condition) {
    if (!(X.basis() == Y.basis()))
        throw std::invalid_argument("subspaces over different bases");
    const Eigen::Index d = X.ambient_dim();
    if (X.dim() < 1 || X.dim() + Y.dim() != d)
        throw std::invalid_argument("subspace pair does not fill the space");
    ObliqueProjector proj;
    proj.basis_ = X.basis_ptr();
    proj.span_.resize(d, X.dim());
    for (int i = 0; i < X.dim(); ++i)
        proj.span_.col(i) = X.elements()[static_cast<size_t>(i)].coeffs();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y.frame());
    const Eigen::MatrixXd q = qr.householderQ();
    proj.witness_ = q.rightCols(d - Y.dim());
    proj.gram_ = proj.witness_.transpose() * proj.span_;
    proj.factor(max_condition);
    return proj;
}

void ObliqueProjector::factor(double max_condition) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram_);
    const auto& sigma = svd.singularValues();
    const double smin = sigma(sigma.size() - 1);
    condition_ = smin > 0.0 ? sigma(0) / smin
                            : std::numeric_limits<double>::infinity();
    if (!(condition_ < max_condition)) throw DegenerateSumError(condition_);
    lu_.compute(gram_);
}

Eigen::VectorXd ObliqueProjector::coords(const Eigen::VectorXd& z) const {
    return lu_.solve(witness_.transpose() * z);
}

Field ObliqueProjector::apply(const Field& z) const {
    if (!(z.basis() == *basis_))
        throw std::invalid_argument("projector input over a different basis");
    Field out(basis_);
    out.coeffs() = span_ * coords(z.coeffs());
    return out;
}

Field ObliqueProjector::complement(const Field& z) const {
    Field out = apply(z);
    out.coeffs() = z.coeffs() - out.coeffs();
    return out;
}

Eigen::MatrixXd ObliqueProjector::matrix() const {
    return span_ * lu_.solve(witness_.transpose());
}

double ObliqueProjector::head_defect(int head) const {
    if (head < 1 || head > ambient_dim())
        throw std::invalid_argument("head size out of range");
    Eigen::MatrixXd defect = -matrix().leftCols(head);
    for (int i = 0; i < head; ++i) defect(i, i) += 1.0;
    return op_norm(defect);
}

Field oblique_project(const Field& z, const Subspace& X, const Subspace& Y) {
    return ObliqueProjector::general(X, Y).apply(z);
}

}  // namespace eulerctl
