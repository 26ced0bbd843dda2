#pragma once

#include <utility>
#include <vector>

#include "eulerctl/domain.hpp"
#include "eulerctl/rng.hpp"

namespace eulerctl {

// Element of the cutoff Galerkin space: coefficients over a SpectralBasis.
// The basis fields are H-orthonormal, so the H inner product is the plain
// coefficient dot product and the Sobolev-scale norms are diagonal in lambda.
class Field {
public:
    Field() = default;
    explicit Field(BasisPtr basis)
        : basis_(std::move(basis)),
          coeffs_(Eigen::VectorXd::Zero(basis_->size())) {}
    Field(BasisPtr basis, Eigen::VectorXd coeffs);

    const SpectralBasis& basis() const { return *basis_; }
    const BasisPtr& basis_ptr() const { return basis_; }
    bool valid() const { return static_cast<bool>(basis_); }

    int size() const { return static_cast<int>(coeffs_.size()); }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }
    double operator[](int i) const { return coeffs_[i]; }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator*(Field a, double s) { return a *= s; }

    static Field unit_mode(const BasisPtr& basis, int i);
    static Field from_modes(const BasisPtr& basis,
                            const std::vector<std::pair<Mode, double>>& parts);
    // Unit H-norm field with Gaussian coefficients on the first `support`
    // modes (support <= 0 means all).
    static Field random_unit(const BasisPtr& basis, Rng& rng, int support = 0);

    Eigen::Vector2d eval(const Eigen::Vector2d& x) const;
    Eigen::Matrix2d eval_gradient(const Eigen::Vector2d& x) const;

    nlohmann::json to_json() const;
    static Field from_json(const BasisPtr& basis, const nlohmann::json& j);

private:
    BasisPtr basis_;
    Eigen::VectorXd coeffs_;
};

void require_same_basis(const Field& a, const Field& b);

double inner_H(const Field& a, const Field& b);
double norm_H(const Field& y);
double norm_V(const Field& y);  // |y|_V^2 = |y|_H^2 + |curl y|_L2^2 = sum lambda y^2
double norm_DAgamma(const Field& y, double gamma);

// Scalar vorticity of y, stored over L2-normalized curl images of the basis
// fields (coefficient sqrt(lambda - 1) per mode).
class VorticityField {
public:
    VorticityField(BasisPtr basis, Eigen::VectorXd coeffs)
        : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {}
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    double l2_norm() const { return coeffs_.norm(); }
    double eval(const Eigen::Vector2d& x) const;
    const SpectralBasis& basis() const { return *basis_; }

private:
    BasisPtr basis_;
    Eigen::VectorXd coeffs_;
};

VorticityField curl(const Field& y);

double energy(const Field& y);     // 0.5 |y|_H^2
double enstrophy(const Field& y);  // 0.5 |curl y|_L2^2

// Upper bound for the C^1 norm: sum_k |y_k| (1 + |kappa_k|) amp, with amp the
// uniform pointwise bound on unit basis fields. Dominates sup|y| + sup|grad y|.
double c1_bound(const Field& y);

}  // namespace eulerctl
