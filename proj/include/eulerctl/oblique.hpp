#pragma once

#include <stdexcept>

#include <Eigen/LU>

#include "eulerctl/subspace.hpp"

namespace eulerctl {

// Raised when the requested direct sum is numerically degenerate: the Gram
// system tying the two halves together is near singular.
class DegenerateSumError : public std::runtime_error {
public:
    explicit DegenerateSumError(double condition);
    double condition;
};

// Projection onto span{Phi_1..Phi_p} along a complementary space Y, realized
// through the Gram system (W' Phi) v = W' z where the columns of W span the
// orthogonal complement of Y. P z = Phi v lands in the span and z - P z
// stays in Y. With Y the tail space the Gram matrix has entries
// (e_i, Phi_j)_H and the orthogonal projection is recovered when the Phi
// equal the head eigenfields.
class ObliqueProjector {
public:
    // Y = span of the eigenfields past the first p, with p the number of
    // spanning fields given.
    static ObliqueProjector along_tail(const BasisPtr& basis,
                                       const std::vector<Field>& span_x,
                                       double max_condition = 1e12);
    // General direct sum: X (+) Y must fill the whole cutoff space.
    static ObliqueProjector general(const Subspace& X, const Subspace& Y,
                                    double max_condition = 1e12);

    int ambient_dim() const { return static_cast<int>(span_.rows()); }
    int range_dim() const { return static_cast<int>(span_.cols()); }
    double condition() const { return condition_; }

    // Coordinates v of P z in the spanning fields.
    Eigen::VectorXd coords(const Eigen::VectorXd& z) const;
    Field apply(const Field& z) const;       // P z
    Field complement(const Field& z) const;  // (I - P) z

    Eigen::MatrixXd matrix() const;  // dense P

    // sigma_max((I - P) restricted to the first `head` coordinate axes):
    // how far the head eigenfields stick out of the range space.
    double head_defect(int head) const;

private:
    ObliqueProjector() = default;
    void factor(double max_condition);

    BasisPtr basis_;
    Eigen::MatrixXd span_;     // D x p raw spanning vectors
    Eigen::MatrixXd witness_;  // D x p orthonormal complement of Y
    Eigen::MatrixXd gram_;     // witness' * span
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double condition_ = 0.0;
};

// Largest singular value.
double op_norm(const Eigen::MatrixXd& m);

// P_X^Y z for a direct-sum pair of subspaces.
Field oblique_project(const Field& z, const Subspace& X, const Subspace& Y);

}  // namespace eulerctl
