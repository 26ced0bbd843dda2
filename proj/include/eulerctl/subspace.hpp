#pragma once

#include "eulerctl/field.hpp"

namespace eulerctl {

// Where a subspace element came from: a generator, or a bracket
// calB(psi) phi with psi indexing the generator set and phi indexing an
// earlier element of the same subspace.
struct Origin {
    enum class Kind : std::uint8_t { Generator, Bracket };
    Kind kind = Kind::Generator;
    int psi = -1;
    int phi = -1;
};

enum class ExtendResult { Added, AlreadySpanned };

class Subspace;
ExtendResult span_extend(Subspace& s, const Field& candidate, Origin origin,
                         double tol);

// Finite-dimensional subspace of the cutoff space, kept as the raw elements
// in insertion order plus an orthonormal frame spanning them. Extending
// appends, so a prefix of the columns spans every earlier stage.
class Subspace {
public:
    explicit Subspace(BasisPtr basis);

    const BasisPtr& basis_ptr() const { return basis_; }
    const SpectralBasis& basis() const { return *basis_; }
    int dim() const { return static_cast<int>(frame_.cols()); }
    int ambient_dim() const { return static_cast<int>(frame_.rows()); }

    const Eigen::MatrixXd& frame() const { return frame_; }
    Eigen::MatrixXd frame_prefix(int dim) const { return frame_.leftCols(dim); }
    const std::vector<Field>& elements() const { return elements_; }
    const std::vector<Origin>& origins() const { return origins_; }

    Eigen::VectorXd project_coeffs(const Eigen::VectorXd& v) const;
    Field project(const Field& y) const;

    // Mean captured fraction of the first M eigenfields,
    // (sum_{i<M} |P e_i|^2) / M; equals 1 exactly when E_M is contained.
    double coverage(int M) const;

    // Diagnostics: frame orthonormality defect and the worst residual of the
    // stored elements after projection onto the frame.
    double gram_defect() const;
    double reconstruction_defect() const;

private:
    friend ExtendResult span_extend(Subspace&, const Field&, Origin, double);

    BasisPtr basis_;
    Eigen::MatrixXd frame_;  // D x dim, orthonormal columns
    std::vector<Field> elements_;
    std::vector<Origin> origins_;
};

// Appends the candidate if its component orthogonal to the current span has
// norm above tol * max(1, |candidate|). Two projection passes keep the frame
// orthonormal to roundoff.
ExtendResult span_extend(Subspace& s, const Field& candidate, Origin origin,
                         double tol = 1e-8);

}  // namespace eulerctl
