#pragma once

#include "eulerctl/field.hpp"

namespace eulerctl {

// Galerkin action of the Euler nonlinearity B(y, z) = Pi((y . grad) z).
// For basis fields the advection term expands into a short exact
// trigonometric sum; projecting onto the solenoidal basis realizes the Leray
// projector without ever forming it. The resulting structure table
// c_ijk = ((e_i . grad) e_j, e_k)_H is sparse and is built once per basis.
class InteractionTable {
public:
    struct Entry {
        int k;
        double c;
    };

    explicit InteractionTable(const SpectralBasis& basis);

    // Process-wide cache keyed by basis identity.
    static std::shared_ptr<const InteractionTable> get(const BasisPtr& basis);

    int size() const { return size_; }

    // Entries of the pair (i, j): coefficients of (e_i . grad) e_j.
    std::pair<const Entry*, const Entry*> pair(int i, int j) const {
        const size_t p = static_cast<size_t>(i) * size_ + j;
        return {entries_.data() + offsets_[p], entries_.data() + offsets_[p + 1]};
    }

    // B(y, z) in coefficients.
    Eigen::VectorXd apply(const Eigen::VectorXd& y, const Eigen::VectorXd& z) const;
    // B(y, y) through the symmetrized half-size table.
    Eigen::VectorXd apply_self(const Eigen::VectorXd& y) const;

private:
    int size_ = 0;
    std::vector<std::uint32_t> offsets_;  // size_*size_ + 1
    std::vector<Entry> entries_;
    // Upper-triangular pairs (i <= j) with c_ijk + c_jik merged.
    std::vector<std::uint32_t> sym_offsets_;
    std::vector<Entry> sym_entries_;
};

Field bilinear_B(const Field& y, const Field& z);
Field bilinear_B_self(const Field& y);
// calB(z)y = B(z, y) + B(y, z).
Field calB(const Field& z, const Field& y);
// b(y, z, w) = (B(y, z), w)_H.
double b_form(const Field& y, const Field& z, const Field& w);

// Empirical constant for |b(y, z, w)| <= C |y|_H c1_bound(z) |w|_H, measured
// as the max ratio over seeded random unit fields.
double measure_Cb(const BasisPtr& basis, int trials, std::uint64_t seed);

}  // namespace eulerctl
