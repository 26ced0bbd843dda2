#pragma once

#include "eulerctl/bilinear.hpp"
#include "eulerctl/subspace.hpp"

namespace eulerctl {

struct SaturationOptions {
    double tol = 1e-8;   // relative rank tolerance for span extension
    int max_depth = 16;  // bracket levels after the generator level
};

struct SaturationLevel {
    int dim = 0;          // dim of the space after this level
    double coverage = 0;  // coverage of the full cutoff space
    std::vector<std::array<int, 2>> added;  // (psi, phi) pairs that extended the span
};

struct SaturationResult {
    Subspace space;               // cumulative; prefix of dim level_dims[j] spans level j
    std::vector<SaturationLevel> levels;  // index 0 is the generator level
    int terminal_level = 0;
    bool stalled = false;

    int level_dim(int j) const { return levels[static_cast<size_t>(j)].dim; }
    nlohmann::json report() const;
};

// One saturation application: extends gj by the brackets calB(psi) phi over
// all generators psi in g0 and all stored elements phi of gj, in that order
// (psi major). Returns the extended copy.
Subspace saturate_step(const Subspace& g0, const Subspace& gj, double tol = 1e-8);

// Iterates saturate_step from the span of the generators until the cutoff
// space is covered, a level adds nothing (stall), or max_depth is reached.
SaturationResult run_saturation(const BasisPtr& basis,
                                const std::vector<Field>& generators,
                                const SaturationOptions& opts = {});

// The physical actuator set: the generators plus those self-interactions
// B(h, h) that extend their span, in generator order.
std::vector<Field> actuator_set(const BasisPtr& basis,
                                const std::vector<Field>& generators,
                                double tol = 1e-8);

// The eight-field torus generator preset: both parities on the wavevectors
// (1,0), (0,1), (1,1), (1,-1).
std::vector<Field> torus8_generators(const BasisPtr& basis);

}  // namespace eulerctl
