#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace eulerctl {

enum class DomainKind { Torus, RectangleLions };

struct DomainSpec {
    DomainKind kind = DomainKind::Torus;
    std::array<double, 2> lengths{0.0, 0.0};

    void validate() const;  // throws std::invalid_argument
    double area() const { return lengths[0] * lengths[1]; }
    bool operator==(const DomainSpec&) const = default;

    nlohmann::json to_json() const;
    static DomainSpec from_json(const nlohmann::json& j);
};

DomainSpec torus_domain(double L1, double L2);
DomainSpec rectangle_domain(double L1, double L2);

enum class Parity : std::uint8_t { Sin = 0, Cos = 1 };

const char* parity_name(Parity p);
Parity parity_from_name(const std::string& s);

// Label of one divergence-free eigenfield of the shifted Stokes operator
// A = 1 - Laplacian restricted to the solenoidal space.
//
// Torus: the wavevector is the canonical representative of {k, -k} (first
// nonzero component positive) and both parities occur. Rectangle with the
// Lions boundary conditions: both components are >= 1 and only the
// product-sine stream family exists; the parity tag is fixed to Sin.
struct Mode {
    std::array<int, 2> k{0, 0};
    Parity parity = Parity::Sin;
    bool operator==(const Mode&) const = default;
};

std::array<int, 2> canonical_wavevector(std::array<int, 2> k, int* sign = nullptr);

// Eigenfield family below a spectral cutoff, sorted by nondecreasing
// eigenvalue lambda = 1 + |kappa|^2 with lexicographic tie-breaks on the
// wavevector and then the parity. Immutable after enumeration.
class SpectralBasis {
public:
    static SpectralBasis enumerate(const DomainSpec& domain, int cutoff);

    const DomainSpec& domain() const { return domain_; }
    int cutoff() const { return cutoff_; }
    int size() const { return static_cast<int>(modes_.size()); }
    const Mode& mode(int i) const { return modes_[static_cast<size_t>(i)]; }
    double lambda(int i) const { return lambda_[static_cast<size_t>(i)]; }

    // Physical wavevector of mode i.
    Eigen::Vector2d kappa(int i) const;

    // Index of the mode with the given label, or -1.
    int index_of(const Mode& m) const;

    Eigen::Vector2d evaluate(int i, const Eigen::Vector2d& x) const;
    // Jacobian, entry (r, c) = d e_r / d x_c.
    Eigen::Matrix2d evaluate_gradient(int i, const Eigen::Vector2d& x) const;
    double evaluate_vorticity(int i, const Eigen::Vector2d& x) const;

    // Pointwise bound: |e_i(x)| <= mode_amplitude() and
    // |grad e_i(x)| <= mode_amplitude() * |kappa_i| for every mode.
    double mode_amplitude() const;

    bool operator==(const SpectralBasis& o) const {
        return domain_ == o.domain_ && cutoff_ == o.cutoff_;
    }

    nlohmann::json manifest() const;

private:
    SpectralBasis() = default;

    DomainSpec domain_;
    int cutoff_ = 0;
    std::vector<Mode> modes_;
    std::vector<double> lambda_;
    std::unordered_map<std::uint64_t, int> lookup_;
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

BasisPtr make_basis(const DomainSpec& domain, int cutoff);

}  // namespace eulerctl
