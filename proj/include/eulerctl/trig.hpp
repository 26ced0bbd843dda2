#pragma once

#include <cstdint>
#include <map>

#include "eulerctl/domain.hpp"

namespace eulerctl {

// Closed-form trigonometric expansions on the two domain families. Sums,
// products, derivatives and domain integrals stay symbolic, so inner products
// of basis fields and of their advection terms come out exact to roundoff.
// Keys are kept canonical so expansions merge deterministically.
//
// Torus: one term is coeff * trig(kappa . x) with trig in {sin, cos} and the
// integer wavevector canonical (first nonzero component positive).
// Rectangle: one term is coeff * tx(pi a x1 / L1) * ty(pi b x2 / L2) with
// tx, ty in {sin, cos} and a, b >= 0.
struct TrigKey {
    int a = 0;
    int b = 0;
    std::uint8_t t = 0;  // torus: 0 sin, 1 cos; rectangle: bit0 = x is cos, bit1 = y is cos
    auto operator<=>(const TrigKey&) const = default;
};

class ScalarExpansion {
public:
    explicit ScalarExpansion(DomainSpec domain) : domain_(domain) {}

    static ScalarExpansion constant(const DomainSpec& d, double value);
    static ScalarExpansion torus_wave(const DomainSpec& d, std::array<int, 2> k,
                                      Parity trig, double coeff);
    static ScalarExpansion rect_wave(const DomainSpec& d, int a, int b,
                                     bool x_cos, bool y_cos, double coeff);

    const DomainSpec& domain() const { return domain_; }
    const std::map<TrigKey, double>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    // Adds one term, canonicalizing the key (sign flips fold into the
    // coefficient; identically zero factors drop the term).
    void add_term(TrigKey key, double coeff);

    ScalarExpansion& operator+=(const ScalarExpansion& o);
    ScalarExpansion& operator-=(const ScalarExpansion& o);
    ScalarExpansion operator+(const ScalarExpansion& o) const;
    ScalarExpansion operator-(const ScalarExpansion& o) const;
    ScalarExpansion scaled(double s) const;

    ScalarExpansion times(const ScalarExpansion& o) const;
    ScalarExpansion derivative(int axis) const;

    double integral() const;                          // over the whole domain
    double inner(const ScalarExpansion& o) const;     // L2 inner product
    double eval(const Eigen::Vector2d& x) const;

private:
    DomainSpec domain_;
    std::map<TrigKey, double> terms_;
};

struct VectorExpansion {
    ScalarExpansion c1, c2;

    explicit VectorExpansion(const DomainSpec& d) : c1(d), c2(d) {}
    VectorExpansion(ScalarExpansion a, ScalarExpansion b)
        : c1(std::move(a)), c2(std::move(b)) {}

    static VectorExpansion from_basis(const SpectralBasis& basis, int i);

    VectorExpansion operator+(const VectorExpansion& o) const {
        return {c1 + o.c1, c2 + o.c2};
    }
    VectorExpansion scaled(double s) const { return {c1.scaled(s), c2.scaled(s)}; }

    ScalarExpansion dot(const VectorExpansion& o) const {
        return c1.times(o.c1) + c2.times(o.c2);
    }
    // (this . grad) v, componentwise.
    VectorExpansion advect(const VectorExpansion& v) const;
    ScalarExpansion curl() const {   // d1 v2 - d2 v1
        return c2.derivative(0) - c1.derivative(1);
    }
    ScalarExpansion divergence() const {
        return c1.derivative(0) + c2.derivative(1);
    }
    Eigen::Vector2d eval(const Eigen::Vector2d& x) const {
        return {c1.eval(x), c2.eval(x)};
    }
};

}  // namespace eulerctl
