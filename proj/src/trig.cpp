#include "eulerctl/trig.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eulerctl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint8_t kSin = 0;
constexpr std::uint8_t kCos = 1;

struct AxisTerm {
    int freq;
    bool is_cos;
    double coeff;
};

// trig_{t1}(f1 u) * trig_{t2}(f2 u) as two product-to-sum terms. The same
// identities hold verbatim when f1, f2 are wavevectors and u the position.
std::array<AxisTerm, 2> axis_product(int f1, bool cos1, int f2, bool cos2) {
    if (!cos1 && !cos2)
        return {AxisTerm{f1 - f2, true, 0.5}, AxisTerm{f1 + f2, true, -0.5}};
    if (cos1 && cos2)
        return {AxisTerm{f1 - f2, true, 0.5}, AxisTerm{f1 + f2, true, 0.5}};
    if (!cos1 && cos2)
        return {AxisTerm{f1 + f2, false, 0.5}, AxisTerm{f1 - f2, false, 0.5}};
    return {AxisTerm{f1 + f2, false, 0.5}, AxisTerm{f1 - f2, false, -0.5}};
}

}  // namespace

ScalarExpansion ScalarExpansion::constant(const DomainSpec& d, double value) {
    ScalarExpansion e(d);
    if (d.kind == DomainKind::Torus)
        e.add_term({0, 0, kCos}, value);
    else
        e.add_term({0, 0, static_cast<std::uint8_t>(kCos | (kCos << 1))}, value);
    return e;
}

ScalarExpansion ScalarExpansion::torus_wave(const DomainSpec& d, std::array<int, 2> k,
                                            Parity trig, double coeff) {
    if (d.kind != DomainKind::Torus)
        throw std::invalid_argument("torus_wave on non-torus domain");
    ScalarExpansion e(d);
    e.add_term({k[0], k[1], trig == Parity::Sin ? kSin : kCos}, coeff);
    return e;
}

ScalarExpansion ScalarExpansion::rect_wave(const DomainSpec& d, int a, int b,
                                           bool x_cos, bool y_cos, double coeff) {
    if (d.kind != DomainKind::RectangleLions)
        throw std::invalid_argument("rect_wave on non-rectangle domain");
    ScalarExpansion e(d);
    const std::uint8_t t =
        static_cast<std::uint8_t>((x_cos ? 1 : 0) | ((y_cos ? 1 : 0) << 1));
    e.add_term({a, b, t}, coeff);
    return e;
}

void ScalarExpansion::add_term(TrigKey key, double coeff) {
    if (coeff == 0.0) return;
    if (domain_.kind == DomainKind::Torus) {
        if (key.a == 0 && key.b == 0) {
            if (key.t == kSin) return;  // sin(0) = 0
        } else if (key.a < 0 || (key.a == 0 && key.b < 0)) {
            key.a = -key.a;
            key.b = -key.b;
            if (key.t == kSin) coeff = -coeff;
        }
    } else {
        const bool x_cos = key.t & 1, y_cos = key.t & 2;
        if (key.a < 0) {
            key.a = -key.a;
            if (!x_cos) coeff = -coeff;
        }
        if (key.b < 0) {
            key.b = -key.b;
            if (!y_cos) coeff = -coeff;
        }
        if ((key.a == 0 && !x_cos) || (key.b == 0 && !y_cos)) return;
    }
    auto [it, inserted] = terms_.emplace(key, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0.0) terms_.erase(it);
    }
}

ScalarExpansion& ScalarExpansion::operator+=(const ScalarExpansion& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
}

ScalarExpansion& ScalarExpansion::operator-=(const ScalarExpansion& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
}

ScalarExpansion ScalarExpansion::operator+(const ScalarExpansion& o) const {
    ScalarExpansion r = *this;
    r += o;
    return r;
}

ScalarExpansion ScalarExpansion::operator-(const ScalarExpansion& o) const {
    ScalarExpansion r = *this;
    r -= o;
    return r;
}

ScalarExpansion ScalarExpansion::scaled(double s) const {
    ScalarExpansion r(domain_);
    if (s == 0.0) return r;
    for (const auto& [k, c] : terms_) r.terms_.emplace(k, c * s);
    return r;
}

ScalarExpansion ScalarExpansion::times(const ScalarExpansion& o) const {
    ScalarExpansion r(domain_);
    if (domain_.kind == DomainKind::Torus) {
        for (const auto& [k1, c1] : terms_)
            for (const auto& [k2, c2] : o.terms_) {
                const TrigKey diff{k1.a - k2.a, k1.b - k2.b, 0};
                const TrigKey sum{k1.a + k2.a, k1.b + k2.b, 0};
                const double c = c1 * c2;
                if (k1.t == kSin && k2.t == kSin) {
                    r.add_term({diff.a, diff.b, kCos}, 0.5 * c);
                    r.add_term({sum.a, sum.b, kCos}, -0.5 * c);
                } else if (k1.t == kCos && k2.t == kCos) {
                    r.add_term({diff.a, diff.b, kCos}, 0.5 * c);
                    r.add_term({sum.a, sum.b, kCos}, 0.5 * c);
                } else if (k1.t == kSin) {
                    r.add_term({sum.a, sum.b, kSin}, 0.5 * c);
                    r.add_term({diff.a, diff.b, kSin}, 0.5 * c);
                } else {
                    r.add_term({sum.a, sum.b, kSin}, 0.5 * c);
                    r.add_term({diff.a, diff.b, kSin}, -0.5 * c);
                }
            }
        return r;
    }
    for (const auto& [k1, c1] : terms_)
        for (const auto& [k2, c2] : o.terms_) {
            const auto px = axis_product(k1.a, k1.t & 1, k2.a, k2.t & 1);
            const auto py = axis_product(k1.b, (k1.t & 2) != 0, k2.b, (k2.t & 2) != 0);
            for (const auto& tx : px)
                for (const auto& ty : py) {
                    const std::uint8_t t = static_cast<std::uint8_t>(
                        (tx.is_cos ? 1 : 0) | ((ty.is_cos ? 1 : 0) << 1));
                    r.add_term({tx.freq, ty.freq, t}, c1 * c2 * tx.coeff * ty.coeff);
                }
        }
    return r;
}

ScalarExpansion ScalarExpansion::derivative(int axis) const {
    ScalarExpansion r(domain_);
    for (const auto& [k, c] : terms_) {
        if (domain_.kind == DomainKind::Torus) {
            const double kap =
                2.0 * kPi * (axis == 0 ? k.a : k.b) / domain_.lengths[axis];
            if (k.t == kSin)
                r.add_term({k.a, k.b, kCos}, c * kap);
            else
                r.add_term({k.a, k.b, kSin}, -c * kap);
        } else {
            const int freq = axis == 0 ? k.a : k.b;
            const double p = kPi * freq / domain_.lengths[axis];
            const std::uint8_t bit = axis == 0 ? 1 : 2;
            const bool is_cos = k.t & bit;
            const std::uint8_t flipped = static_cast<std::uint8_t>(k.t ^ bit);
            r.add_term({k.a, k.b, flipped}, is_cos ? -c * p : c * p);
        }
    }
    return r;
}

double ScalarExpansion::integral() const {
    double sum = 0.0;
    for (const auto& [k, c] : terms_) {
        if (domain_.kind == DomainKind::Torus) {
            if (k.a == 0 && k.b == 0 && k.t == kCos) sum += c * domain_.area();
            continue;
        }
        auto axis_integral = [&](int freq, bool is_cos, double L) {
            if (is_cos) return freq == 0 ? L : 0.0;
            // freq >= 1 after canonicalization
            return (freq % 2 != 0) ? 2.0 * L / (kPi * freq) : 0.0;
        };
        sum += c * axis_integral(k.a, k.t & 1, domain_.lengths[0]) *
               axis_integral(k.b, (k.t & 2) != 0, domain_.lengths[1]);
    }
    return sum;
}

double ScalarExpansion::inner(const ScalarExpansion& o) const {
    return times(o).integral();
}

double ScalarExpansion::eval(const Eigen::Vector2d& x) const {
    double sum = 0.0;
    for (const auto& [k, c] : terms_) {
        if (domain_.kind == DomainKind::Torus) {
            const double phase = 2.0 * kPi * (k.a * x[0] / domain_.lengths[0] +
                                              k.b * x[1] / domain_.lengths[1]);
            sum += c * (k.t == kCos ? std::cos(phase) : std::sin(phase));
        } else {
            const double u = kPi * k.a * x[0] / domain_.lengths[0];
            const double v = kPi * k.b * x[1] / domain_.lengths[1];
            sum += c * ((k.t & 1) ? std::cos(u) : std::sin(u)) *
                   ((k.t & 2) ? std::cos(v) : std::sin(v));
        }
    }
    return sum;
}

VectorExpansion VectorExpansion::from_basis(const SpectralBasis& basis, int i) {
    const DomainSpec& d = basis.domain();
    const Mode& m = basis.mode(i);
    const Eigen::Vector2d kp = basis.kappa(i);
    if (d.kind == DomainKind::Torus) {
        const double amp = basis.mode_amplitude();
        const Eigen::Vector2d dir = Eigen::Vector2d(-kp[1], kp[0]) / kp.norm();
        return {ScalarExpansion::torus_wave(d, m.k, m.parity, amp * dir[0]),
                ScalarExpansion::torus_wave(d, m.k, m.parity, amp * dir[1])};
    }
    const double p = kp[0], q = kp[1];
    const double c = 2.0 / (kp.norm() * std::sqrt(d.area()));
    return {ScalarExpansion::rect_wave(d, m.k[0], m.k[1], false, true, c * q),
            ScalarExpansion::rect_wave(d, m.k[0], m.k[1], true, false, -c * p)};
}

VectorExpansion VectorExpansion::advect(const VectorExpansion& v) const {
    ScalarExpansion r1 = c1.times(v.c1.derivative(0)) + c2.times(v.c1.derivative(1));
    ScalarExpansion r2 = c1.times(v.c2.derivative(0)) + c2.times(v.c2.derivative(1));
    return {std::move(r1), std::move(r2)};
}

}  // namespace eulerctl
