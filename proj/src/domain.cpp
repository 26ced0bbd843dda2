#include "eulerctl/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eulerctl {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t mode_key(const Mode& m) {
    const auto u = static_cast<std::uint64_t>(static_cast<std::uint32_t>(m.k[0]));
    const auto v = static_cast<std::uint64_t>(static_cast<std::uint32_t>(m.k[1]));
    return (u << 33) ^ (v << 1) ^ static_cast<std::uint64_t>(m.parity);
}

}  // namespace

void DomainSpec::validate() const {
    if (!(lengths[0] > 0.0) || !(lengths[1] > 0.0) ||
        !std::isfinite(lengths[0]) || !std::isfinite(lengths[1]))
        throw std::invalid_argument("domain lengths must be positive and finite");
}

nlohmann::json DomainSpec::to_json() const {
    return {{"kind", kind == DomainKind::Torus ? "torus" : "rectangle"},
            {"lengths", {lengths[0], lengths[1]}}};
}

DomainSpec DomainSpec::from_json(const nlohmann::json& j) {
    DomainSpec d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "torus")
        d.kind = DomainKind::Torus;
    else if (kind == "rectangle")
        d.kind = DomainKind::RectangleLions;
    else
        throw std::invalid_argument("unknown domain kind: " + kind);
    const auto& len = j.at("lengths");
    if (!len.is_array() || len.size() != 2)
        throw std::invalid_argument("domain lengths must be a pair");
    d.lengths = {len[0].get<double>(), len[1].get<double>()};
    d.validate();
    return d;
}

DomainSpec torus_domain(double L1, double L2) {
    DomainSpec d{DomainKind::Torus, {L1, L2}};
    d.validate();
    return d;
}

DomainSpec rectangle_domain(double L1, double L2) {
    DomainSpec d{DomainKind::RectangleLions, {L1, L2}};
    d.validate();
    return d;
}

const char* parity_name(Parity p) { return p == Parity::Sin ? "sin" : "cos"; }

Parity parity_from_name(const std::string& s) {
    if (s == "sin") return Parity::Sin;
    if (s == "cos") return Parity::Cos;
    throw std::invalid_argument("unknown parity: " + s);
}

std::array<int, 2> canonical_wavevector(std::array<int, 2> k, int* sign) {
    int s = 1;
    if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) {
        k = {-k[0], -k[1]};
        s = -1;
    }
    if (sign) *sign = s;
    return k;
}

SpectralBasis SpectralBasis::enumerate(const DomainSpec& domain, int cutoff) {
    domain.validate();
    if (cutoff < 1) throw std::invalid_argument("spectral cutoff must be >= 1");

    SpectralBasis b;
    b.domain_ = domain;
    b.cutoff_ = cutoff;

    const double L1 = domain.lengths[0], L2 = domain.lengths[1];
    auto lam = [&](const std::array<int, 2>& k) {
        double k1, k2;
        if (domain.kind == DomainKind::Torus) {
            k1 = 2.0 * kPi * k[0] / L1;
            k2 = 2.0 * kPi * k[1] / L2;
        } else {
            k1 = kPi * k[0] / L1;
            k2 = kPi * k[1] / L2;
        }
        return 1.0 + k1 * k1 + k2 * k2;
    };

    if (domain.kind == DomainKind::Torus) {
        for (int k1 = -cutoff; k1 <= cutoff; ++k1)
            for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                const std::array<int, 2> k{k1, k2};
                if (canonical_wavevector(k) != k) continue;
                b.modes_.push_back({k, Parity::Sin});
                b.modes_.push_back({k, Parity::Cos});
            }
    } else {
        for (int m = 1; m <= cutoff; ++m)
            for (int n = 1; n <= cutoff; ++n)
                b.modes_.push_back({{m, n}, Parity::Sin});
    }

    std::sort(b.modes_.begin(), b.modes_.end(), [&](const Mode& a, const Mode& c) {
        const double la = lam(a.k), lc = lam(c.k);
        if (la != lc) return la < lc;
        if (a.k != c.k) return a.k < c.k;
        return a.parity < c.parity;
    });

    b.lambda_.reserve(b.modes_.size());
    for (size_t i = 0; i < b.modes_.size(); ++i) {
        b.lambda_.push_back(lam(b.modes_[i].k));
        b.lookup_.emplace(mode_key(b.modes_[i]), static_cast<int>(i));
    }
    return b;
}

Eigen::Vector2d SpectralBasis::kappa(int i) const {
    const Mode& m = modes_[static_cast<size_t>(i)];
    if (domain_.kind == DomainKind::Torus)
        return {2.0 * kPi * m.k[0] / domain_.lengths[0],
                2.0 * kPi * m.k[1] / domain_.lengths[1]};
    return {kPi * m.k[0] / domain_.lengths[0], kPi * m.k[1] / domain_.lengths[1]};
}

int SpectralBasis::index_of(const Mode& m) const {
    auto it = lookup_.find(mode_key(m));
    return it == lookup_.end() ? -1 : it->second;
}

double SpectralBasis::mode_amplitude() const {
    if (domain_.kind == DomainKind::Torus) return std::sqrt(2.0 / domain_.area());
    return 2.0 / std::sqrt(domain_.area());
}

Eigen::Vector2d SpectralBasis::evaluate(int i, const Eigen::Vector2d& x) const {
    const Mode& m = modes_[static_cast<size_t>(i)];
    const Eigen::Vector2d kp = kappa(i);
    if (domain_.kind == DomainKind::Torus) {
        const double phase = kp.dot(x);
        const double t = m.parity == Parity::Sin ? std::sin(phase) : std::cos(phase);
        const Eigen::Vector2d dir = Eigen::Vector2d(-kp[1], kp[0]) / kp.norm();
        return mode_amplitude() * t * dir;
    }
    // e = c * perp_grad(sin(p x1) sin(q x2)) with perp_grad g = (d2 g, -d1 g).
    const double p = kp[0], q = kp[1];
    const double c = 2.0 / (kp.norm() * std::sqrt(domain_.area()));
    const double s1 = std::sin(p * x[0]), c1 = std::cos(p * x[0]);
    const double s2 = std::sin(q * x[1]), c2 = std::cos(q * x[1]);
    return {c * q * s1 * c2, -c * p * c1 * s2};
}

Eigen::Matrix2d SpectralBasis::evaluate_gradient(int i, const Eigen::Vector2d& x) const {
    const Mode& m = modes_[static_cast<size_t>(i)];
    const Eigen::Vector2d kp = kappa(i);
    Eigen::Matrix2d g;
    if (domain_.kind == DomainKind::Torus) {
        const double phase = kp.dot(x);
        const double dt = m.parity == Parity::Sin ? std::cos(phase) : -std::sin(phase);
        const Eigen::Vector2d dir = mode_amplitude() * Eigen::Vector2d(-kp[1], kp[0]) / kp.norm();
        g(0, 0) = dir[0] * dt * kp[0];
        g(0, 1) = dir[0] * dt * kp[1];
        g(1, 0) = dir[1] * dt * kp[0];
        g(1, 1) = dir[1] * dt * kp[1];
        return g;
    }
    const double p = kp[0], q = kp[1];
    const double c = 2.0 / (kp.norm() * std::sqrt(domain_.area()));
    const double s1 = std::sin(p * x[0]), c1 = std::cos(p * x[0]);
    const double s2 = std::sin(q * x[1]), c2 = std::cos(q * x[1]);
    g(0, 0) = c * q * p * c1 * c2;
    g(0, 1) = -c * q * q * s1 * s2;
    g(1, 0) = c * p * p * s1 * s2;
    g(1, 1) = -c * p * q * c1 * c2;
    return g;
}

double SpectralBasis::evaluate_vorticity(int i, const Eigen::Vector2d& x) const {
    const Mode& m = modes_[static_cast<size_t>(i)];
    const Eigen::Vector2d kp = kappa(i);
    if (domain_.kind == DomainKind::Torus) {
        const double phase = kp.dot(x);
        const double amp = mode_amplitude() * kp.norm();
        return m.parity == Parity::Sin ? amp * std::cos(phase) : -amp * std::sin(phase);
    }
    const double c = 2.0 / (kp.norm() * std::sqrt(domain_.area()));
    return c * kp.squaredNorm() * std::sin(kp[0] * x[0]) * std::sin(kp[1] * x[1]);
}

nlohmann::json SpectralBasis::manifest() const {
    nlohmann::json modes = nlohmann::json::array();
    for (int i = 0; i < size(); ++i) {
        modes.push_back({{"wavevector", {modes_[i].k[0], modes_[i].k[1]}},
                         {"parity", parity_name(modes_[i].parity)},
                         {"lambda", lambda_[i]}});
    }
    return {{"domain", domain_.to_json()}, {"cutoff", cutoff_}, {"modes", modes}};
}

BasisPtr make_basis(const DomainSpec& domain, int cutoff) {
    return std::make_shared<const SpectralBasis>(SpectralBasis::enumerate(domain, cutoff));
}

}  // namespace eulerctl
