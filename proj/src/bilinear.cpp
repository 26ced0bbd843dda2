#include "eulerctl/bilinear.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <numbers>

#include "eulerctl/trig.hpp"

namespace eulerctl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDropTol = 1e-13;  // exact zeros only carry roundoff dust

// Closed-form 1D integrals over [0, L] of products of sin/cos(pi f x / L),
// f >= 0. Mixed parity couples across frequencies; matching parity is
// orthogonal. This keeps the rectangle projection exact without quadrature.
double pair_integral_1d(int f1, bool cos1, int f2, bool cos2, double L) {
    if (!cos1 && !cos2) return (f1 == f2 && f1 > 0) ? 0.5 * L : 0.0;
    if (cos1 && cos2) {
        if (f1 != f2) return 0.0;
        return f1 == 0 ? L : 0.5 * L;
    }
    // One sin, one cos.
    const int fs = cos1 ? f2 : f1;
    const int fc = cos1 ? f1 : f2;
    if (fs == fc) return 0.0;
    if ((fs + fc) % 2 == 0) return 0.0;
    return (L / kPi) * 2.0 * fs /
           (static_cast<double>(fs) * fs - static_cast<double>(fc) * fc);
}

double scalar_inner(const ScalarExpansion& a, const ScalarExpansion& b) {
    const DomainSpec& d = a.domain();
    double sum = 0.0;
    if (d.kind == DomainKind::Torus) {
        for (const auto& [k1, c1] : a.terms()) {
            auto it = b.terms().find(k1);
            if (it == b.terms().end()) continue;
            const bool is_zero_mode = (k1.a == 0 && k1.b == 0);
            sum += c1 * it->second * (is_zero_mode ? d.area() : 0.5 * d.area());
        }
        return sum;
    }
    for (const auto& [k1, c1] : a.terms())
        for (const auto& [k2, c2] : b.terms()) {
            const double ix = pair_integral_1d(k1.a, k1.t & 1, k2.a, k2.t & 1,
                                               d.lengths[0]);
            if (ix == 0.0) continue;
            const double iy = pair_integral_1d(k1.b, (k1.t & 2) != 0, k2.b,
                                               (k2.t & 2) != 0, d.lengths[1]);
            sum += c1 * c2 * ix * iy;
        }
    return sum;
}

double vector_inner(const VectorExpansion& a, const VectorExpansion& b) {
    return scalar_inner(a.c1, b.c1) + scalar_inner(a.c2, b.c2);
}

}  // namespace

InteractionTable::InteractionTable(const SpectralBasis& basis) {
    size_ = basis.size();
    const int M = size_;

    std::vector<VectorExpansion> fields;
    fields.reserve(M);
    for (int i = 0; i < M; ++i) fields.push_back(VectorExpansion::from_basis(basis, i));

    offsets_.assign(static_cast<size_t>(M) * M + 1, 0);
    const bool torus = basis.domain().kind == DomainKind::Torus;

    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            const VectorExpansion adv = fields[i].advect(fields[j]);
            if (torus) {
                // Products couple only the sum and difference wavevectors.
                const Mode& mi = basis.mode(i);
                const Mode& mj = basis.mode(j);
                const std::array<std::array<int, 2>, 2> cands{
                    canonical_wavevector({mi.k[0] + mj.k[0], mi.k[1] + mj.k[1]}),
                    canonical_wavevector({mi.k[0] - mj.k[0], mi.k[1] - mj.k[1]})};
                for (const auto& kv : cands) {
                    if (kv[0] == 0 && kv[1] == 0) continue;
                    for (Parity p : {Parity::Sin, Parity::Cos}) {
                        const int m = basis.index_of({kv, p});
                        if (m < 0) continue;
                        const double c = vector_inner(adv, fields[m]);
                        if (std::abs(c) > kDropTol) entries_.push_back({m, c});
                    }
                }
            } else {
                for (int m = 0; m < M; ++m) {
                    const double c = vector_inner(adv, fields[m]);
                    if (std::abs(c) > kDropTol) entries_.push_back({m, c});
                }
            }
            offsets_[static_cast<size_t>(i) * M + j + 1] =
                static_cast<std::uint32_t>(entries_.size());
        }
    }

    // Symmetrized upper-triangular table for B(y, y).
    sym_offsets_.assign(static_cast<size_t>(M) * (M + 1) / 2 + 1, 0);
    size_t sp = 0;
    for (int i = 0; i < M; ++i) {
        for (int j = i; j < M; ++j) {
            std::map<int, double> merged;
            auto [b1, e1] = pair(i, j);
            for (auto* p = b1; p != e1; ++p) merged[p->k] += p->c;
            if (j > i) {
                auto [b2, e2] = pair(j, i);
                for (auto* p = b2; p != e2; ++p) merged[p->k] += p->c;
            }
            for (const auto& [k, c] : merged)
                if (std::abs(c) > kDropTol) sym_entries_.push_back({k, c});
            ++sp;
            sym_offsets_[sp] = static_cast<std::uint32_t>(sym_entries_.size());
        }
    }
}

std::shared_ptr<const InteractionTable> InteractionTable::get(const BasisPtr& basis) {
    // Keyed by semantic identity and held strongly: tables are expensive to
    // build, identical for equal bases, and small enough to keep for the
    // process lifetime. A pointer key would go stale if an address were
    // recycled for a different basis.
    static std::mutex mu;
    static std::map<std::string, std::shared_ptr<const InteractionTable>> cache;
    std::string key = basis->domain().to_json().dump();
    key += ':';
    key += std::to_string(basis->cutoff());
    std::scoped_lock lock(mu);
    auto& slot = cache[key];
    if (!slot) slot = std::make_shared<const InteractionTable>(*basis);
    return slot;
}

Eigen::VectorXd InteractionTable::apply(const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& z) const {
    const int M = size_;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(M);
    for (int i = 0; i < M; ++i) {
        const double yi = y[i];
        if (yi == 0.0) continue;
        const size_t base = static_cast<size_t>(i) * M;
        for (int j = 0; j < M; ++j) {
            const std::uint32_t s = offsets_[base + j], e = offsets_[base + j + 1];
            if (s == e) continue;
            const double p = yi * z[j];
            if (p == 0.0) continue;
            for (std::uint32_t idx = s; idx < e; ++idx)
                out[entries_[idx].k] += p * entries_[idx].c;
        }
    }
    return out;
}

Eigen::VectorXd InteractionTable::apply_self(const Eigen::VectorXd& y) const {
    const int M = size_;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(M);
    size_t sp = 0;
    for (int i = 0; i < M; ++i) {
        const double yi = y[i];
        if (yi == 0.0) {
            sp += static_cast<size_t>(M - i);
            continue;
        }
        for (int j = i; j < M; ++j, ++sp) {
            const std::uint32_t s = sym_offsets_[sp], e = sym_offsets_[sp + 1];
            if (s == e) continue;
            const double p = yi * y[j];
            if (p == 0.0) continue;
            for (std::uint32_t idx = s; idx < e; ++idx)
                out[sym_entries_[idx].k] += p * sym_entries_[idx].c;
        }
    }
    return out;
}

Field bilinear_B(const Field& y, const Field& z) {
    require_same_basis(y, z);
    auto table = InteractionTable::get(y.basis_ptr());
    return Field(y.basis_ptr(), table->apply(y.coeffs(), z.coeffs()));
}

Field bilinear_B_self(const Field& y) {
    auto table = InteractionTable::get(y.basis_ptr());
    return Field(y.basis_ptr(), table->apply_self(y.coeffs()));
}

Field calB(const Field& z, const Field& y) {
    require_same_basis(z, y);
    auto table = InteractionTable::get(y.basis_ptr());
    return Field(y.basis_ptr(),
                 table->apply(z.coeffs(), y.coeffs()) + table->apply(y.coeffs(), z.coeffs()));
}

double b_form(const Field& y, const Field& z, const Field& w) {
    require_same_basis(y, w);
    return inner_H(bilinear_B(y, z), w);
}

double measure_Cb(const BasisPtr& basis, int trials, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Field y = Field::random_unit(basis, rng);
        const Field z = Field::random_unit(basis, rng);
        const Field w = Field::random_unit(basis, rng);
        const double denom = c1_bound(z);
        if (denom == 0.0) continue;
        worst = std::max(worst, std::abs(b_form(y, z, w)) / denom);
    }
    return worst;
}

}  // namespace eulerctl
