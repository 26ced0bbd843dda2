#include "eulerctl/saturation.hpp"

#include <stdexcept>

namespace eulerctl {

nlohmann::json SaturationResult::report() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& level : levels) {
        nlohmann::json added = nlohmann::json::array();
        for (const auto& [psi, phi] : level.added)
            added.push_back({{"psi", psi}, {"phi", phi}});
        lv.push_back({{"dim", level.dim},
                      {"coverage", level.coverage},
                      {"added", added}});
    }
    return {{"levels", lv},
            {"terminal_level", terminal_level},
            {"stalled", stalled}};
}

Subspace saturate_step(const Subspace& g0, const Subspace& gj, double tol) {
    if (g0.dim() == 0) throw std::invalid_argument("saturate_step: empty generator span");
    Subspace next = gj;
    for (size_t i = 0; i < g0.elements().size(); ++i)
        for (size_t p = 0; p < gj.elements().size(); ++p) {
            const Field cand = calB(g0.elements()[i], gj.elements()[p]);
            span_extend(next, cand,
                        {Origin::Kind::Bracket, static_cast<int>(i), static_cast<int>(p)},
                        tol);
        }
    return next;
}

SaturationResult run_saturation(const BasisPtr& basis,
                                const std::vector<Field>& generators,
                                const SaturationOptions& opts) {
    if (generators.empty())
        throw std::invalid_argument("run_saturation: generator set is empty");
    for (const Field& g : generators)
        if (norm_H(g) == 0.0)
            throw std::invalid_argument("run_saturation: zero generator field");

    Subspace g0(basis);
    for (const Field& g : generators)
        span_extend(g0, g, {Origin::Kind::Generator, -1, -1}, opts.tol);

    const int D = basis->size();
    SaturationResult res{g0, {}, 0, false};
    res.levels.push_back({g0.dim(), g0.coverage(D), {}});

    for (int j = 1; j <= opts.max_depth; ++j) {
        if (res.levels.back().coverage >= 1.0) break;
        const int before = res.space.dim();
        const Subspace prev = res.space;
        res.space = saturate_step(g0, prev, opts.tol);
        SaturationLevel level;
        level.dim = res.space.dim();
        level.coverage = res.space.coverage(D);
        for (int c = before; c < res.space.dim(); ++c) {
            const Origin& o = res.space.origins()[static_cast<size_t>(c)];
            level.added.push_back({o.psi, o.phi});
        }
        res.levels.push_back(level);
        res.terminal_level = j;
        if (level.dim == before) {
            res.stalled = true;
            res.levels.pop_back();  // the stalled level added nothing
            res.terminal_level = j - 1;
            break;
        }
    }
    return res;
}

std::vector<Field> actuator_set(const BasisPtr& basis,
                                const std::vector<Field>& generators,
                                double tol) {
    if (generators.empty())
        throw std::invalid_argument("actuator_set: generator set is empty");
    Subspace span(basis);
    std::vector<Field> actuators;
    for (const Field& g : generators)
        if (span_extend(span, g, {Origin::Kind::Generator, -1, -1}, tol) ==
            ExtendResult::Added)
            actuators.push_back(g);
    for (const Field& g : generators) {
        const Field bh = bilinear_B_self(g);
        if (norm_H(bh) == 0.0) continue;
        if (span_extend(span, bh, {Origin::Kind::Generator, -1, -1}, tol) ==
            ExtendResult::Added)
            actuators.push_back(bh);
    }
    return actuators;
}

std::vector<Field> torus8_generators(const BasisPtr& basis) {
    if (basis->domain().kind != DomainKind::Torus)
        throw std::invalid_argument("torus8 preset needs a torus domain");
    std::vector<Field> g;
    const std::array<std::array<int, 2>, 4> ks{{{1, 0}, {0, 1}, {1, 1}, {1, -1}}};
    for (const auto& k : ks)
        for (Parity p : {Parity::Sin, Parity::Cos})
            g.push_back(Field::from_modes(basis, {{Mode{k, p}, 1.0}}));
    return g;
}

}  // namespace eulerctl
