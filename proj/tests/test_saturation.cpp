#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <cmath>

#include "eulerctl/saturation.hpp"

using namespace eulerctl;

namespace {
constexpr double kPi = 3.14159265358979323846;

BasisPtr torus(int cutoff) {
    return make_basis(torus_domain(2.0 * kPi, 2.0 * kPi), cutoff);
}

// Independent rank oracle for the bracket recursion: spans are tracked as
// dense column blocks and measured with a rank-revealing QR, no incremental
// frame involved. Returns the dimension after each level.
std::vector<int> oracle_dims(const BasisPtr& basis,
                             const std::vector<Field>& generators,
                             int max_depth) {
    const int D = basis->size();
    auto rank_of = [&](const Eigen::MatrixXd& m) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
        qr.setThreshold(1e-10);
        return static_cast<int>(qr.rank());
    };
    auto orth_of = [&](const Eigen::MatrixXd& m, int rank) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
        qr.setThreshold(1e-10);
        Eigen::MatrixXd q =
            qr.householderQ() * Eigen::MatrixXd::Identity(D, rank);
        return q;
    };

    Eigen::MatrixXd cols(D, generators.size());
    for (size_t i = 0; i < generators.size(); ++i)
        cols.col(static_cast<Eigen::Index>(i)) = generators[i].coeffs();
    std::vector<int> dims;
    int r = rank_of(cols);
    dims.push_back(r);
    Eigen::MatrixXd q = orth_of(cols, r);
    for (int level = 0; level < max_depth; ++level) {
        if (r == D) break;
        Eigen::MatrixXd next(D, r + static_cast<int>(generators.size()) * r);
        next.leftCols(r) = q;
        int c = r;
        for (const Field& g : generators)
            for (int j = 0; j < r; ++j) {
                const Field phi(basis, q.col(j));
                next.col(c++) = calB(g, phi).coeffs();
            }
        const int r2 = rank_of(next);
        if (r2 == r) break;
        r = r2;
        q = orth_of(next, r);
        dims.push_back(r);
    }
    return dims;
}
}  // namespace

TEST_CASE("torus preset saturates the cutoff space, dims match the oracle") {
    const auto b = torus(3);
    const auto gens = torus8_generators(b);
    REQUIRE(gens.size() == 8);
    for (const Field& g : gens) CHECK(norm_H(g) == doctest::Approx(1.0));

    const SaturationResult sat = run_saturation(b, gens);
    CHECK_FALSE(sat.stalled);
    CHECK(sat.space.dim() == b->size());
    CHECK(sat.levels.back().coverage == doctest::Approx(1.0));

    const std::vector<int> want = oracle_dims(b, gens, 16);
    REQUIRE(sat.levels.size() == want.size());
    for (size_t j = 0; j < want.size(); ++j)
        CHECK(sat.levels[j].dim == want[j]);
    CHECK(sat.terminal_level == static_cast<int>(want.size()) - 1);
}

TEST_CASE("a single eigenfield generator stalls immediately") {
    const auto b = torus(2);
    const std::vector<Field> gens{Field::unit_mode(b, 0)};
    const SaturationResult sat = run_saturation(b, gens);
    CHECK(sat.stalled);
    CHECK(sat.space.dim() == 1);
    CHECK(sat.terminal_level == 0);
}

TEST_CASE("saturate_step records bracket origins against the right indices") {
    const auto b = torus(2);
    const auto gens = torus8_generators(b);
    Subspace g0(b);
    for (const Field& g : gens) span_extend(g0, g, {Origin::Kind::Generator, 0, -1});
    const Subspace g1 = saturate_step(g0, g0);
    CHECK(g1.dim() > g0.dim());
    for (size_t i = g0.elements().size(); i < g1.elements().size(); ++i) {
        const Origin& o = g1.origins()[i];
        CHECK(o.kind == Origin::Kind::Bracket);
        REQUIRE(o.psi >= 0);
        REQUIRE(o.psi < static_cast<int>(g0.elements().size()));
        REQUIRE(o.phi >= 0);
        REQUIRE(o.phi < static_cast<int>(i));
        // Recreate the element from the recorded pair.
        const Field want = calB(g0.elements()[static_cast<size_t>(o.psi)],
                                g1.elements()[static_cast<size_t>(o.phi)]);
        CHECK(norm_H(want - g1.elements()[i]) < 1e-12);
    }
}

TEST_CASE("max_depth caps the recursion") {
    const auto b = torus(3);
    SaturationOptions opts;
    opts.max_depth = 1;
    const SaturationResult sat = run_saturation(b, torus8_generators(b), opts);
    CHECK(sat.levels.size() <= 2);
    CHECK(sat.space.dim() < b->size());
}

TEST_CASE("actuator_set keeps eigenfield generators as they are") {
    const auto b = torus(2);
    const auto gens = torus8_generators(b);
    const auto acts = actuator_set(b, gens);
    REQUIRE(acts.size() == gens.size());
    for (size_t i = 0; i < gens.size(); ++i)
        CHECK(norm_H(acts[i] - gens[i]) < 1e-13);
}

TEST_CASE("actuator_set appends independent self-interactions") {
    const auto b = torus(2);
    // Unequal magnitudes: |(1,0)| != |(1,1)|, so the cross term survives.
    const Field e10 = Field::from_modes(b, {{{{1, 0}, Parity::Sin}, 1.0}});
    const Field e11 = Field::from_modes(b, {{{{1, 1}, Parity::Sin}, 1.0}});
    const Field mixed = std::sqrt(0.5) * (e10 + e11);
    const std::vector<Field> gens{mixed, e10};
    const Field self = bilinear_B_self(mixed);
    REQUIRE(norm_H(self) > 1e-8);
    const auto acts = actuator_set(b, gens);
    REQUIRE(acts.size() == 3);
    CHECK(norm_H(acts[2] - self) < 1e-12);
}

TEST_CASE("report serializes levels and the terminal flag") {
    const auto b = torus(2);
    const SaturationResult sat = run_saturation(b, torus8_generators(b));
    const nlohmann::json r = sat.report();
    CHECK(r.at("terminal_level").get<int>() == sat.terminal_level);
    CHECK(r.at("stalled").get<bool>() == sat.stalled);
    REQUIRE(r.at("levels").size() == sat.levels.size());
    CHECK(r.at("levels")[0].at("dim").get<int>() == sat.levels[0].dim);
}
