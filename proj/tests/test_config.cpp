#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "eulerctl/config.hpp"

using namespace eulerctl;

namespace {

std::string write_temp(const std::string& text) {
    const std::string path = "config_test_tmp.json";
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

}  // namespace

TEST_CASE("fnv1a64 matches the reference vectors") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
    CHECK(fnv1a64("foobar") == 0x85944171F73967E8ULL);
}

TEST_CASE("defaults validate and round-trip through json") {
    ExperimentConfig cfg;
    cfg.validate();
    const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.to_json().dump() == cfg.to_json().dump());
    CHECK(cfg.hash().size() == 16);
    CHECK(cfg.hash() == back.hash());
}

TEST_CASE("hash ignores the output location but nothing else") {
    ExperimentConfig a;
    ExperimentConfig b;
    b.out_dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    ExperimentConfig c;
    c.cutoff = 9;
    CHECK(a.hash() != c.hash());
    ExperimentConfig d;
    d.seed = 2;
    CHECK(a.hash() != d.hash());
    ExperimentConfig e;
    e.synthesis.k0 = 16;
    CHECK(a.hash() != e.hash());
}

TEST_CASE("unknown keys are rejected with their line") {
    const std::string raw = R"({
  "cutoff": 4,
  "cutofff": 5
})";
    try {
        ExperimentConfig::from_json(nlohmann::json::parse(raw), raw);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("cutofff") != std::string::npos);
        CHECK(what.find("line 3") != std::string::npos);
    }
}

TEST_CASE("nested unknown keys are rejected too") {
    const nlohmann::json j = {
        {"synthesis", {{"mu0", 2.0}, {"muu0", 3.0}}}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);
    const nlohmann::json j2 = {{"initial", {{"kind", "zero"}, {"x", 1}}}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j2), ConfigError);
    const nlohmann::json j3 = {
        {"generators",
         {{"preset", "torus8"}, {"modes", nlohmann::json::array()}}}};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j3), ConfigError);
}

TEST_CASE("validation bounds") {
    ExperimentConfig cfg;
    cfg.cutoff = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.cutoff = 65;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.cutoff = 8;
    cfg.sbar = 0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.sbar = 0.25;
    cfg.generator_preset = "torus9";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.generator_preset = "torus8";
    cfg.synthesis.hb_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.synthesis.hb_fraction = 0.5;
    cfg.validate();
}

TEST_CASE("load reports the parse line for malformed text") {
    const std::string path = write_temp("{\n  \"cutoff\": 4,\n  oops\n}\n");
    try {
        ExperimentConfig::load(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(ExperimentConfig::load("no_such_file.json"), ConfigError);
}

TEST_CASE("load accepts a full well-formed config") {
    const std::string raw = R"({
  "domain": {"kind": "torus", "lengths": [6.283185307179586, 6.283185307179586]},
  "cutoff": 3,
  "generators": {"preset": "torus8"},
  "horizon": 0.5,
  "eps": 0.2,
  "sbar": 0.3,
  "forcing": {"kind": "constant", "field": {"kind": "random", "scale": 0.1}},
  "initial": {"kind": "modes", "parts": [{"k": [1, 0], "parity": "sin", "coeff": 0.3}]},
  "target": {"kind": "zero"},
  "synthesis": {"mu0": 2.0, "k0": 4},
  "out_dir": "runs/a",
  "seed": 7
})";
    const std::string path = write_temp(raw);
    const ExperimentConfig cfg = ExperimentConfig::load(path);
    std::remove(path.c_str());
    CHECK(cfg.cutoff == 3);
    CHECK(cfg.horizon == 0.5);
    CHECK(cfg.synthesis.mu0 == 2.0);
    CHECK(cfg.synthesis.k0 == 4);
    CHECK(cfg.synthesis.sbar == 0.3);  // mirrored from the top level
    CHECK(cfg.seed == 7);

    const auto basis = cfg.build_basis();
    CHECK(basis->cutoff() == 3);
    const Field y0 = cfg.build_initial(basis);
    CHECK(norm_H(y0) == doctest::Approx(0.3));
    CHECK(norm_H(cfg.build_target(basis)) == 0.0);
    const Forcing f = cfg.build_forcing(basis);
    CHECK(f.kind() == Forcing::Kind::ClosedForm);
    CHECK(norm_H(f.at(0.0)) == doctest::Approx(0.1));
    CHECK(cfg.build_generators(basis).size() == 8);
}

TEST_CASE("random fields are pinned by seed and tag") {
    ExperimentConfig cfg;
    cfg.initial = {{"kind", "random"}, {"scale", 0.5}};
    cfg.target = {{"kind", "random"}, {"scale", 0.5}};
    const auto basis = cfg.build_basis();
    const Field a = cfg.build_initial(basis);
    const Field b = cfg.build_initial(basis);
    for (int i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    // Different tags give different draws; same draw under the same tag.
    const Field c = cfg.build_target(basis);
    CHECK(norm_H(a - c) > 1e-3);
    ExperimentConfig other = cfg;
    other.seed = 99;
    CHECK(norm_H(other.build_initial(basis) - a) > 1e-3);
}

TEST_CASE("explicit generator modes resolve against the basis") {
    ExperimentConfig cfg;
    cfg.cutoff = 2;
    cfg.generator_preset.clear();
    cfg.generator_modes = {{{1, 0}, Parity::Sin}, {{0, 1}, Parity::Cos}};
    cfg.validate();
    const auto basis = cfg.build_basis();
    const auto gens = cfg.build_generators(basis);
    REQUIRE(gens.size() == 2);
    for (const Field& g : gens) CHECK(norm_H(g) == doctest::Approx(1.0));
    // A mode outside the cutoff is an error that names the mode.
    cfg.generator_modes.push_back({{5, 5}, Parity::Sin});
    try {
        cfg.build_generators(basis);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("(5, 5") != std::string::npos);
    }
}

TEST_CASE("coeffs descriptor length must match the basis") {
    ExperimentConfig cfg;
    cfg.cutoff = 1;
    cfg.initial = {{"kind", "coeffs"}, {"values", {1.0, 0.0}}};
    const auto basis = cfg.build_basis();
    CHECK_THROWS_AS(cfg.build_initial(basis), ConfigError);
    std::vector<double> v(static_cast<size_t>(basis->size()), 0.0);
    v[0] = 2.0;
    cfg.initial = {{"kind", "coeffs"}, {"values", v}};
    CHECK(norm_H(cfg.build_initial(basis)) == doctest::Approx(2.0));
}
