#pragma once

#include "eulerctl/synthesis.hpp"

namespace eulerctl {

// Config rejection with the offending JSON path and, when the raw text is
// available, the line the key first appears on.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

std::uint64_t fnv1a64(std::string_view s);

// One experiment: domain, discretization, generator set, steering tuple
// (T, eps, sbar), forcing, endpoint fields, synthesis knobs, output
// location and the seed that pins every random draw.
struct ExperimentConfig {
    DomainSpec domain = torus_domain(2.0 * 3.14159265358979323846,
                                     2.0 * 3.14159265358979323846);
    int cutoff = 8;
    std::string generator_preset = "torus8";  // empty when modes are explicit
    std::vector<Mode> generator_modes;
    double horizon = 1.0;
    double eps = 0.1;
    double sbar = 0.25;
    nlohmann::json forcing = {{"kind", "zero"}};
    nlohmann::json initial = {{"kind", "zero"}};
    nlohmann::json target = {{"kind", "zero"}};
    SynthesisParams synthesis;
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    void validate() const;

    // Rejects unknown keys at every level; `raw` (when given) is the config
    // text used to report the line of the offending key.
    static ExperimentConfig from_json(const nlohmann::json& j,
                                      const std::string& raw = {});
    static ExperimentConfig load(const std::string& path);
    nlohmann::json to_json() const;

    // FNV-1a of the canonical serialization: names every produced artifact.
    std::string hash() const;

    BasisPtr build_basis() const;
    std::vector<Field> build_generators(const BasisPtr& basis) const;
    // Field descriptors: zero | random {support, scale, tag} | modes {parts}
    // | coeffs {values}. Random draws come from `seed` offset by the tag.
    Field build_field(const BasisPtr& basis, const nlohmann::json& descriptor,
                      std::uint64_t tag) const;
    Field build_initial(const BasisPtr& basis) const;
    Field build_target(const BasisPtr& basis) const;
    Forcing build_forcing(const BasisPtr& basis) const;
    SynthesisParams build_synthesis() const;
};

}  // namespace eulerctl
