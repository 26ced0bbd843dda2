#include "eulerctl/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "eulerctl/saturation.hpp"

namespace eulerctl {

namespace {

// Line of the first occurrence of "key" in the raw config text, 1-based;
// 0 when unknown.
int key_line(const std::string& raw, const std::string& key) {
    if (raw.empty()) return 0;
    const std::string needle = "\"" + key + "\"";
    const auto pos = raw.find(needle);
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(raw.begin(),
                                           raw.begin() + static_cast<long>(pos),
                                           '\n'));
}

[[noreturn]] void fail(const std::string& raw, const std::string& path,
                       const std::string& key, const std::string& what) {
    std::ostringstream msg;
    msg << "config error at " << (path.empty() ? "(top level)" : path);
    const int line = key_line(raw, key);
    if (line > 0) msg << " (line " << line << ")";
    msg << ": " << what;
    throw ConfigError(msg.str());
}

void check_keys(const nlohmann::json& j, const std::string& raw,
                const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(raw, path, path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) fail(raw, path, key, "unknown key \"" + key + "\"");
    }
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

double require_number(const nlohmann::json& j, const std::string& raw,
                      const std::string& path) {
    if (!j.is_number()) fail(raw, path, path, "expected a number");
    return j.get<double>();
}

void validate_field_desc(const nlohmann::json& j, const std::string& raw,
                         const std::string& path) {
    if (!j.is_object() || !j.contains("kind"))
        fail(raw, path, path, "field descriptor needs a \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") {
        check_keys(j, raw, path, {"kind"});
    } else if (kind == "random") {
        check_keys(j, raw, path, {"kind", "support", "scale", "tag"});
    } else if (kind == "modes") {
        check_keys(j, raw, path, {"kind", "parts"});
        if (!j.contains("parts") || !j.at("parts").is_array())
            fail(raw, path, "parts", "\"modes\" descriptor needs a parts array");
        int idx = 0;
        for (const auto& part : j.at("parts")) {
            const std::string ppath =
                path + ".parts[" + std::to_string(idx++) + "]";
            check_keys(part, raw, ppath, {"k", "parity", "coeff"});
            if (!part.contains("k") || !part.at("k").is_array() ||
                part.at("k").size() != 2)
                fail(raw, ppath, "k", "mode wavevector must be a pair");
            if (!part.contains("coeff"))
                fail(raw, ppath, "coeff", "mode part needs a coefficient");
        }
    } else if (kind == "coeffs") {
        check_keys(j, raw, path, {"kind", "values"});
        if (!j.contains("values") || !j.at("values").is_array())
            fail(raw, path, "values", "\"coeffs\" descriptor needs values");
    } else {
        fail(raw, path, "kind", "unknown field kind \"" + kind + "\"");
    }
}

void validate_forcing_desc(const nlohmann::json& j, const std::string& raw,
                           const std::string& path) {
    if (!j.is_object() || !j.contains("kind"))
        fail(raw, path, path, "forcing descriptor needs a \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") {
        check_keys(j, raw, path, {"kind"});
    } else if (kind == "constant") {
        check_keys(j, raw, path, {"kind", "field"});
        if (!j.contains("field"))
            fail(raw, path, "field", "constant forcing needs a field");
        validate_field_desc(j.at("field"), raw, join(path, "field"));
    } else if (kind == "closed_form") {
        check_keys(j, raw, path, {"kind", "actuators", "coeffs"});
        if (!j.contains("actuators") || !j.at("actuators").is_array())
            fail(raw, path, "actuators", "closed_form forcing needs actuators");
        if (!j.contains("coeffs") || !j.at("coeffs").is_array() ||
            j.at("coeffs").size() != j.at("actuators").size())
            fail(raw, path, "coeffs",
                 "closed_form forcing needs one coefficient per actuator");
        int idx = 0;
        for (const auto& a : j.at("actuators"))
            validate_field_desc(
                a, raw, path + ".actuators[" + std::to_string(idx++) + "]");
    } else if (kind == "sampled") {
        check_keys(j, raw, path, {"kind", "times", "values"});
        if (!j.contains("times") || !j.at("times").is_array() ||
            !j.contains("values") || !j.at("values").is_array() ||
            j.at("times").size() != j.at("values").size())
            fail(raw, path, "times",
                 "sampled forcing needs matching times and values arrays");
    } else {
        fail(raw, path, "kind", "unknown forcing kind \"" + kind + "\"");
    }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

void ExperimentConfig::validate() const {
    domain.validate();
    if (cutoff < 1 || cutoff > 64)
        throw ConfigError("config error: cutoff must lie in [1, 64]");
    if (!(horizon > 0.0)) throw ConfigError("config error: horizon must be > 0");
    if (!(eps > 0.0)) throw ConfigError("config error: eps must be > 0");
    if (!(sbar > 0.0 && sbar < 0.5))
        throw ConfigError("config error: sbar must lie in (0, 1/2)");
    if (generator_preset.empty() && generator_modes.empty())
        throw ConfigError("config error: no generator set");
    if (!generator_preset.empty() && generator_preset != "torus8")
        throw ConfigError("config error: unknown generator preset \"" +
                          generator_preset + "\"");
    if (out_dir.empty()) throw ConfigError("config error: empty out_dir");
    if (!(synthesis.mu0 > 0.0) || !(synthesis.beta0 > 0.0) ||
        synthesis.k0 < 1 || synthesis.mu_doublings < 0 ||
        synthesis.beta_halvings < 0 || synthesis.k_doublings < 0 ||
        !(synthesis.sim_dt > 0.0) || !(synthesis.blowup > 0.0) ||
        !(synthesis.hb_fraction > 0.0 && synthesis.hb_fraction <= 1.0) ||
        !(synthesis.span_tol > 0.0))
        throw ConfigError("config error: invalid synthesis parameters");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                             const std::string& raw) {
    check_keys(j, raw, "",
               {"domain", "cutoff", "generators", "horizon", "eps", "sbar",
                "forcing", "initial", "target", "synthesis", "out_dir",
                "seed"});
    ExperimentConfig cfg;
    if (j.contains("domain")) {
        check_keys(j.at("domain"), raw, "domain", {"kind", "lengths"});
        try {
            cfg.domain = DomainSpec::from_json(j.at("domain"));
        } catch (const std::exception& e) {
            fail(raw, "domain", "domain", e.what());
        }
    }
    if (j.contains("cutoff")) {
        if (!j.at("cutoff").is_number_integer())
            fail(raw, "cutoff", "cutoff", "expected an integer");
        cfg.cutoff = j.at("cutoff").get<int>();
    }
    if (j.contains("generators")) {
        const nlohmann::json& g = j.at("generators");
        check_keys(g, raw, "generators", {"preset", "modes"});
        if (g.contains("preset") == g.contains("modes"))
            fail(raw, "generators", "generators",
                 "give exactly one of \"preset\" or \"modes\"");
        if (g.contains("preset")) {
            cfg.generator_preset = g.at("preset").get<std::string>();
        } else {
            cfg.generator_preset.clear();
            int idx = 0;
            for (const auto& m : g.at("modes")) {
                const std::string mpath =
                    "generators.modes[" + std::to_string(idx++) + "]";
                check_keys(m, raw, mpath, {"k", "parity"});
                if (!m.contains("k") || !m.at("k").is_array() ||
                    m.at("k").size() != 2)
                    fail(raw, mpath, "k", "mode wavevector must be a pair");
                Mode mode;
                mode.k = {m.at("k")[0].get<int>(), m.at("k")[1].get<int>()};
                mode.parity = m.contains("parity")
                                  ? parity_from_name(
                                        m.at("parity").get<std::string>())
                                  : Parity::Sin;
                cfg.generator_modes.push_back(mode);
            }
            if (cfg.generator_modes.empty())
                fail(raw, "generators", "modes", "empty mode list");
        }
    }
    if (j.contains("horizon"))
        cfg.horizon = require_number(j.at("horizon"), raw, "horizon");
    if (j.contains("eps")) cfg.eps = require_number(j.at("eps"), raw, "eps");
    if (j.contains("sbar")) cfg.sbar = require_number(j.at("sbar"), raw, "sbar");
    if (j.contains("forcing")) {
        validate_forcing_desc(j.at("forcing"), raw, "forcing");
        cfg.forcing = j.at("forcing");
    }
    if (j.contains("initial")) {
        validate_field_desc(j.at("initial"), raw, "initial");
        cfg.initial = j.at("initial");
    }
    if (j.contains("target")) {
        validate_field_desc(j.at("target"), raw, "target");
        cfg.target = j.at("target");
    }
    if (j.contains("synthesis")) {
        const nlohmann::json& s = j.at("synthesis");
        check_keys(s, raw, "synthesis",
                   {"mu0", "mu_doublings", "beta0", "beta_halvings", "k0",
                    "k_doublings", "hb_fraction", "span_tol", "sim_dt",
                    "blowup", "log_proof_conditions"});
        SynthesisParams& p = cfg.synthesis;
        if (s.contains("mu0"))
            p.mu0 = require_number(s.at("mu0"), raw, "synthesis.mu0");
        if (s.contains("mu_doublings"))
            p.mu_doublings = s.at("mu_doublings").get<int>();
        if (s.contains("beta0"))
            p.beta0 = require_number(s.at("beta0"), raw, "synthesis.beta0");
        if (s.contains("beta_halvings"))
            p.beta_halvings = s.at("beta_halvings").get<int>();
        if (s.contains("k0")) p.k0 = s.at("k0").get<int>();
        if (s.contains("k_doublings"))
            p.k_doublings = s.at("k_doublings").get<int>();
        if (s.contains("hb_fraction"))
            p.hb_fraction =
                require_number(s.at("hb_fraction"), raw, "synthesis.hb_fraction");
        if (s.contains("span_tol"))
            p.span_tol = require_number(s.at("span_tol"), raw,
                                        "synthesis.span_tol");
        if (s.contains("sim_dt"))
            p.sim_dt = require_number(s.at("sim_dt"), raw, "synthesis.sim_dt");
        if (s.contains("blowup"))
            p.blowup = require_number(s.at("blowup"), raw, "synthesis.blowup");
        if (s.contains("log_proof_conditions"))
            p.log_proof_conditions = s.at("log_proof_conditions").get<bool>();
    }
    if (j.contains("out_dir"))
        cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer())
            fail(raw, "seed", "seed", "expected an integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    cfg.synthesis.sbar = cfg.sbar;
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string raw = buffer.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        const size_t byte = std::min(e.byte, raw.size());
        const int line =
            1 + static_cast<int>(std::count(raw.begin(),
                                            raw.begin() + static_cast<long>(byte),
                                            '\n'));
        std::ostringstream msg;
        msg << "config parse error in " << path << " at line " << line << ": "
            << e.what();
        throw ConfigError(msg.str());
    }
    return from_json(j, raw);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json generators;
    if (!generator_preset.empty()) {
        generators = {{"preset", generator_preset}};
    } else {
        nlohmann::json modes = nlohmann::json::array();
        for (const Mode& m : generator_modes)
            modes.push_back({{"k", {m.k[0], m.k[1]}},
                             {"parity", parity_name(m.parity)}});
        generators = {{"modes", modes}};
    }
    return {{"domain", domain.to_json()},
            {"cutoff", cutoff},
            {"generators", generators},
            {"horizon", horizon},
            {"eps", eps},
            {"sbar", sbar},
            {"forcing", forcing},
            {"initial", initial},
            {"target", target},
            {"synthesis",
             {{"mu0", synthesis.mu0},
              {"mu_doublings", synthesis.mu_doublings},
              {"beta0", synthesis.beta0},
              {"beta_halvings", synthesis.beta_halvings},
              {"k0", synthesis.k0},
              {"k_doublings", synthesis.k_doublings},
              {"hb_fraction", synthesis.hb_fraction},
              {"span_tol", synthesis.span_tol},
              {"sim_dt", synthesis.sim_dt},
              {"blowup", synthesis.blowup},
              {"log_proof_conditions", synthesis.log_proof_conditions}}},
            {"out_dir", out_dir},
            {"seed", seed}};
}

std::string ExperimentConfig::hash() const {
    nlohmann::json j = to_json();
    j.erase("out_dir");  // the location does not change the experiment
    const std::uint64_t h = fnv1a64(j.dump());
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

BasisPtr ExperimentConfig::build_basis() const {
    return make_basis(domain, cutoff);
}

std::vector<Field> ExperimentConfig::build_generators(
    const BasisPtr& basis) const {
    if (generator_preset == "torus8") return torus8_generators(basis);
    std::vector<Field> out;
    out.reserve(generator_modes.size());
    for (const Mode& m : generator_modes) {
        const int idx = basis->index_of(m);
        if (idx < 0) {
            std::ostringstream msg;
            msg << "config error: generator mode (" << m.k[0] << ", " << m.k[1]
                << ", " << parity_name(m.parity)
                << ") is not in the cutoff basis";
            throw ConfigError(msg.str());
        }
        out.push_back(Field::unit_mode(basis, idx));
    }
    return out;
}

Field ExperimentConfig::build_field(const BasisPtr& basis,
                                    const nlohmann::json& descriptor,
                                    std::uint64_t tag) const {
    const std::string kind = descriptor.at("kind").get<std::string>();
    if (kind == "zero") return Field(basis);
    if (kind == "random") {
        const int support = descriptor.value("support", 0);
        const double scale = descriptor.value("scale", 1.0);
        const std::uint64_t t = descriptor.value("tag", tag);
        Rng rng(seed + 0x9E3779B97F4A7C15ULL * (t + 1));
        return Field::random_unit(basis, rng, support) * scale;
    }
    if (kind == "modes") {
        std::vector<std::pair<Mode, double>> parts;
        for (const auto& part : descriptor.at("parts")) {
            Mode m;
            m.k = {part.at("k")[0].get<int>(), part.at("k")[1].get<int>()};
            m.parity = part.contains("parity")
                           ? parity_from_name(
                                 part.at("parity").get<std::string>())
                           : Parity::Sin;
            parts.emplace_back(m, part.at("coeff").get<double>());
        }
        return Field::from_modes(basis, parts);
    }
    if (kind == "coeffs") {
        const auto& values = descriptor.at("values");
        if (static_cast<int>(values.size()) != basis->size())
            throw ConfigError(
                "config error: coeffs length does not match the basis");
        Eigen::VectorXd c(basis->size());
        for (int i = 0; i < basis->size(); ++i) c[i] = values[i].get<double>();
        return Field(basis, std::move(c));
    }
    throw ConfigError("config error: unknown field kind \"" + kind + "\"");
}

Field ExperimentConfig::build_initial(const BasisPtr& basis) const {
    return build_field(basis, initial, 1);
}

Field ExperimentConfig::build_target(const BasisPtr& basis) const {
    return build_field(basis, target, 2);
}

Forcing ExperimentConfig::build_forcing(const BasisPtr& basis) const {
    const std::string kind = forcing.at("kind").get<std::string>();
    if (kind == "zero") return Forcing::zero(basis);
    if (kind == "constant")
        return Forcing::constant(build_field(basis, forcing.at("field"), 3));
    if (kind == "closed_form") {
        std::vector<Field> actuators;
        std::vector<ClosedFormFn> coeffs;
        std::uint64_t tag = 4;
        for (const auto& a : forcing.at("actuators"))
            actuators.push_back(build_field(basis, a, tag++));
        for (const auto& c : forcing.at("coeffs"))
            coeffs.push_back(ClosedFormFn::from_json(c));
        return Forcing::closed_form(
            ControlSchedule(basis, std::move(actuators), std::move(coeffs),
                            horizon));
    }
    if (kind == "sampled") {
        std::vector<double> times;
        std::vector<Eigen::VectorXd> values;
        for (const auto& t : forcing.at("times"))
            times.push_back(t.get<double>());
        for (const auto& row : forcing.at("values")) {
            if (static_cast<int>(row.size()) != basis->size())
                throw ConfigError(
                    "config error: sampled forcing row does not match basis");
            Eigen::VectorXd v(basis->size());
            for (int i = 0; i < basis->size(); ++i) v[i] = row[i].get<double>();
            values.push_back(std::move(v));
        }
        return Forcing::sampled(basis, std::move(times), std::move(values));
    }
    throw ConfigError("config error: unknown forcing kind \"" + kind + "\"");
}

SynthesisParams ExperimentConfig::build_synthesis() const {
    SynthesisParams p = synthesis;
    p.sbar = sbar;
    return p;
}

}  // namespace eulerctl
