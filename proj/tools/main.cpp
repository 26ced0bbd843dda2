#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "eulerctl/checks.hpp"
#include "eulerctl/config.hpp"

namespace fs = std::filesystem;
using namespace eulerctl;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string csv_header(const std::string& hash) {
    return "# config_hash=" + hash + "\n";
}

int run_saturate(const ExperimentConfig& cfg, const fs::path& out, bool quiet) {
    BasisPtr basis = cfg.build_basis();
    SaturationOptions opts;
    opts.tol = cfg.synthesis.span_tol;
    SaturationResult sat =
        run_saturation(basis, cfg.build_generators(basis), opts);
    nlohmann::json j = {{"config_hash", cfg.hash()},
                        {"cutoff", cfg.cutoff},
                        {"ambient_dim", basis->size()},
                        {"report", sat.report()}};
    write_json(out / "saturation.json", j);
    std::ostringstream csv;
    csv << csv_header(cfg.hash()) << "level,dim,coverage\n";
    for (size_t i = 0; i < sat.levels.size(); ++i)
        csv << i << "," << sat.levels[i].dim << "," << sat.levels[i].coverage
            << "\n";
    write_text(out / "coverage.csv", csv.str());
    if (!quiet)
        std::cout << "saturation: terminal level " << sat.terminal_level
                  << ", dim " << sat.space.dim() << " of " << basis->size()
                  << (sat.stalled ? " (stalled)" : "") << "\n";
    return 0;
}

int run_synthesize(const ExperimentConfig& cfg, const fs::path& out,
                   bool quiet) {
    BasisPtr basis = cfg.build_basis();
    Field y0 = cfg.build_initial(basis);
    Field ya = cfg.build_target(basis);
    Forcing f = cfg.build_forcing(basis);
    PipelineResult result =
        full_pipeline(y0, ya, f, cfg.eps, cfg.build_generators(basis),
                      cfg.horizon, cfg.build_synthesis());

    nlohmann::json artifact =
        synthesis_artifact(cfg.domain, cfg.cutoff, y0, ya, f, result,
                           cfg.build_synthesis());
    artifact["config_hash"] = cfg.hash();
    write_json(out / "artifact.json", artifact);
    write_json(out / "report.json",
               {{"config_hash", cfg.hash()}, {"report", result.report}});
    std::ostringstream csv;
    csv << csv_header(cfg.hash());
    result.verification.write_csv(csv, &ya);
    write_text(out / "trajectory.csv", csv.str());
    if (!quiet)
        std::cout << "synthesize: final error " << result.final_error
                  << " against eps " << cfg.eps
                  << (result.pass ? " (pass)" : " (fail)") << "\n";
    return result.pass ? 0 : 1;
}

int run_simulate(const ExperimentConfig& cfg, const fs::path& out, bool quiet) {
    BasisPtr basis = cfg.build_basis();
    Field y0 = cfg.build_initial(basis);
    Field ya = cfg.build_target(basis);
    Forcing f = cfg.build_forcing(basis);
    ControlSchedule none = ControlSchedule::zero(basis, cfg.horizon);
    SimOptions opts;
    opts.dt = cfg.synthesis.sim_dt;
    opts.blowup_bound = cfg.synthesis.blowup;
    const double h = effective_step(cfg.horizon, opts, f, none);
    const auto steps = static_cast<long long>(std::llround(cfg.horizon / h));
    opts.series_stride = static_cast<int>(std::max(1LL, steps / 4096));
    opts.snapshot_stride = static_cast<int>(std::max(1LL, steps / 16));
    Trajectory traj = integrate(y0, cfg.horizon, f, none, opts);

    std::ostringstream csv;
    csv << csv_header(cfg.hash());
    traj.write_csv(csv, &ya);
    write_text(out / "trajectory.csv", csv.str());
    nlohmann::json j = traj.to_json();
    j["config_hash"] = cfg.hash();
    write_json(out / "trajectory.json", j);
    if (!quiet)
        std::cout << "simulate: " << traj.times.size()
                  << " recorded points, final distance to target "
                  << norm_H(traj.final_state() - ya) << "\n";
    return 0;
}

int run_verify(const ExperimentConfig& cfg, const fs::path& out, bool quiet) {
    std::vector<CheckResult> results = default_suite(cfg.cutoff);
    std::ostringstream jsonl;
    jsonl << "{\"config_hash\":\"" << cfg.hash() << "\"}\n";
    write_jsonl(jsonl, results);
    write_text(out / "checks.jsonl", jsonl.str());
    std::ostringstream csv;
    csv << csv_header(cfg.hash());
    write_csv_summary(csv, results);
    write_text(out / "checks.csv", csv.str());
    bool ok = all_pass(results);
    if (!quiet) {
        for (const CheckResult& r : results)
            std::cout << (r.pass ? "pass  " : "FAIL  ") << r.id << "\n";
        std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";
    }
    return ok ? 0 : 1;
}

int run_replay(const ExperimentConfig& cfg, const fs::path& out,
               const std::string& artifact_path, bool quiet) {
    const fs::path source =
        artifact_path.empty() ? out / "artifact.json" : fs::path(artifact_path);
    std::ifstream in(source);
    if (!in)
        throw std::runtime_error("replay: cannot open " + source.string());
    nlohmann::json artifact = nlohmann::json::parse(in);
    ReplayResult r = replay_artifact(artifact);
    nlohmann::json j = {{"config_hash", artifact.value("config_hash",
                                                       cfg.hash())},
                        {"replayed_error", r.replayed_error},
                        {"logged_error", r.logged_error},
                        {"match", r.match}};
    write_json(out / "replay.json", j);
    if (!quiet)
        std::cout << "replay: error " << r.replayed_error << " vs logged "
                  << r.logged_error << (r.match ? " (match)" : " (MISMATCH)")
                  << "\n";
    return r.match ? 0 : 1;
}

int run_report(const ExperimentConfig& cfg, const fs::path& out, bool quiet) {
    nlohmann::json summary = {{"config_hash", cfg.hash()}};
    int gathered = 0;

    const fs::path sat_path = out / "saturation.json";
    if (fs::exists(sat_path)) {
        nlohmann::json sat = nlohmann::json::parse(std::ifstream(sat_path));
        summary["saturation"] = sat;
        std::ostringstream csv;
        csv << csv_header(cfg.hash()) << "level,dim,coverage\n";
        int level = 0;
        for (const auto& row : sat.at("report").at("levels"))
            csv << level++ << "," << row.at("dim").get<int>() << ","
                << row.at("coverage").get<double>() << "\n";
        write_text(out / "coverage_vs_level.csv", csv.str());
        ++gathered;
    }
    const fs::path artifact_path = out / "artifact.json";
    if (fs::exists(artifact_path)) {
        nlohmann::json artifact =
            nlohmann::json::parse(std::ifstream(artifact_path));
        summary["synthesis"] = {{"final_error", artifact.at("final_error")},
                                {"eps", artifact.at("eps")},
                                {"pass", artifact.at("pass")}};
        if (artifact.contains("report") &&
            artifact.at("report").contains("steps")) {
            std::ostringstream csv;
            csv << csv_header(cfg.hash()) << "step,beta,K,error\n";
            int step = 0;
            for (const auto& s : artifact.at("report").at("steps")) {
                if (s.contains("details") && s.at("details").contains("trail"))
                    for (const auto& row : s.at("details").at("trail"))
                        if (row.contains("K"))
                            csv << step << "," << row.at("beta").get<double>()
                                << "," << row.at("K").get<int>() << ","
                                << row.at("error").get<double>() << "\n";
                ++step;
            }
            write_text(out / "error_vs_K.csv", csv.str());
        }
        ++gathered;
    }
    const fs::path checks_path = out / "checks.jsonl";
    if (fs::exists(checks_path)) {
        std::ifstream in(checks_path);
        nlohmann::json checks = nlohmann::json::array();
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json row = nlohmann::json::parse(line);
            if (row.contains("id"))
                checks.push_back({{"id", row.at("id")}, {"pass", row.at("pass")}});
        }
        summary["checks"] = checks;
        ++gathered;
    }

    if (gathered == 0) {
        std::cerr << "report: nothing to aggregate in " << out << "\n";
        return 1;
    }
    write_json(out / "summary.json", summary);
    if (!quiet)
        std::cout << "report: aggregated " << gathered << " artifact(s) into "
                  << (out / "summary.json").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral 2D Euler steering toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_override;
    std::string artifact_path;
    std::uint64_t seed_override = 0;
    int cutoff_override = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_override, "output directory override");
    auto* seed_opt =
        app.add_option("--seed", seed_override, "seed override");
    auto* cutoff_opt =
        app.add_option("--cutoff", cutoff_override, "cutoff override");
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto* cmd_saturate =
        app.add_subcommand("saturate", "bracket recursion over the generators");
    auto* cmd_synthesize =
        app.add_subcommand("synthesize", "build the steering control");
    auto* cmd_simulate =
        app.add_subcommand("simulate", "integrate the forced flow");
    auto* cmd_verify = app.add_subcommand("verify", "run the lemma checks");
    auto* cmd_replay =
        app.add_subcommand("replay", "re-simulate a serialized schedule");
    cmd_replay->add_option("--artifact", artifact_path,
                           "artifact file (default: <out>/artifact.json)");
    auto* cmd_report =
        app.add_subcommand("report", "aggregate artifacts and plot data");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
        if (seed_opt->count() > 0) cfg.seed = seed_override;
        if (cutoff_opt->count() > 0) cfg.cutoff = cutoff_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        cfg.validate();

        const fs::path out(cfg.out_dir);
        fs::create_directories(out);

        if (*cmd_saturate) return run_saturate(cfg, out, quiet);
        if (*cmd_synthesize) return run_synthesize(cfg, out, quiet);
        if (*cmd_simulate) return run_simulate(cfg, out, quiet);
        if (*cmd_verify) return run_verify(cfg, out, quiet);
        if (*cmd_replay) return run_replay(cfg, out, artifact_path, quiet);
        if (*cmd_report) return run_report(cfg, out, quiet);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
