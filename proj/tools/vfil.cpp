#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "vfil/experiments/run.hpp"

namespace fs = std::filesystem;
using namespace vfil;
using namespace vfil::experiments;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kCollision = 3 };

int exit_for(const RunManifest& m) {
    int code = kOk;
    for (const auto& r : m.runs) {
        if (r.status == "collision") code = std::max(code, int(kCollision));
        else if (r.status != "ok") code = code == kCollision ? code : int(kNumeric);
    }
    return code;
}

void print_manifest(const RunManifest& m, const std::string& out) {
    std::printf("config %s, gamma %.6f, output %s\n", m.config_hash.c_str(), m.gamma, out.c_str());
    for (const auto& r : m.runs) {
        std::printf("  eps %-8s %-10s sup_disc %-12s sup/h %-12s gap %s\n", fmt(r.epsilon).c_str(), r.status.c_str(),
                    fmt(r.sup_discrepancy).c_str(), fmt(r.sup_over_h).c_str(), fmt(r.energy_gap).c_str());
        for (const auto& [k, v] : r.measured) std::printf("    %s = %s\n", k.c_str(), fmt(v).c_str());
        for (const auto& [k, v] : r.checks) std::printf("    check %s: %s\n", k.c_str(), v ? "pass" : "fail");
    }
}

int cmd_run(const std::string& path, RunMode mode, int workers, const std::string& output) {
    ExperimentConfig c = load_config(path);
    if (workers > 0) c.workers = workers;
    if (!output.empty()) c.output_dir = output;
    const auto m = run_experiment(c, mode);
    print_manifest(m, c.output_dir);
    return exit_for(m);
}

int cmd_gamma(double tol, double spacing, const std::string& cache) {
    const auto g = estimate_gamma(tol, spacing);
    for (std::size_t i = 0; i < g.eps.size(); ++i)
        std::printf("eps %-10s E - pi|log eps| = %.8f\n", fmt(g.eps[i]).c_str(), g.raw[i]);
    std::printf("gamma %.8f\n", g.gamma);
    if (!cache.empty()) {
        std::ofstream os(cache);
        if (!os) throw FormatError("cannot write " + cache);
        os << nlohmann::json{{"gamma", g.gamma}, {"tol", tol}, {"spacing", spacing}}.dump(2) << "\n";
        std::printf("written to %s\n", cache.c_str());
    }
    return kOk;
}

std::string trajectory_file(const std::string& p, const char* name) {
    return fs::is_directory(p) ? (fs::path(p) / name).string() : p;
}

double epsilon_from_path(const std::string& p) {
    for (fs::path q = fs::absolute(p); !q.empty() && q != q.root_path(); q = q.parent_path()) {
        const std::string s = q.filename().string();
        if (s.rfind("eps_", 0) == 0) return std::stod(s.substr(4));
    }
    return 0.0;
}

int cmd_compare(const std::string& a, const std::string& b, double eps, bool fstar) {
    const auto ta = read_trajectory(trajectory_file(a, "kmd_trajectory.csv"));
    const auto tb = read_trajectory(trajectory_file(b, fstar ? "gp_fstar.csv" : "kmd_trajectory.csv"));
    if (eps <= 0.0) eps = epsilon_from_path(a);
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameters("pass --eps (could not infer it from the path)");
    const auto table = compare_trajectories(ta, tb, eps);
    std::printf("t,distance,physical_distance,I1,I2,I3\n");
    for (const auto& r : table.rows)
        std::printf("%s,%s,%s,%s,%s,%s\n", fmt(r.t).c_str(), fmt(r.distance).c_str(), fmt(r.physical).c_str(),
                    fmt(r.I1).c_str(), fmt(r.I2).c_str(), fmt(r.I3).c_str());
    std::printf("# sup_distance %s\n# integral_distance %s\n", fmt(table.sup_distance).c_str(),
                fmt(table.integral_distance).c_str());
    return kOk;
}

int cmd_check(const std::string& path) {
    const auto u = gp::checkpoint_load(path);
    const auto& g = u.geom;
    std::printf("grid %dx%dx%d  box [%s, %s] x [%s, %s] x [0, %s]\n", g.nx, g.ny, g.nz, fmt(-g.half_x).c_str(),
                fmt(g.half_x).c_str(), fmt(-g.half_y).c_str(), fmt(g.half_y).c_str(), fmt(g.L).c_str());
    std::printf("eps %s  t_phys %s  t_rescaled %s\n", fmt(u.epsilon).c_str(), fmt(u.t_phys).c_str(),
                fmt(u.t_phys * -std::log(u.epsilon)).c_str());
    const auto detected = metrics::detect_all(u);
    std::size_t total = 0;
    int charge = 0;
    for (const auto& s : detected) {
        total += s.vortices.size();
        charge += s.total_charge();
    }
    std::printf("vortices %zu over %d slices (net charge %d)\n", total, g.nz, charge);
    for (const auto& v : detected[0].vortices)
        std::printf("  slice 0: (%s, %s) charge %d\n", fmt(v.centre.x).c_str(), fmt(v.centre.y).c_str(), v.charge);
    const auto e = gp::energy_G_eps(u, 1, 0.0);  // only the uncorrected integrals are printed
    std::printf("mass %s\nraw energy %s\nstandard energy %s\n", fmt(gp::mass(u)).c_str(), fmt(e.raw_energy).c_str(),
                fmt(e.standard_e_integral).c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vortex filament experiments: KMD filaments, Gross-Pitaevskii fields and their comparison"};
    app.require_subcommand(1);

    std::string config, output;
    int workers = 0;
    auto add_config_cmd = [&](const char* name, const char* help) {
        auto* c = app.add_subcommand(name, help);
        c->add_option("config", config, "experiment config file")->required();
        c->add_option("--workers", workers, "concurrent epsilon runs");
        c->add_option("--output", output, "output directory (overrides run.output_dir)");
        return c;
    };
    auto* run = add_config_cmd("run", "coupled KMD and GP run with diagnostics");
    auto* kmd_cmd = add_config_cmd("kmd", "filament dynamics only");
    auto* gp_cmd = add_config_cmd("gp", "GP field evolution only");

    double tol = 1e-3, spacing = 0.01;
    std::string cache;
    auto* gamma = app.add_subcommand("gamma", "calibrate the core constant gamma");
    gamma->add_option("--tol", tol, "agreement of successive extrapolations");
    gamma->add_option("--spacing", spacing, "radial grid spacing in core units");
    gamma->add_option("--cache", cache, "write the value to this JSON file");

    std::string run_a, run_b;
    double eps = 0.0;
    bool fstar = false;
    auto* compare = app.add_subcommand("compare", "compare two trajectories (run directories or CSV files)");
    compare->add_option("runA", run_a, "reference run directory or trajectory CSV")->required();
    compare->add_option("runB", run_b, "second run directory or trajectory CSV")->required();
    compare->add_option("--eps", eps, "epsilon (default: taken from an eps_* path component)");
    compare->add_flag("--fstar", fstar, "use runB's GP-extracted filaments (gp_fstar.csv)");

    std::string checkpoint;
    auto* check = app.add_subcommand("check", "diagnostics of one GP checkpoint");
    check->add_option("checkpoint", checkpoint, "GPF1 file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run) return cmd_run(config, RunMode::full, workers, output);
        if (*kmd_cmd) return cmd_run(config, RunMode::kmd_only, workers, output);
        if (*gp_cmd) return cmd_run(config, RunMode::gp_only, workers, output);
        if (*gamma) return cmd_gamma(tol, spacing, cache);
        if (*compare) return cmd_compare(run_a, run_b, eps, fstar);
        if (*check) return cmd_check(checkpoint);
    } catch (const CollisionImminent& e) {
        std::cerr << "collision: " << e.what() << "\n";
        return kCollision;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const VersionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidParameters& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const TimeGridMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const vfil::Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
