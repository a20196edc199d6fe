#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "vfil/domain/gamma.hpp"
#include "vfil/experiments/config.hpp"
#include "vfil/experiments/io.hpp"
#include "vfil/gp/checkpoint.hpp"
#include "vfil/gp/energy.hpp"
#include "vfil/gp/initial_data.hpp"
#include "vfil/gp/solver.hpp"
#include "vfil/kmd/kmd.hpp"
#include "vfil/metrics/discrepancy.hpp"
#include "vfil/version.hpp"

namespace vfil::experiments {

namespace fs = std::filesystem;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class RunMode { full, kmd_only, gp_only };

struct EpsilonResult {
    double epsilon = 0.0;
    double h = 0.0;
    double sup_discrepancy = kNaN;
    double sup_over_h = kNaN;
    double energy_gap = kNaN;
    unsigned flags = 0;
    std::string status = "ok";
    std::string directory;
    std::map<std::string, double> measured;  // scenario check values
    std::map<std::string, bool> checks;      // scenario check verdicts
};

struct RunManifest {
    std::string config_hash;
    std::string version = kVersion;
    std::string started, finished;
    double gamma = kNaN;
    std::string canonical_config;
    std::vector<std::string> files;  // relative to the output directory
    std::vector<EpsilonResult> runs;

    bool ok() const {
        for (const auto& r : runs)
            if (r.status != "ok") return false;
        return true;
    }
    nlohmann::json to_json() const;
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    j["gamma"] = gamma;
    j["config"] = canonical_config;
    j["files"] = files;
    for (const auto& r : runs) {
        nlohmann::json e;
        e["epsilon"] = r.epsilon;
        e["h_epsilon"] = r.h;
        e["status"] = r.status;
        e["directory"] = r.directory;
        e["flags"] = r.flags;
        auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
        e["sup_discrepancy"] = num(r.sup_discrepancy);
        e["sup_over_h"] = num(r.sup_over_h);
        e["energy_gap"] = num(r.energy_gap);
        for (const auto& [k, v] : r.measured) e["measured"][k] = num(v);
        for (const auto& [k, v] : r.checks) e["checks"][k] = v ? "pass" : "fail";
        j["runs"].push_back(e);
    }
    return j;
}

/// gamma from the config: a fixed number, the cache file, or a fresh
/// calibration (written back to the cache when one is named).
inline double resolve_gamma(const ExperimentConfig& c) {
    if (!c.gamma_calibrate) return c.gamma;
    if (!c.gamma_cache.empty() && fs::exists(c.gamma_cache)) {
        std::ifstream is(c.gamma_cache);
        const auto j = nlohmann::json::parse(is, nullptr, false);
        if (!j.is_discarded() && j.contains("gamma") && j["gamma"].is_number()) return j["gamma"].get<double>();
        throw FormatError("gamma cache " + c.gamma_cache + " is unreadable");
    }
    const double g = default_gamma();
    if (!c.gamma_cache.empty()) {
        std::ofstream os(c.gamma_cache);
        os << nlohmann::json{{"gamma", g}, {"tol", 1e-4}}.dump(2) << "\n";
    }
    return g;
}

namespace detail {

inline std::string eps_dirname(double eps) { return "eps_" + fmt(eps); }

// Least-squares slope of y against t.
inline double fitted_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const double n = double(t.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double den = n * stt - st * st;
    return den == 0.0 ? kNaN : (n * sty - st * sy) / den;
}

// Mean over slices of the angle of f_1 - f_0, unwrapped against `previous`.
inline double pair_angle(const FilamentConfiguration& f, double previous) {
    double sx = 0.0, sy = 0.0;
    for (int k = 0; k < f.nz(); ++k) {
        const Vec2 d = f(1, k) - f(0, k);
        const double a = std::atan2(d.y, d.x);
        sx += std::cos(a);
        sy += std::sin(a);
    }
    double a = std::atan2(sy, sx);
    if (std::isfinite(previous)) a += 2 * std::numbers::pi * std::round((previous - a) / (2 * std::numbers::pi));
    return a;
}

// Phase of Fourier mode m of filament 0.
inline double mode_phase(const FilamentConfiguration& f, int m) {
    std::complex<double> c = 0.0;
    for (int k = 0; k < f.nz(); ++k) c += to_complex(f(0, k)) * std::polar(1.0, -2 * std::numbers::pi * m * k / f.nz());
    return std::arg(c);
}

}  // namespace detail

/// One epsilon of an experiment: KMD and/or GP evolution with diagnostics
/// written into `dir`. Returns the per-epsilon summary.
inline EpsilonResult run_epsilon(const ExperimentConfig& c, double eps, double gamma, const fs::path& dir,
                                 RunMode mode, std::vector<std::string>& files) {
    fs::create_directories(dir);
    EpsilonResult res;
    res.epsilon = eps;
    res.h = ScaleParameters::h_of(eps);
    res.directory = dir.filename().string();
    auto rel = [&](const std::string& name) { files.push_back((fs::path(res.directory) / name).string()); };

    const DomainGeometry geom = c.geometry.for_epsilon(eps);
    const FilamentConfiguration f0 = build_scenario(c.scenario, geom.nz, geom.L);
    const int n = f0.n();

    // KMD trajectory at the observation times
    Trajectory kmd_traj;
    std::optional<kmd::CollisionReport> collision;
    if (mode != RunMode::gp_only) {
        CsvWriter traj((dir / "kmd_trajectory.csv").string(), trajectory_header());
        rel("kmd_trajectory.csv");
        CsvWriter cons((dir / "kmd_conserved.csv").string(), {"t", "G0", "center_x", "center_y", "second_moment"});
        rel("kmd_conserved.csv");
        const auto run = kmd::run({f0, 0.0}, c.t_final, c.kmd, kmd::KmdParameters::unit(n), c.observe_interval,
                                  [&](const kmd::KmdState& s) {
                                      write_trajectory_rows(traj, s.t, s.f);
                                      const auto q = kmd::conserved_quantities(s.f);
                                      cons.row(s.t, q.G0, q.center.x, q.center.y, q.second_moment);
                                      kmd_traj.t.push_back(s.t);
                                      kmd_traj.f.push_back(s.f);
                                  });
        collision = run.collision;
        if (collision) {
            res.status = "collision";
            res.flags |= metrics::kFlagCollision;
        }
        if (c.scenario.kind == ScenarioKind::helix_single && kmd_traj.t.size() >= 3) {
            const int m = int(std::lround(c.scenario.k * geom.L / (2 * std::numbers::pi)));
            std::vector<double> ph;
            double prev = kNaN;
            for (const auto& f : kmd_traj.f) {
                double p = detail::mode_phase(f, m);
                if (std::isfinite(prev)) p += 2 * std::numbers::pi * std::round((prev - p) / (2 * std::numbers::pi));
                ph.push_back(prev = p);
            }
            const double ratio = detail::fitted_slope(kmd_traj.t, ph) / (c.scenario.k * c.scenario.k);
            res.measured["dispersion_ratio"] = ratio;
            res.checks["dispersion"] = std::abs(ratio - 1.0) <= 1e-3;
        }
        if (mode == RunMode::kmd_only) return res;
    }

    // GP field
    gp::GpField u = gp::build_initial_data(geom, eps, {f0, c.profile, c.phase, {}});
    gp::GpSolver solver(geom, {eps, c.gp_dt_phys, true, c.measured_plans});
    const double t_end = collision ? kmd_traj.t.back() : c.t_final;

    CsvWriter vort((dir / "gp_vortices.csv").string(), {"t", "k", "z", "index", "x", "y", "charge"});
    rel("gp_vortices.csv");
    CsvWriter energies((dir / "energies.csv").string(),
                       {"t", "G_eps", "e_eps_integral", "standard_e_integral", "transverse", "z_kinetic", "Sigma2d",
                        "G0", "good_slices"});
    rel("energies.csv");
    std::optional<CsvWriter> diag, fstar_out;
    if (mode == RunMode::full) {
        diag.emplace((dir / "diagnostics.csv").string(),
                     std::vector<std::string>{"t", "G_eps", "G0", "I1", "I2", "I3", "T", "discrepancy",
                                              "discrepancy_over_h", "mass", "flags"});
        rel("diagnostics.csv");
        fstar_out.emplace((dir / "gp_fstar.csv").string(), trajectory_header());
        rel("gp_fstar.csv");
    }

    std::size_t obs = 0;
    int initial_charge = 0;
    double sup = 0.0, max_shift = 0.0, prev_angle = kNaN;
    std::vector<double> angle_t, angle;
    std::vector<Vec2> initial_centres;
    auto observe = [&](const gp::GpField& field, double t) {
        const auto detected = metrics::detect_all(field, c.detect_window);
        unsigned flags = collision && obs + 1 == kmd_traj.t.size() ? unsigned(metrics::kFlagCollision) : 0u;
        int charge = 0;
        for (int k = 0; k < field.nz(); ++k) {
            const auto& s = detected[k];
            for (std::size_t i = 0; i < s.vortices.size(); ++i)
                vort.row(t, k, s.z, i, s.vortices[i].centre.x, s.vortices[i].centre.y, s.vortices[i].charge);
            charge += s.total_charge();
        }
        if (obs == 0) initial_charge = charge;
        if (charge != initial_charge) flags |= metrics::kFlagChargeChanged;
        if (solver.alarms() > 0) flags |= metrics::kFlagModulusAlarm;

        const auto e2d = gp::slice_energies_2d(field);
        const auto er = gp::energy_G_eps(field, n, gamma);
        int good = 0;
        for (double e : e2d) good += gp::slice_is_good(e, n, 0.5, eps);

        if (c.scenario.kind == ScenarioKind::single_straight && metrics::unit_charges(detected[0], 1)) {
            if (obs == 0)
                for (const auto& s : detected) initial_centres.push_back(s.vortices.empty() ? Vec2{} : s.vortices[0].centre);
            for (int k = 0; k < field.nz(); ++k)
                if (metrics::unit_charges(detected[k], 1))
                    max_shift = std::max(max_shift, norm(detected[k].vortices[0].centre - initial_centres[k]));
        }

        if (mode == RunMode::gp_only) {
            energies.row(t, er.G_eps, er.e_eps_integral, er.standard_e_integral, er.transverse, er.z_kinetic,
                         kNaN, kNaN, good);
            ++obs;
            return;
        }
        const FilamentConfiguration& f = kmd_traj.f.at(obs);
        if (std::abs(kmd_traj.t[obs] - t) > 1e-9 * std::max(1.0, std::abs(t)))
            throw TimeGridMismatch("GP and KMD observation times diverged");
        const double G0 = hamiltonian_G0(f);
        const double sigma = gp::surplus_Sigma2d(field, f, gamma);
        energies.row(t, er.G_eps, er.e_eps_integral, er.standard_e_integral, er.transverse, er.z_kinetic, sigma,
                     G0, good);

        const auto disc = metrics::slice_discrepancy(field, f, eps, detected);
        flags |= disc.flags;
        sup = std::max(sup, disc.integral);
        metrics::GronwallRecord g{t, kNaN, kNaN, kNaN};
        if (const auto fs = metrics::extract_f_star(detected, f, eps)) {
            g = metrics::gronwall_functionals(f, *fs, t);
            write_trajectory_rows(*fstar_out, t, *fs);
            if (g.I3 < -1e-8 * std::max(1.0, std::abs(G0))) flags |= metrics::kFlagNegativeI3;
            if (n == 2) {
                prev_angle = detail::pair_angle(*fs, prev_angle);
                angle_t.push_back(t);
                angle.push_back(prev_angle);
            }
        } else {
            flags |= metrics::kFlagNoFStar;
        }
        double T = kNaN;
        try {
            T = metrics::concentration_T(field, f, c.cutoff_r, eps);
        } catch (const RadiusTooLarge&) {
            flags |= metrics::kFlagTSkipped;
        }
        if (obs == 0) res.energy_gap = std::abs(er.G_eps - G0);
        diag->row(t, er.G_eps, G0, g.I1, g.I2, g.I3, T, disc.integral, disc.integral_over_h, gp::mass(field), flags);
        res.flags |= flags;
        ++obs;
    };
    try {
        gp::run_to_rescaled_time(u, t_end, solver, c.observe_interval, observe);
    } catch (const Error& e) {
        res.status = std::string("error: ") + e.what();
    }
    gp::checkpoint_save(u, (dir / "final.gpf").string());
    rel("final.gpf");

    if (mode == RunMode::full) {
        res.sup_discrepancy = sup;
        res.sup_over_h = sup / res.h;
    }
    if (c.scenario.kind == ScenarioKind::single_straight) {
        res.measured["max_centre_shift"] = max_shift;
        res.checks["stationary"] = max_shift < geom.dx();
    }
    if (c.scenario.kind == ScenarioKind::rotating_pair && angle.size() >= 2) {
        const double w = detail::fitted_slope(angle_t, angle), target = -4.0 / (c.scenario.d * c.scenario.d);
        res.measured["angular_velocity"] = w;
        res.checks["angular_velocity"] = std::abs(w - target) <= 0.15 * std::abs(target);
    }
    return res;
}

/// Runs every epsilon of the config (up to `workers` at a time) and writes
/// summary.csv and manifest.json into the output directory.
inline RunManifest run_experiment(const ExperimentConfig& c, RunMode mode = RunMode::full) {
    validate_config(c);
    RunManifest m;
    m.started = utc_timestamp();
    m.config_hash = config_hash(c);
    m.canonical_config = canonical_text(c);
    m.gamma = resolve_gamma(c);
    const fs::path out(c.output_dir);
    fs::create_directories(out);

    const std::size_t count = c.epsilon_list.size();
    m.runs.resize(count);
    std::vector<std::vector<std::string>> files(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            const double eps = c.epsilon_list[i];
            try {
                m.runs[i] = run_epsilon(c, eps, m.gamma, out / detail::eps_dirname(eps), mode, files[i]);
            } catch (const Error& e) {
                m.runs[i].epsilon = eps;
                m.runs[i].h = ScaleParameters::h_of(eps);
                m.runs[i].directory = detail::eps_dirname(eps);
                m.runs[i].status = std::string("error: ") + e.what();
            }
        }
    };
    const int threads = std::min<int>(c.workers, int(count));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& f : files) m.files.insert(m.files.end(), f.begin(), f.end());

    {
        CsvWriter summary((out / "summary.csv").string(),
                          {"epsilon", "h_epsilon", "sup_discrepancy", "sup_over_h", "energy_gap"});
        for (const auto& r : m.runs) summary.row(r.epsilon, r.h, r.sup_discrepancy, r.sup_over_h, r.energy_gap);
    }
    m.files.push_back("summary.csv");
    m.files.push_back("manifest.json");
    m.finished = utc_timestamp();
    std::ofstream((out / "manifest.json").string()) << m.to_json().dump(2) << "\n";
    return m;
}

struct ComparisonRow {
    double t = 0.0;
    double distance = 0.0;  // int over z of the matching cost, rescaled units
    double physical = 0.0;  // h_eps * distance
    double I1 = 0.0, I2 = 0.0, I3 = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    double sup_distance = 0.0;
    double integral_distance = 0.0;  // trapezoid in t
};

/// Per observation time: matching distance between f(t) and f*(t) integrated
/// over z, plus the Gronwall functionals; then sup and time integral.
inline ComparisonTable compare_trajectories(const Trajectory& kmd_traj, const Trajectory& gp_traj, double eps) {
    if (kmd_traj.t.size() != gp_traj.t.size()) throw TimeGridMismatch("trajectories have different lengths");
    for (std::size_t i = 0; i < kmd_traj.t.size(); ++i)
        if (std::abs(kmd_traj.t[i] - gp_traj.t[i]) > 1e-9 * std::max(1.0, std::abs(kmd_traj.t[i])))
            throw TimeGridMismatch("observation times differ at index " + std::to_string(i));
    const double h = ScaleParameters::h_of(eps);
    ComparisonTable out;
    for (std::size_t i = 0; i < kmd_traj.t.size(); ++i) {
        const auto& a = kmd_traj.f[i];
        const auto& b = gp_traj.f[i];
        if (!a.same_shape(b)) throw InvalidParameters("trajectory shapes differ");
        ComparisonRow r;
        r.t = kmd_traj.t[i];
        for (int k = 0; k < a.nz(); ++k) r.distance += metrics::w11_match_deltas(a.slice(k), b.slice(k)).cost;
        r.distance *= a.dz();
        r.physical = h * r.distance;
        const auto g = metrics::gronwall_functionals(a, b, r.t);
        r.I1 = g.I1;
        r.I2 = g.I2;
        r.I3 = g.I3;
        out.sup_distance = std::max(out.sup_distance, r.distance);
        if (i) out.integral_distance += 0.5 * (r.t - out.rows.back().t) * (r.distance + out.rows.back().distance);
        out.rows.push_back(r);
    }
    return out;
}

}  // namespace vfil::experiments
