// Acceptance criteria 1..11. `acceptance N` runs one criterion, `acceptance`
// runs all of them; each prints one "criterion N: PASS|FAIL ..." line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vfil/domain/gamma.hpp"
#include "vfil/domain/green.hpp"
#include "vfil/experiments/run.hpp"
#include "vfil/gp/energy.hpp"
#include "vfil/gp/initial_data.hpp"
#include "vfil/gp/solver.hpp"
#include "vfil/kmd/kmd.hpp"
#include "vfil/kmd/reference.hpp"
#include "vfil/metrics/discrepancy.hpp"

using namespace vfil;
using std::numbers::pi;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const char* what, double value, double bound) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s%s=%.6g (bound %.6g%s)", detail.empty() ? "" : "; ", what, value, bound,
                      ok ? "" : ", violated");
        detail += buf;
        pass = pass && ok;
    }
    void note(const char* what, double value) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s%s=%.6g", detail.empty() ? "" : "; ", what, value);
        detail += buf;
    }
};

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FilamentConfiguration straight(const std::vector<Vec2>& pts, int nz, double L) {
    FilamentConfiguration f(int(pts.size()), nz, L);
    for (int k = 0; k < nz; ++k) f.set_slice(k, pts);
    return f;
}

// z-independent field with vortices at physical centres, product of core profiles.
gp::GpField vortex_field(const DomainGeometry& g, double eps, const std::vector<Vec2>& centres, gp::CoreProfile profile) {
    gp::GpField f(g, eps);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 x{g.x_at(i), g.y_at(j)};
            double rho = 1.0, th = 0.0;
            for (const Vec2& c : centres) {
                const Vec2 d = x - c;
                rho *= gp::core_modulus(profile, norm(d) / eps);
                th += std::atan2(d.y, d.x);
            }
            for (int k = 0; k < g.nz; ++k) f(i, j, k) = std::polar(rho, th);
        }
    return f;
}

double angle_of(Vec2 v) { return std::atan2(v.y, v.x); }

double unwrap(double a, double previous) {
    return std::isfinite(previous) ? a + 2 * pi * std::round((previous - a) / (2 * pi)) : a;
}

// ---------------------------------------------------------------------------

Verdict kmd_conservation() {
    Verdict v;
    const double L = 2 * pi;
    const auto f0 = kmd::reference_sample(kmd::HelixPair{1.0, 1.0}, 128, L, 0.0);
    kmd::IntegratorConfig cfg;
    cfg.dt = 1e-4;
    const auto q0 = kmd::conserved_quantities(f0);
    double dG = 0.0, dc = 0.0, dm = 0.0;
    const auto out = kmd::run({f0, 0.0}, 1.0, cfg, 0.05, [&](const kmd::KmdState& s) {
        const auto q = kmd::conserved_quantities(s.f);
        dG = std::max(dG, std::abs(q.G0 - q0.G0) / std::abs(q0.G0));
        // the centre starts at 0, so its drift is measured against the filament scale
        dc = std::max(dc, norm(q.center - q0.center) / std::max(norm(q0.center), std::sqrt(q0.second_moment)));
        dm = std::max(dm, std::abs(q.second_moment - q0.second_moment) / q0.second_moment);
    });
    v.require(!out.collision, "collision", out.collision ? 1 : 0, 0);
    v.require(dG < 1e-6, "G0_rel_drift", dG, 1e-6);
    v.require(dc < 1e-10, "centre_rel_drift", dc, 1e-10);
    v.require(dm < 1e-10, "second_moment_rel_drift", dm, 1e-10);
    return v;
}

Verdict kmd_analytic() {
    Verdict v;
    kmd::IntegratorConfig cfg;
    cfg.dt = 1e-4;

    {  // rotating pair d = 2: angle -4 t / d^2
        const auto f0 = kmd::reference_sample(kmd::RotatingPair{2.0}, 8, 1.0, 0.0);
        const auto out = kmd::run({f0, 0.0}, 1.0, cfg);
        const auto& f = out.trajectory.back().f;
        const double a = unwrap(angle_of(f(1, 0) - f(0, 0)), angle_of(f0(1, 0) - f0(0, 0)) - 1.0);
        const double err = std::abs(a - (angle_of(f0(1, 0) - f0(0, 0)) - 1.0));
        v.require(err < 1e-6, "pair_angle_err", err, 1e-6);
    }
    {  // helix: mode phase grows as k^2 t
        const double L = 2 * pi, k = 2.0;
        const auto f0 = kmd::reference_sample(kmd::HelixMode{0.2, k}, 64, L, 0.0);
        std::vector<double> t, ph;
        double prev = NAN;
        kmd::run({f0, 0.0}, 1.0, cfg, 0.05, [&](const kmd::KmdState& s) {
            prev = unwrap(experiments::detail::mode_phase(s.f, 2), prev);
            t.push_back(s.t);
            ph.push_back(prev);
        });
        const double ratio = experiments::detail::fitted_slope(t, ph) / (k * k);
        v.require(std::abs(ratio - 1.0) <= 1e-3, "helix_omega_over_k2", ratio, 1.001);
    }
    for (int n = 3; n <= 6; ++n) {  // polygons
        const double R = 1.0, target = -(n - 1) / (R * R);
        const auto f0 = kmd::reference_sample(kmd::Polygon{n, R}, 8, 1.0, 0.0);
        // direct summation: angular velocity of every vertex from the right-hand side
        const auto rhs = kmd::kmd_rhs(f0, kmd::KmdParameters::unit(n));
        double direct = 0.0;
        for (int j = 0; j < n; ++j) {
            const Vec2 p = f0(j, 0), w = rhs(j, 0);
            direct = std::max(direct, std::abs((p.x * w.y - p.y * w.x) / norm2(p) - target));
        }
        std::vector<double> t, a;
        double prev = NAN;
        kmd::run({f0, 0.0}, 0.5, cfg, 0.05, [&](const kmd::KmdState& s) {
            prev = unwrap(angle_of(s.f(0, 0)), prev);
            t.push_back(s.t);
            a.push_back(prev);
        });
        const double w = experiments::detail::fitted_slope(t, a);
        char name[64];
        std::snprintf(name, sizeof name, "polygon%d_omega_err", n);
        v.require(std::abs(w - target) < 1e-4, name, std::abs(w - target), 1e-4);
        std::snprintf(name, sizeof name, "polygon%d_direct_err", n);
        v.require(direct < 1e-4, name, direct, 1e-4);
    }
    return v;
}

Verdict gradient_check() {
    Verdict v;
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> count(2, 5);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Vec2> p;
        const int n = count(rng);
        while (int(p.size()) < n) {
            const Vec2 q{U(rng), U(rng)};
            bool ok = true;
            for (const auto& r : p) ok = ok && norm(q - r) > 0.1;
            if (ok) p.push_back(q);
        }
        const auto g = gradient_W(p);
        const double h = 1e-5;
        double num = 0.0, den = 0.0;
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < 2; ++c) {
                auto a = p, b = p;
                (c ? a[j].y : a[j].x) += h;
                (c ? b[j].y : b[j].x) -= h;
                const double fd = (interaction_W(a) - interaction_W(b)) / (2 * h);
                const double an = c ? g[j].y : g[j].x;
                num += (fd - an) * (fd - an);
                den += an * an;
            }
        worst = std::max(worst, std::sqrt(num / den));
    }
    v.require(worst < 1e-6, "max_rel_err", worst, 1e-6);
    return v;
}

Verdict jacobian_calibration() {
    Verdict v;
    const double eps = 0.05;
    const auto g = DomainGeometry::rectangle(1.0, 1.0, 1.0, 80, 80, 8);  // dx = eps / 2
    const auto one = vortex_field(g, eps, {{0.0, 0.0}}, gp::CoreProfile::tanh);
    const double m1 = metrics::jacobian_mass_in_disk(metrics::jacobian_J(one, 0), {0.0, 0.0}, 0.25);
    v.require(std::abs(m1 - pi) <= 0.02 * pi, "one_vortex_mass/pi", m1 / pi, 1.02);
    const auto two = vortex_field(g, eps, {{-0.3, 0.1}, {0.35, -0.2}}, gp::CoreProfile::tanh);
    const double m2 = metrics::jacobian_J(two, 0).total();
    v.require(std::abs(m2 - 2 * pi) <= 0.03 * 2 * pi, "two_vortex_mass/pi", m2 / pi, 2.06);
    const auto pade = vortex_field(g, eps, {{0.0, 0.0}}, gp::CoreProfile::pade);
    v.note("pade_one_vortex_mass/pi",
           metrics::jacobian_mass_in_disk(metrics::jacobian_J(pade, 0), {0.0, 0.0}, 0.25) / pi);
    return v;
}

Verdict matching_lp() {
    Verdict v;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0), S(-0.3, 0.3);
    std::uniform_int_distribution<int> size(1, 8);
    auto pts = [&](std::uniform_real_distribution<double>& d, int m) {
        std::vector<Vec2> p(m);
        for (auto& q : p) q = {d(rng), d(rng)};
        return p;
    };
    int mismatches = 0;
    for (int t = 0; t < 1000; ++t) {
        const int m = size(rng);
        const auto a = pts(U, m), b = pts(U, m);
        mismatches += metrics::w11_match_deltas(a, b).cost != metrics::exhaustive_match(a, b).cost;
    }
    v.require(mismatches == 0, "hungarian_vs_exhaustive_mismatches", mismatches, 0);

    const double dx = 2.0 / 96;
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        metrics::GridMeasure mu(96, 96, dx, dx, -1.0 + 0.5 * dx, -1.0 + 0.5 * dx);
        const int m = 1 + t % 4;
        const auto a = pts(S, m), b = pts(S, m);
        metrics::rasterize_deltas(mu, a, 1.0);
        metrics::rasterize_deltas(mu, b, -1.0);
        const double lp = metrics::w11_norm_grid(mu), match = metrics::w11_match_deltas(a, b).cost;
        worst = std::max(worst, std::abs(lp - match) / match);
    }
    v.require(worst <= 0.1, "lp_vs_matching_rel_err", worst, 0.1);
    return v;
}

Verdict gp_conservation() {
    Verdict v;
    const double eps = 0.05;
    const auto g = DomainGeometry::rectangle(1.6, 1.6, 1.0, 128, 128, 64);
    const auto f0 = kmd::reference_sample(kmd::RotatingPair{1.0}, 64, 1.0, 0.0);
    auto u = gp::build_initial_data(g, eps, {f0, gp::CoreProfile::pade, gp::PhaseKind::harmonic, {}});
    gp::GpSolver solver(g, {eps, 0.0, true, true});
    const double m0 = gp::mass(u), e0 = gp::energy_G_eps(u, 2, 0.0).standard_e_integral;
    double dm = 0.0, de = 0.0;
    const double dt = solver.step_size();
    for (int chunk = 0; chunk < 10; ++chunk) {
        solver.steps(u, dt, 1000);
        dm = std::max(dm, std::abs(gp::mass(u) - m0) / m0);
        de = std::max(de, std::abs(gp::energy_G_eps(u, 2, 0.0).standard_e_integral - e0) / e0);
    }
    v.note("steps", 10000);
    v.note("t_rescaled", u.t_phys * -std::log(eps));
    v.require(dm < 1e-12, "mass_rel_drift", dm, 1e-12);
    v.require(de < 1e-3, "standard_energy_rel_drift", de, 1e-3);
    return v;
}

Verdict stationary_filament() {
    Verdict v;
    const double eps = 0.05;
    const auto g = DomainGeometry::rectangle(1.6, 1.6, 1.0, 128, 128, 32);
    auto u = gp::build_initial_data(g, eps, {straight({{0.0, 0.0}}, 32, 1.0), gp::CoreProfile::pade,
                                              gp::PhaseKind::harmonic, {}});
    gp::GpSolver solver(g, {eps, 0.0, true, true});
    std::vector<Vec2> start;
    double shift = 0.0, from_origin = 0.0;
    int bad = 0;
    gp::run_to_rescaled_time(u, 1.0, solver, 0.1, [&](const gp::GpField& f, double) {
        const auto det = metrics::detect_all(f);
        for (int k = 0; k < f.nz(); ++k) {
            if (!metrics::unit_charges(det[k], 1)) {
                ++bad;
                continue;
            }
            const Vec2 c = det[k].vortices[0].centre;
            if (int(start.size()) <= k) start.push_back(c);
            shift = std::max(shift, norm(c - start[k]));
            from_origin = std::max(from_origin, norm(c));
        }
    });
    v.require(bad == 0, "slices_without_single_vortex", bad, 0);
    v.require(shift < g.dx(), "max_centre_displacement", shift, g.dx());
    v.note("max_distance_from_origin", from_origin);
    return v;
}

Verdict motion_law() {
    Verdict v;
    const double eps = 0.02, d = 1.0, h = ScaleParameters::h_of(eps), t_end = 0.05;
    const auto g = DomainGeometry::rectangle(1.28, 1.28, 1.0, 256, 256, 32);  // dx = eps / 2
    const auto f0 = kmd::reference_sample(kmd::RotatingPair{d}, 32, 1.0, 0.0);
    auto u = gp::build_initial_data(g, eps, {f0, gp::CoreProfile::pade, gp::PhaseKind::harmonic, {}});
    gp::GpSolver solver(g, {eps, 0.0, true, true});

    kmd::IntegratorConfig cfg;
    cfg.dt = 1e-4;
    std::vector<FilamentConfiguration> kmd_f;
    kmd::run({f0, 0.0}, t_end, cfg, kmd::KmdParameters::unit(2), 0.005,
             [&](const kmd::KmdState& s) { kmd_f.push_back(s.f); });

    std::size_t obs = 0;
    double worst = 0.0, prev = NAN;
    int missing = 0;
    std::vector<double> ts, angles;
    gp::run_to_rescaled_time(u, t_end, solver, 0.005, [&](const gp::GpField& f, double t) {
        const auto det = metrics::detect_all(f);
        const auto& ref = kmd_f.at(obs++);
        for (int k = 0; k < f.nz(); ++k) {
            if (!metrics::unit_charges(det[k], 2)) {
                ++missing;
                continue;
            }
            worst = std::max(worst, metrics::w11_match_deltas(det[k].centres(), metrics::scaled_slice(ref, k, eps)).cost);
        }
        if (const auto fs = metrics::extract_f_star(det, ref, eps)) {
            prev = experiments::detail::pair_angle(*fs, prev);
            ts.push_back(t);
            angles.push_back(prev);
        }
    });
    const double w = experiments::detail::fitted_slope(ts, angles);
    v.require(missing == 0, "slices_without_two_vortices", missing, 0);
    v.require(std::abs(w + 4.0) <= 0.15 * 4.0, "angular_velocity", w, -4.0);
    v.require(worst < 0.2 * d * h, "max_slice_matching_distance", worst, 0.2 * d * h);
    return v;
}

Verdict gamma_calibration() {
    Verdict v;
    const auto est = estimate_gamma(1e-3, 0.01);
    const auto& x = est.extrapolated;
    const double halving = std::abs(x[x.size() - 1] - x[x.size() - 2]);
    v.require(halving < 1e-3, "eps_halving_change", halving, 1e-3);
    const double coarse = estimate_gamma(1e-4, 0.01).gamma, fine = estimate_gamma(1e-4, 0.005).gamma;
    v.require(std::abs(coarse - fine) < 1e-4, "grid_doubling_change", std::abs(coarse - fine), 1e-4);
    v.note("gamma", fine);

    const double eps = 0.05;
    const auto g = DomainGeometry::rectangle(1.0, 1.0, 1.0, 160, 160, 8);
    const auto u = gp::build_initial_data(g, eps, {straight({{0.0, 0.0}}, 8, 1.0), gp::CoreProfile::radial,
                                                    gp::PhaseKind::harmonic, {}});
    const double e2d = gp::slice_energies_2d(u)[0], k = kappa(1, eps, g, fine);
    v.note("e2d", e2d);
    v.note("kappa", k);
    v.require(std::abs(e2d - k) <= 0.05 * k, "e2d_vs_kappa_rel", std::abs(e2d - k) / k, 0.05);
    return v;
}

Verdict preparation_trend() {
    Verdict v;
    const double gamma = default_gamma();
    std::vector<double> gaps;
    for (double eps : {0.1, 0.05, 0.025}) {
        const int cells = int(std::lround(3.2 / (eps / 2)));
        const auto g = DomainGeometry::rectangle(1.6, 1.6, 1.0, cells, cells, 8);
        const auto f0 = kmd::reference_sample(kmd::RotatingPair{1.0}, 8, 1.0, 0.0);
        const auto u = gp::build_initial_data(g, eps, {f0, gp::CoreProfile::pade, gp::PhaseKind::harmonic, {}});
        const double gap = std::abs(gp::energy_G_eps(u, 2, gamma).G_eps - hamiltonian_G0(f0));
        gaps.push_back(gap);
        char name[32];
        std::snprintf(name, sizeof name, "gap_eps_%g", eps);
        v.note(name, gap);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] <= gaps[i - 1];
    v.require(monotone, "non_increasing", monotone, 1);
    v.require(gaps.back() < gaps.front(), "final_over_first", gaps.back() / gaps.front(), 1.0);
    return v;
}

Verdict gronwall_scan() {
    Verdict v;
    const int nz = 32;
    const double L = 1.0;
    const auto f = kmd::reference_sample(kmd::RotatingPair{1.0}, nz, L, 0.0);
    auto perturbations = [&](unsigned seed) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> amp(-0.02, 0.02), phase(0.0, 2 * pi);
        std::vector<FilamentConfiguration> out;
        for (int t = 0; t < 100; ++t) {
            auto fs = f;
            for (int j = 0; j < 2; ++j)
                for (int m = 0; m <= 3; ++m) {
                    const double ax = amp(rng), ay = amp(rng), px = phase(rng), py = phase(rng);
                    for (int k = 0; k < nz; ++k) {
                        const double z = f.z_at(k);
                        fs(j, k) += Vec2{ax * std::cos(2 * pi * m * z / L + px), ay * std::cos(2 * pi * m * z / L + py)};
                    }
                }
            out.push_back(fs);
        }
        return out;
    };
    // C from one batch, checked on an independent batch
    double ratio = 0.0;
    for (const auto& fs : perturbations(11)) {
        const auto r = metrics::gronwall_functionals(f, fs);
        ratio = std::max(ratio, (r.I3 - r.I2) / r.I1);
    }
    const double C = 1.5 * std::max(ratio, 0.0);
    int violations = 0;
    double worst = -INFINITY;
    for (const auto& fs : perturbations(12)) {
        const auto r = metrics::gronwall_functionals(f, fs);
        violations += r.I3 > r.I2 + C * r.I1;
        worst = std::max(worst, (r.I3 - r.I2) / r.I1);
    }
    v.note("calibration_max_ratio", ratio);
    v.note("fitted_C", C);
    v.note("validation_max_ratio", worst);
    v.require(violations == 0, "violations", violations, 0);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> all{
        {"KMD conservation", kmd_conservation},
        {"KMD analytic regression", kmd_analytic},
        {"interaction gradient", gradient_check},
        {"Jacobian calibration", jacobian_calibration},
        {"matching and LP", matching_lp},
        {"GP conservation", gp_conservation},
        {"stationary filament", stationary_filament},
        {"finite-eps motion law", motion_law},
        {"gamma calibration", gamma_calibration},
        {"energy preparation trend", preparation_trend},
        {"Gronwall scan", gronwall_scan},
    };
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty())
        for (int i = 1; i <= int(all.size()); ++i) which.push_back(i);

    bool ok = true;
    for (int id : which) {
        if (id < 1 || id > int(all.size())) {
            std::fprintf(stderr, "unknown criterion %d\n", id);
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = all[id - 1].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d: %s  %s: %s  [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", all[id - 1].first,
                    v.detail.c_str(), elapsed(t0));
        std::fflush(stdout);
        ok = ok && v.pass;
    }
    return ok ? 0 : 1;
}
