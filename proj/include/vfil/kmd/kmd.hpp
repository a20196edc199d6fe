#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vfil/domain/fft.hpp"
#include "vfil/domain/filaments.hpp"
#include "vfil/domain/functionals.hpp"
#include "vfil/errors.hpp"

namespace vfil::kmd {

/// Circulations Gamma_j and core constants alpha_j of the general system
///   d_t X_j = J alpha_j Gamma_j d_zz X_j + J sum_{k != j} 2 Gamma_k (X_j - X_k) / |X_j - X_k|^2.
struct KmdParameters {
    std::vector<double> circulation;
    std::vector<double> core;

    static KmdParameters unit(int n) { return {std::vector<double>(n, 1.0), std::vector<double>(n, 1.0)}; }

    void validate(int n) const {
        if (int(circulation.size()) != n || int(core.size()) != n)
            throw InvalidParameters("KMD parameters must have one entry per filament");
        for (double g : circulation)
            if (g == 0.0) throw InvalidParameters("circulations must be nonzero");
    }

    bool has_mixed_signs() const {
        return std::any_of(circulation.begin(), circulation.end(), [](double g) { return g < 0; }) &&
               std::any_of(circulation.begin(), circulation.end(), [](double g) { return g > 0; });
    }
};

struct KmdState {
    FilamentConfiguration f;
    double t = 0.0;
};

enum class Scheme { strang_split, rk4_spectral };

struct IntegratorConfig {
    double dt = 1e-4;
    Scheme scheme = Scheme::strang_split;
    /// Minimum allowed rho_f; <= 0 selects 1e-3 times the initial rho_f in run().
    double collision_threshold = 0.0;
    int substeps = 4;

    void validate() const {
        if (!(dt > 0.0)) throw InvalidParameters("dt must be positive");
        if (substeps < 1) throw InvalidParameters("substeps must be >= 1");
    }
};

/// J (x, y) = (y, -x); with unit parameters J v equals -i v in complex notation.
constexpr Vec2 symplectic_J(Vec2 v) { return {v.y, -v.x}; }

namespace detail {

// Lexicographic order of the points of one slice. Summing pair forces in
// this order makes every operation exactly equivariant under relabelling.
inline std::vector<int> canonical_order(const std::vector<Vec2>& pts) {
    std::vector<int> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
        return pts[a].y < pts[b].y;
    });
    return order;
}

// J sum_{k != j} 2 Gamma_k (a_j - a_k) / |a_j - a_k|^2 for every j.
inline std::vector<Vec2> interaction_velocity(const std::vector<Vec2>& a, const KmdParameters& p) {
    const auto order = canonical_order(a);
    std::vector<Vec2> v(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        Vec2 s;
        for (int k : order) {
            if (std::size_t(k) == j) continue;
            const Vec2 d = a[j] - a[k];
            const double r2 = norm2(d);
            if (r2 == 0.0) throw NonSimpleConfiguration("filaments intersect");
            s += d * (2.0 * p.circulation[k] / r2);
        }
        v[j] = symplectic_J(s);
    }
    return v;
}

inline void check_separation(const FilamentConfiguration& f, double threshold) {
    if (f.n() < 2) return;
    const double rho = min_separation(f);
    if (rho == 0.0) throw NonSimpleConfiguration("filaments intersect");
    if (rho <= threshold)
        throw CollisionImminent("filament separation " + std::to_string(rho) + " below collision threshold");
}

inline void axpy(FilamentConfiguration& y, double a, const FilamentConfiguration& x) {
    auto& ys = y.samples();
    const auto& xs = x.samples();
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += a * xs[i];
}

}  // namespace detail

/// d_t f for the general system; with unit parameters this is
/// -i (d_zz f_j + 2 sum_{k != j} (f_j - f_k) / |f_j - f_k|^2).
inline FilamentConfiguration kmd_rhs(const FilamentConfiguration& f, const KmdParameters& params,
                                     double collision_threshold = 0.0) {
    params.validate(f.n());
    detail::check_separation(f, collision_threshold);
    FilamentConfiguration out(f.n(), f.nz(), f.L());
    const auto& fft = fft::periodic_fft(f.nz());
    std::vector<std::complex<double>> row(f.nz());
    for (int j = 0; j < f.n(); ++j) {
        for (int k = 0; k < f.nz(); ++k) row[k] = to_complex(f(j, k));
        fft.second_derivative(row, f.L());
        const double c = params.core[j] * params.circulation[j];
        for (int k = 0; k < f.nz(); ++k) out(j, k) = symplectic_J(c * to_vec(row[k]));
    }
    for (int k = 0; k < f.nz(); ++k) {
        const auto v = detail::interaction_velocity(f.slice(k), params);
        for (int j = 0; j < f.n(); ++j) out(j, k) += v[j];
    }
    return out;
}

/// Exact flow of the self-induction part for time dt: each Fourier mode
/// rotates by exp(i alpha_j Gamma_j k^2 dt).
inline void linear_flow(FilamentConfiguration& f, const KmdParameters& params, double dt) {
    const auto& fft = fft::periodic_fft(f.nz());
    std::vector<std::complex<double>> row(f.nz());
    for (int j = 0; j < f.n(); ++j) {
        for (int k = 0; k < f.nz(); ++k) row[k] = to_complex(f(j, k));
        fft.forward(row);
        const double c = params.core[j] * params.circulation[j];
        for (int m = 0; m < f.nz(); ++m) {
            const double km = fft::periodic_wavenumber(m, f.nz(), f.L());
            row[m] *= std::polar(1.0 / f.nz(), c * km * km * dt);
        }
        fft.backward(row);
        for (int k = 0; k < f.nz(); ++k) f(j, k) = to_vec(row[k]);
    }
}

/// Pointwise-in-z point-vortex flow for time dt, RK4 with `substeps` micro-steps.
inline void interaction_flow(FilamentConfiguration& f, const KmdParameters& params, double dt, int substeps) {
    const double h = dt / substeps;
    const int n = f.n();
    for (int k = 0; k < f.nz(); ++k) {
        std::vector<Vec2> a = f.slice(k), tmp(n);
        for (int s = 0; s < substeps; ++s) {
            const auto k1 = detail::interaction_velocity(a, params);
            for (int j = 0; j < n; ++j) tmp[j] = a[j] + 0.5 * h * k1[j];
            const auto k2 = detail::interaction_velocity(tmp, params);
            for (int j = 0; j < n; ++j) tmp[j] = a[j] + 0.5 * h * k2[j];
            const auto k3 = detail::interaction_velocity(tmp, params);
            for (int j = 0; j < n; ++j) tmp[j] = a[j] + h * k3[j];
            const auto k4 = detail::interaction_velocity(tmp, params);
            for (int j = 0; j < n; ++j) a[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        f.set_slice(k, a);
    }
}

/// One step of size dt.
inline KmdState step(const KmdState& state, double dt, const IntegratorConfig& config, const KmdParameters& params) {
    params.validate(state.f.n());
    detail::check_separation(state.f, config.collision_threshold);
    KmdState out = state;
    if (config.scheme == Scheme::strang_split) {
        interaction_flow(out.f, params, 0.5 * dt, config.substeps);
        linear_flow(out.f, params, dt);
        interaction_flow(out.f, params, 0.5 * dt, config.substeps);
    } else {
        const double thr = config.collision_threshold;
        const auto k1 = kmd_rhs(state.f, params, thr);
        FilamentConfiguration y = state.f;
        detail::axpy(y, 0.5 * dt, k1);
        const auto k2 = kmd_rhs(y, params, thr);
        y = state.f;
        detail::axpy(y, 0.5 * dt, k2);
        const auto k3 = kmd_rhs(y, params, thr);
        y = state.f;
        detail::axpy(y, dt, k3);
        const auto k4 = kmd_rhs(y, params, thr);
        detail::axpy(out.f, dt / 6.0, k1);
        detail::axpy(out.f, dt / 3.0, k2);
        detail::axpy(out.f, dt / 3.0, k3);
        detail::axpy(out.f, dt / 6.0, k4);
    }
    out.t = state.t + dt;
    return out;
}

inline KmdState step(const KmdState& state, double dt, const IntegratorConfig& config) {
    return step(state, dt, config, KmdParameters::unit(state.f.n()));
}

struct CollisionReport {
    double t = 0.0;
    double rho = 0.0;
    std::size_t steps = 0;
};

struct KmdRun {
    std::vector<KmdState> trajectory;  // one entry per observation time
    std::optional<CollisionReport> collision;
};

using KmdObserver = std::function<void(const KmdState&)>;

/// Steps from state.t to t_final, recording (and reporting to the observer)
/// the state at state.t, every `observe_interval`, and t_final. Steps are
/// shortened so that every observation time is hit exactly. A collision
/// (rho_f below threshold) stops the run and keeps the partial trajectory.
inline KmdRun run(KmdState state, double t_final, const IntegratorConfig& config, const KmdParameters& params,
                  double observe_interval = 0.0, const KmdObserver& observer = {}) {
    config.validate();
    params.validate(state.f.n());
    if (t_final < state.t) throw InvalidParameters("t_final precedes the current time");
    IntegratorConfig cfg = config;
    if (cfg.collision_threshold <= 0.0 && state.f.n() >= 2) cfg.collision_threshold = 1e-3 * min_separation(state.f);

    KmdRun out;
    auto record = [&](const KmdState& s) {
        out.trajectory.push_back(s);
        if (observer) observer(s);
    };
    record(state);
    const double t0 = state.t;
    const double span = t_final - t0;
    if (span == 0.0) return out;
    const double interval = observe_interval > 0.0 ? observe_interval : span;
    const int segments = int(std::ceil(span / interval - 1e-9));
    std::size_t steps = 0;
    for (int s = 1; s <= segments; ++s) {
        const double target = (s == segments) ? t_final : t0 + s * interval;
        const double seg = target - state.t;
        const int count = std::max(1, int(std::ceil(seg / cfg.dt - 1e-9)));
        const double dt = seg / count;
        for (int c = 0; c < count; ++c) {
            try {
                state = step(state, dt, cfg, params);
            } catch (const CollisionImminent&) {
                out.collision = CollisionReport{state.t, min_separation(state.f), steps};
                return out;
            }
            ++steps;
            if (state.f.n() >= 2) {
                const double rho = min_separation(state.f);
                if (rho < cfg.collision_threshold) {
                    out.collision = CollisionReport{state.t, rho, steps};
                    return out;
                }
            }
        }
        state.t = target;
        record(state);
    }
    return out;
}

inline KmdRun run(KmdState state, double t_final, const IntegratorConfig& config, double observe_interval = 0.0,
                  const KmdObserver& observer = {}) {
    const int n = state.f.n();
    return run(std::move(state), t_final, config, KmdParameters::unit(n), observe_interval, observer);
}

struct ConservedQuantities {
    double G0 = 0.0;
    Vec2 center;             // int sum_j f_j dz
    double second_moment = 0.0;  // int sum_j |f_j|^2 dz
};

inline ConservedQuantities conserved_quantities(const FilamentConfiguration& f) {
    ConservedQuantities q;
    q.G0 = hamiltonian_G0(f);
    for (int j = 0; j < f.n(); ++j)
        for (int k = 0; k < f.nz(); ++k) {
            q.center += f(j, k);
            q.second_moment += norm2(f(j, k));
        }
    q.center *= f.dz();
    q.second_moment *= f.dz();
    return q;
}

}  // namespace vfil::kmd
