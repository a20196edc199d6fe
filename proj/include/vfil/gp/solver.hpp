#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "vfil/gp/field.hpp"

namespace vfil::gp {

struct GpConfig {
    double epsilon = 0.1;
    /// Physical step; <= 0 lets the solver pick (see GpSolver::step_size).
    double dt_phys = 0.0;
    bool nonlinear = true;
    /// Let FFTW time candidate plans. Faster, but the chosen plan (and so the
    /// last bits of every result) can differ between runs.
    bool measured_plans = false;
};

/// Strang splitting of i u_t - Lap u + eps^-2 (|u|^2 - 1) u = 0 with Neumann
/// lateral walls: half nonlinear phase rotation, exact linear step in the
/// cosine x Fourier basis, half nonlinear rotation.
class GpSolver {
public:
    GpSolver(const DomainGeometry& geom, const GpConfig& config)
        : geom_(geom), config_(config), transform_(geom.nx, geom.ny, geom.nz,
                                                   config.measured_plans ? FFTW_MEASURE | FFTW_UNALIGNED : fft::kPlanFlags) {
        geom.validate();
        if (geom.is_disk()) throw InvalidParameters("GP stepping needs a rectangular cross-section");
        if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) throw InvalidParameters("epsilon must lie in (0,1)");
        k2_.resize(std::size_t(geom.nx) * geom.ny * geom.nz);
        for (int k = 0; k < geom.nz; ++k) {
            const double kz = fft::periodic_wavenumber(k, geom.nz, geom.L);
            for (int j = 0; j < geom.ny; ++j) {
                const double ky = cosine_wavenumber(j, geom.half_y);
                for (int i = 0; i < geom.nx; ++i) {
                    const double kx = cosine_wavenumber(i, geom.half_x);
                    k2_[i + std::size_t(geom.nx) * (j + std::size_t(geom.ny) * k)] = kx * kx + ky * ky + kz * kz;
                }
            }
        }
        // Split steps resonate (and blow up from the |u| = 1 background) once
        // dt (k2_max + 2 / eps^2) passes pi.
        const double k2max = *std::max_element(k2_.begin(), k2_.end());
        stable_dt_ = std::numbers::pi / (k2max + 2.0 / (config.epsilon * config.epsilon));
        step_ = config.dt_phys > 0.0 ? config.dt_phys
                                     : std::min(0.25 * config.epsilon * config.epsilon, 0.8 * stable_dt_);
    }

    /// Default step: min(eps^2 / 4, 0.8 stable_dt()) unless the config fixes one.
    double step_size() const { return step_; }
    double stable_dt() const { return stable_dt_; }

    const GpConfig& config() const { return config_; }
    const DomainGeometry& geometry() const { return geom_; }
    /// Number of steps that saw max|u| > 2.
    std::size_t alarms() const { return alarms_; }
    double max_modulus() const { return max_modulus_; }

    /// u <- u exp(i (|u|^2 - 1) tau / eps^2), the exact flow of the pointwise part.
    void nonlinear_flow(GpField& f, double tau) {
        if (!config_.nonlinear) return;
        const double c = tau / (config_.epsilon * config_.epsilon);
        double mx = 0.0;
        for (Complex& v : f.u) {
            const double r2 = std::norm(v);
            mx = std::max(mx, r2);
            v *= std::polar(1.0, c * (r2 - 1.0));
        }
        max_modulus_ = std::sqrt(mx);
    }

    /// Exact flow of i u_t = Lap u: each mode picks up exp(i |k|^2 dt).
    void linear_flow(GpField& f, double dt) {
        const auto& m = multiplier(dt);
        transform_.forward(f.u);
        for (std::size_t i = 0; i < f.u.size(); ++i) f.u[i] *= m[i];
        transform_.backward(f.u);
    }

    void step(GpField& f, double dt) {
        check(f);
        nonlinear_flow(f, 0.5 * dt);
        linear_flow(f, dt);
        nonlinear_flow(f, 0.5 * dt);
        if (!config_.nonlinear) {
            double mx = 0.0;
            for (const Complex& v : f.u) mx = std::max(mx, std::norm(v));
            max_modulus_ = std::sqrt(mx);
        }
        if (!std::isfinite(max_modulus_)) throw SolverFailure("GP field became non-finite");
        if (max_modulus_ > 2.0) ++alarms_;
        f.t_phys += dt;
    }

    void step(GpField& f) { step(f, step_); }

    /// `count` steps of size dt. Adjacent nonlinear half steps are merged,
    /// which is exact because that flow leaves |u| unchanged.
    void steps(GpField& f, double dt, int count) {
        check(f);
        if (count <= 0) return;
        nonlinear_flow(f, 0.5 * dt);
        for (int c = 0; c < count; ++c) {
            linear_flow(f, dt);
            nonlinear_flow(f, c + 1 < count ? dt : 0.5 * dt);
            if (!config_.nonlinear) {
                double mx = 0.0;
                for (const Complex& v : f.u) mx = std::max(mx, std::norm(v));
                max_modulus_ = std::sqrt(mx);
            }
            if (!std::isfinite(max_modulus_)) throw SolverFailure("GP field became non-finite");
            if (max_modulus_ > 2.0) ++alarms_;
            f.t_phys += dt;
        }
    }

    /// Steps to physical time t_target, shortening steps so it is hit exactly.
    void advance_to(GpField& f, double t_target) {
        const double span = t_target - f.t_phys;
        if (span <= 0.0) return;
        const int count = std::max(1, int(std::ceil(span / step_ - 1e-9)));
        steps(f, span / count, count);
        f.t_phys = t_target;
    }

    const MixedTransform3d& transform() const { return transform_; }

private:
    void check(const GpField& f) const {
        if (!(f.geom == geom_)) throw InvalidParameters("field geometry differs from the solver's");
    }

    const std::vector<Complex>& multiplier(double dt) {
        for (auto& c : cache_)
            if (c.first == dt) return c.second;
        if (cache_.size() >= 3) cache_.erase(cache_.begin());
        std::vector<Complex> m(k2_.size());
        const double norm = transform_.normalisation();
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::polar(norm, k2_[i] * dt);
        cache_.emplace_back(dt, std::move(m));
        return cache_.back().second;
    }

    DomainGeometry geom_;
    GpConfig config_;
    MixedTransform3d transform_;
    std::vector<double> k2_;
    std::vector<std::pair<double, std::vector<Complex>>> cache_;
    double stable_dt_ = 0.0, step_ = 0.0;
    std::size_t alarms_ = 0;
    double max_modulus_ = 0.0;
};

using GpObserver = std::function<void(const GpField&, double t_rescaled)>;

/// Evolves to rescaled time t_rescaled (physical h_eps^2 t_rescaled, measured
/// from t_phys = 0). The observer sees the field at the starting time, every
/// `observe_interval` of rescaled time, and at the end.
inline void run_to_rescaled_time(GpField& f, double t_rescaled, GpSolver& solver, double observe_interval = 0.0,
                                 const GpObserver& observer = {}) {
    if (t_rescaled < 0.0) throw InvalidParameters("t_rescaled must be >= 0");
    const double h2 = 1.0 / -std::log(f.epsilon);
    const double t0 = f.t_phys / h2;
    if (observer) observer(f, t0);
    const double span = t_rescaled - t0;
    if (span <= 0.0) return;
    const double interval = observe_interval > 0.0 ? observe_interval : span;
    const int segments = int(std::ceil(span / interval - 1e-9));
    for (int s = 1; s <= segments; ++s) {
        const double target = (s == segments) ? t_rescaled : t0 + s * interval;
        solver.advance_to(f, target * h2);
        if (observer) observer(f, target);
    }
}

}  // namespace vfil::gp
