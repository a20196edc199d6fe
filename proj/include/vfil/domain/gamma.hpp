#pragma once

#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "vfil/errors.hpp"

namespace vfil {

/// Minimiser of the radial Ginzburg-Landau energy of a degree-one vortex,
/// in core units (eps = 1) on the disk of radius R with rho(0) = 0, rho(R) = 1:
///
///   E = 2 pi int_0^R [ (rho'^2 + rho^2 / s^2) / 2 + (1 - rho^2)^2 / 4 ] s ds.
///
/// By scaling, E equals the energy on the unit disk at eps = 1 / R.
struct RadialProfile {
    double R = 0.0;
    double spacing = 0.0;
    std::vector<double> rho;  // rho[i] at s = i * spacing
    double energy = 0.0;

    /// Linear interpolation of the profile; 1 beyond R.
    double operator()(double s) const {
        if (s >= R) return 1.0;
        const double t = s / spacing;
        const auto i = std::size_t(t);
        const double w = t - double(i);
        return (1.0 - w) * rho[i] + w * rho[i + 1];
    }
};

namespace detail {

// Discrete energy: midpoint rule for the gradient term, trapezoid for the rest.
inline double radial_energy(const std::vector<double>& rho, double h) {
    const std::size_t n = rho.size() - 1;
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (rho[i + 1] - rho[i]) / h;
        e += 0.5 * d * d * (i + 0.5) * h * h;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const double s = i * h;
        const double w = (i == n) ? 0.5 : 1.0;
        const double q = 1.0 - rho[i] * rho[i];
        e += w * h * (0.5 * rho[i] * rho[i] / s + 0.25 * q * q * s);
    }
    return 2.0 * std::numbers::pi * e;
}

// Solves tridiagonal (sub, diag, sup) x = rhs in place.
inline void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                              std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace detail

/// Newton iteration on the discrete energy, started from s / sqrt(s^2 + 2).
inline RadialProfile solve_radial_profile(double R, double spacing) {
    if (!(R > 1.0) || !(spacing > 0.0)) throw InvalidParameters("solve_radial_profile: need R > 1, spacing > 0");
    const auto n = std::size_t(std::lround(R / spacing));
    const double h = R / double(n);
    std::vector<double> rho(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = i * h;
        rho[i] = s / std::sqrt(s * s + 2.0);
    }
    rho[n] = 1.0;

    const std::size_t m = n - 1;  // unknowns rho[1..n-1]
    double energy = detail::radial_energy(rho, h);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> grad(m), diag(m), sub(m, 0.0), sup(m, 0.0);
        for (std::size_t u = 0; u < m; ++u) {
            const std::size_t i = u + 1;
            const double s = i * h;
            const double left = (i - 0.5) * h / h, right = (i + 0.5) * h / h;  // s_{i -+ 1/2} / h
            grad[u] = left * (rho[i] - rho[i - 1]) + right * (rho[i] - rho[i + 1]);
            grad[u] += h * (rho[i] / s - (1.0 - rho[i] * rho[i]) * rho[i] * s);
            diag[u] = left + right + h * (1.0 / s + (3.0 * rho[i] * rho[i] - 1.0) * s);
            if (u > 0) sub[u] = -left;
            if (u + 1 < m) sup[u] = -right;
            grad[u] = -grad[u];
        }
        detail::solve_tridiagonal(sub, diag, sup, grad);
        double step = 1.0, max_update = 0.0;
        std::vector<double> trial;
        for (int k = 0; k < 30; ++k) {
            trial = rho;
            max_update = 0.0;
            for (std::size_t u = 0; u < m; ++u) {
                trial[u + 1] += step * grad[u];
                max_update = std::max(max_update, std::abs(step * grad[u]));
            }
            const double e = detail::radial_energy(trial, h);
            if (e <= energy + 1e-14 * std::abs(energy)) {
                energy = e;
                break;
            }
            step *= 0.5;
        }
        rho = std::move(trial);
        if (max_update < 1e-13) return {R, h, rho, detail::radial_energy(rho, h)};
    }
    throw NonConvergence("radial profile Newton iteration did not converge");
}

/// Energy of the radial degree-one vortex on the unit disk at core size eps.
inline double radial_vortex_energy(double eps, double spacing = 0.01) {
    return solve_radial_profile(1.0 / eps, spacing).energy;
}

struct GammaEstimate {
    double gamma = 0.0;
    std::vector<double> eps;           // eps_0, eps_0 / 2, ...
    std::vector<double> raw;           // E(eps) - pi |log eps|
    std::vector<double> extrapolated;  // Richardson (factor 4) of consecutive raw values
};

/// gamma = lim_{eps -> 0} ( E(eps) - pi |log eps| ), estimated by
/// eps-halving with Richardson extrapolation (leading error O(eps^2)).
/// Stops once two consecutive extrapolated values agree to `tol`.
inline GammaEstimate estimate_gamma(double tol = 1e-3, double spacing = 0.01, double eps0 = 0.1, int max_levels = 8) {
    GammaEstimate out;
    double eps = eps0;
    for (int level = 0; level < max_levels; ++level, eps *= 0.5) {
        out.eps.push_back(eps);
        out.raw.push_back(radial_vortex_energy(eps, spacing) + std::numbers::pi * std::log(eps));
        if (out.raw.size() >= 2) {
            const std::size_t k = out.raw.size() - 1;
            out.extrapolated.push_back((4.0 * out.raw[k] - out.raw[k - 1]) / 3.0);
        }
        const auto& x = out.extrapolated;
        if (x.size() >= 2 && std::abs(x[x.size() - 1] - x[x.size() - 2]) < tol) {
            out.gamma = x.back();
            return out;
        }
    }
    throw NonConvergence("gamma extrapolation did not stabilise below the requested tolerance");
}

/// Process-wide calibrated gamma (tolerance 1e-4), computed on first use.
inline double default_gamma() {
    static std::once_flag once;
    static double value = 0.0;
    std::call_once(once, [] { value = estimate_gamma(1e-4, 0.01).gamma; });
    return value;
}

}  // namespace vfil
