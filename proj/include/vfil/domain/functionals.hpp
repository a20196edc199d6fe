#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "vfil/domain/fft.hpp"
#include "vfil/domain/filaments.hpp"
#include "vfil/domain/geometry.hpp"
#include "vfil/errors.hpp"

namespace vfil {

/// rho_f: smallest pairwise distance over all grid slices; +infinity when
/// fewer than two filaments.
inline double min_separation(const FilamentConfiguration& f) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < f.nz(); ++k)
        for (int i = 0; i < f.n(); ++i)
            for (int j = i + 1; j < f.n(); ++j) best = std::min(best, norm(f(i, k) - f(j, k)));
    return best;
}

/// Point-vortex interaction W(a) = -sum_{i != j} log|a_i - a_j| (ordered pairs).
inline double interaction_W(std::span<const Vec2> a) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double d = norm(a[i] - a[j]);
            if (d == 0.0) throw NonSimpleConfiguration("coincident points in interaction_W");
            w -= 2.0 * std::log(d);
        }
    return w;
}

/// grad_k W = -2 sum_{l != k} (a_k - a_l) / |a_k - a_l|^2.
inline std::vector<Vec2> gradient_W(std::span<const Vec2> a) {
    std::vector<Vec2> g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const Vec2 d = a[i] - a[j];
            const double r2 = norm2(d);
            if (r2 == 0.0) throw NonSimpleConfiguration("coincident points in gradient_W");
            const Vec2 term = d * (2.0 / r2);
            g[i] -= term;
            g[j] += term;
        }
    return g;
}

/// Mean over z of sum_j |f_j'|^2, spectral.
inline double mean_derivative_power(const FilamentConfiguration& f) {
    const auto& fft = fft::periodic_fft(f.nz());
    std::vector<std::complex<double>> row(f.nz());
    double acc = 0.0;
    for (int j = 0; j < f.n(); ++j) {
        for (int k = 0; k < f.nz(); ++k) row[k] = to_complex(f(j, k));
        acc += fft.derivative_power(row, f.L());
    }
    return acc;
}

/// Trigonometric interpolant of every curve evaluated on nz points. The
/// source Nyquist term is split evenly between +-m/2.
inline FilamentConfiguration resample(const FilamentConfiguration& f, int nz) {
    if (nz == f.nz()) return f;
    FilamentConfiguration out(f.n(), nz, f.L());
    const int m = f.nz();
    const auto& src = fft::periodic_fft(m);
    const auto& dst = fft::periodic_fft(nz);
    std::vector<std::complex<double>> a(m), b(nz);
    auto put = [&](int q, std::complex<double> c) { b[((q % nz) + nz) % nz] += c; };
    for (int j = 0; j < f.n(); ++j) {
        for (int k = 0; k < m; ++k) a[k] = to_complex(f(j, k));
        src.forward(a);
        std::fill(b.begin(), b.end(), 0.0);
        for (int q = -(m - 1) / 2; q <= (m - 1) / 2; ++q) put(q, a[(q + m) % m] / double(m));
        if (m % 2 == 0) {
            put(m / 2, 0.5 * a[m / 2] / double(m));
            put(-m / 2, 0.5 * a[m / 2] / double(m));
        }
        dst.backward(b);
        for (int k = 0; k < nz; ++k) out(j, k) = to_vec(b[k]);
    }
    return out;
}

/// G_0(f) = pi int_0^L ( 1/2 sum |f_i'|^2 + W(f(z)) ) dz.
///
/// The kinetic part is evaluated through Parseval on the trigonometric
/// interpolant, the interaction part by the trapezoidal rule.
inline double hamiltonian_G0(const FilamentConfiguration& f) {
    const double kinetic = 0.5 * f.L() * mean_derivative_power(f);
    double interaction = 0.0;
    for (int k = 0; k < f.nz(); ++k) {
        const auto pts = f.slice(k);
        interaction += interaction_W(pts);
    }
    interaction *= f.dz();
    return std::numbers::pi * (kinetic + interaction);
}

/// Squared-distance cutoff sum_i chi_r(|x - f_i(z)|) |x - f_i(z)|^2 at slice k.
inline double cutoff_chi_f_unscaled(const FilamentConfiguration& f, double r, Vec2 x, int k) {
    double acc = 0.0;
    for (int i = 0; i < f.n(); ++i) {
        const double d = norm(x - f(i, k));
        acc += cutoff_chi(d / r) * d * d;
    }
    return acc;
}

/// Rescaled cutoff chi^f_{r,eps}(x, z) = h^{-2} chi^{h f}_{h r}(x, z).
inline double cutoff_chi_f(const FilamentConfiguration& f, double r, double eps, Vec2 x, int k) {
    const double h = ScaleParameters::h_of(eps);
    double acc = 0.0;
    for (int i = 0; i < f.n(); ++i) {
        const double s = norm(x - h * f(i, k)) / h;
        acc += cutoff_chi(s / r) * s * s;
    }
    return acc;
}

}  // namespace vfil
