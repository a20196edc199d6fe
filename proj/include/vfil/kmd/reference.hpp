#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <variant>
#include <vector>

#include "vfil/domain/filaments.hpp"
#include "vfil/errors.hpp"

namespace vfil::kmd {

// Closed-form solutions of the unit-circulation system
//   i d_t f_j = d_zz f_j + 2 sum_{k != j} (f_j - f_k) / |f_j - f_k|^2.

/// Two straight filaments at +-(d/2) e^{-i 4 t / d^2}.
struct RotatingPair {
    double d = 1.0;
};

/// n = 1 helix A e^{i (k z + k^2 t)}.
struct HelixMode {
    double A = 0.1;
    double k = 1.0;
};

/// Counter-wound double helix +-R e^{i (k z + (k^2 - 1/R^2) t)}.
struct HelixPair {
    double R = 1.0;
    double k = 1.0;
};

/// Regular n-gon of radius R rotating with angular velocity -(n-1)/R^2.
struct Polygon {
    int n = 3;
    double R = 1.0;
};

/// n = 1 band-limited packet sum_m A exp(-(m - m0)^2 / (2 w^2)) e^{i (k_m z + k_m^2 t)}, k_m = 2 pi m / L.
struct GaussianPacket {
    double amplitude = 0.05;
    int center_mode = 2;
    double width_modes = 1.0;
    double L = 2.0 * std::numbers::pi;
};

using ReferenceSolution = std::variant<RotatingPair, HelixMode, HelixPair, Polygon, GaussianPacket>;

inline int reference_count(const ReferenceSolution& ref) {
    return std::visit(
        [](const auto& r) -> int {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, RotatingPair> || std::is_same_v<T, HelixPair>) return 2;
            else if constexpr (std::is_same_v<T, Polygon>) return r.n;
            else return 1;
        },
        ref);
}

inline void validate_reference(const ReferenceSolution& ref) {
    std::visit(
        [](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, RotatingPair>) {
                if (!(r.d > 0.0)) throw InvalidParameters("rotating pair needs d > 0");
            } else if constexpr (std::is_same_v<T, HelixPair>) {
                if (!(r.R > 0.0)) throw InvalidParameters("helix pair needs R > 0");
            } else if constexpr (std::is_same_v<T, Polygon>) {
                if (r.n < 2 || !(r.R > 0.0)) throw InvalidParameters("polygon needs n >= 2 and R > 0");
            } else if constexpr (std::is_same_v<T, GaussianPacket>) {
                if (!(r.width_modes > 0.0) || !(r.L > 0.0)) throw InvalidParameters("bad Gaussian packet");
            }
        },
        ref);
}

/// Positions of every filament at height z and time t.
inline std::vector<Vec2> reference_evaluate(const ReferenceSolution& ref, double z, double t) {
    validate_reference(ref);
    using C = std::complex<double>;
    const C I(0.0, 1.0);
    return std::visit(
        [&](const auto& r) -> std::vector<Vec2> {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, RotatingPair>) {
                const C a = 0.5 * r.d * std::exp(-I * (4.0 / (r.d * r.d)) * t);
                return {to_vec(a), to_vec(-a)};
            } else if constexpr (std::is_same_v<T, HelixMode>) {
                return {to_vec(r.A * std::exp(I * (r.k * z + r.k * r.k * t)))};
            } else if constexpr (std::is_same_v<T, HelixPair>) {
                const C a = r.R * std::exp(I * (r.k * z + (r.k * r.k - 1.0 / (r.R * r.R)) * t));
                return {to_vec(a), to_vec(-a)};
            } else if constexpr (std::is_same_v<T, Polygon>) {
                std::vector<Vec2> out(r.n);
                const double omega = -(r.n - 1) / (r.R * r.R);
                for (int j = 0; j < r.n; ++j)
                    out[j] = to_vec(std::polar(r.R, 2.0 * std::numbers::pi * j / r.n + omega * t));
                return out;
            } else {
                C acc = 0.0;
                const int span = int(std::ceil(6.0 * r.width_modes));
                for (int m = r.center_mode - span; m <= r.center_mode + span; ++m) {
                    const double km = 2.0 * std::numbers::pi * m / r.L;
                    const double w = std::exp(-0.5 * (m - r.center_mode) * (m - r.center_mode) /
                                              (r.width_modes * r.width_modes));
                    acc += r.amplitude * w * std::exp(I * (km * z + km * km * t));
                }
                return {to_vec(acc)};
            }
        },
        ref);
}

/// Samples the reference on nz points of [0, L). Helix wavenumbers must be
/// commensurate with L.
inline FilamentConfiguration reference_sample(const ReferenceSolution& ref, int nz, double L, double t) {
    auto commensurate = [L](double k) {
        const double m = k * L / (2.0 * std::numbers::pi);
        return std::abs(m - std::round(m)) < 1e-9;
    };
    if (const auto* h = std::get_if<HelixMode>(&ref); h && !commensurate(h->k))
        throw InvalidParameters("helix wavenumber must be a multiple of 2 pi / L");
    if (const auto* h = std::get_if<HelixPair>(&ref); h && !commensurate(h->k))
        throw InvalidParameters("helix wavenumber must be a multiple of 2 pi / L");
    if (const auto* g = std::get_if<GaussianPacket>(&ref); g && std::abs(g->L - L) > 1e-12 * L)
        throw InvalidParameters("Gaussian packet period differs from L");
    FilamentConfiguration f(reference_count(ref), nz, L);
    for (int k = 0; k < nz; ++k) f.set_slice(k, reference_evaluate(ref, f.z_at(k), t));
    return f;
}

}  // namespace vfil::kmd
