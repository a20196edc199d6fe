#pragma once

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "vfil/domain/filaments.hpp"
#include "vfil/domain/functionals.hpp"
#include "vfil/domain/gamma.hpp"
#include "vfil/gp/field.hpp"

namespace vfil::gp {

enum class CoreProfile { pade, tanh, radial };
enum class PhaseKind { angle_sum, harmonic };

struct InitialDataSpec {
    FilamentConfiguration f0;  // unscaled positions; the field puts vortices at h_eps f0
    CoreProfile profile = CoreProfile::pade;
    PhaseKind phase = PhaseKind::angle_sum;
    std::vector<int> charges;  // empty: all +1
};

namespace detail {

inline const RadialProfile& cached_radial_profile() {
    static std::once_flag once;
    static RadialProfile p;
    std::call_once(once, [] { p = solve_radial_profile(60.0, 0.01); });
    return p;
}

}  // namespace detail

/// Modulus profile rho(s), s = distance / eps.
inline double core_modulus(CoreProfile p, double s) {
    switch (p) {
        case CoreProfile::pade: return s / std::sqrt(s * s + 2.0);
        case CoreProfile::tanh: return std::tanh(s / std::sqrt(2.0));
        case CoreProfile::radial: return detail::cached_radial_profile()(s);
    }
    return 1.0;
}

/// Harmonic phase phi on one slice whose normal derivative cancels that of the
/// angle sum, so grad(theta + phi) is tangent to the walls. Finite-volume
/// Neumann Laplacian inverted by the cosine transform; phi has zero mean.
inline std::vector<double> neumann_phase_correction(const DomainGeometry& g, const std::vector<Vec2>& centres,
                                                    const std::vector<int>& charges) {
    const int nx = g.nx, ny = g.ny;
    const double dx = g.dx(), dy = g.dy();
    auto grad_theta = [&](Vec2 x) {
        Vec2 v;
        for (std::size_t j = 0; j < centres.size(); ++j) {
            const Vec2 d = x - centres[j];
            v += double(charges[j]) * perp(d) / norm2(d);
        }
        return v;
    };
    std::vector<Complex> src(std::size_t(nx) * ny, 0.0);
    for (int j = 0; j < ny; ++j) {
        const double y = g.y_at(j);
        src[std::size_t(nx) * j] += -grad_theta({-g.half_x, y}).x / dx;
        src[nx - 1 + std::size_t(nx) * j] += grad_theta({g.half_x, y}).x / dx;
    }
    for (int i = 0; i < nx; ++i) {
        const double x = g.x_at(i);
        src[i] += -grad_theta({x, -g.half_y}).y / dy;
        src[i + std::size_t(nx) * (ny - 1)] += grad_theta({x, g.half_y}).y / dy;
    }
    CosineTransform2d tr(nx, ny, 1);
    tr.forward(src.data());
    for (int j = 0; j < ny; ++j) {
        const double ly = 4.0 * std::pow(std::sin(std::numbers::pi * j / (2.0 * ny)), 2) / (dy * dy);
        for (int i = 0; i < nx; ++i) {
            const double lx = 4.0 * std::pow(std::sin(std::numbers::pi * i / (2.0 * nx)), 2) / (dx * dx);
            Complex& c = src[i + std::size_t(nx) * j];
            c = (i == 0 && j == 0) ? 0.0 : c / -(lx + ly);
        }
    }
    tr.backward(src.data());
    std::vector<double> phi(src.size());
    const double norm = 1.0 / (4.0 * nx * ny);
    for (std::size_t p = 0; p < phi.size(); ++p) phi[p] = src[p].real() * norm;
    return phi;
}

/// u0(x, z) = prod_j rho(|x - h f0_j(z)| / eps) exp(i theta), theta the sum of
/// polar angles about the centres, optionally plus the Neumann correction.
inline GpField build_initial_data(const DomainGeometry& geom, double eps, const InitialDataSpec& spec) {
    GpField field(geom, eps);
    const int n = spec.f0.n();
    const FilamentConfiguration f0 = spec.f0.nz() == geom.nz ? spec.f0 : resample(spec.f0, geom.nz);
    std::vector<int> charges = spec.charges.empty() ? std::vector<int>(n, 1) : spec.charges;
    if (int(charges.size()) != n) throw InvalidParameters("one charge per filament required");
    const double h = ScaleParameters::h_of(eps);
    for (int k = 0; k < geom.nz; ++k)
        for (int j = 0; j < n; ++j)
            if (geom.distance_to_boundary(h * f0(j, k)) < 4.0 * eps)
                throw FilamentTooCloseToBoundary("filament within 4 eps of the lateral boundary");

    for (int k = 0; k < geom.nz; ++k) {
        auto centres = f0.slice(k);
        for (auto& c : centres) c *= h;
        std::vector<double> phi;
        if (spec.phase == PhaseKind::harmonic && n > 0) phi = neumann_phase_correction(geom, centres, charges);
        for (int jy = 0; jy < geom.ny; ++jy)
            for (int ix = 0; ix < geom.nx; ++ix) {
                const Vec2 x{geom.x_at(ix), geom.y_at(jy)};
                double rho = 1.0, theta = phi.empty() ? 0.0 : phi[ix + std::size_t(geom.nx) * jy];
                for (int j = 0; j < n; ++j) {
                    const Vec2 d = x - centres[j];
                    rho *= core_modulus(spec.profile, norm(d) / eps);
                    theta += charges[j] * std::atan2(d.y, d.x);
                }
                field(ix, jy, k) = std::polar(rho, theta);
            }
    }
    return field;
}

}  // namespace vfil::gp
