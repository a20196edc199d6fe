#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "vfil/domain/filaments.hpp"
#include "vfil/domain/functionals.hpp"
#include "vfil/metrics/flags.hpp"
#include "vfil/metrics/matching.hpp"
#include "vfil/metrics/vorticity.hpp"

namespace vfil::metrics {

struct DiscrepancyReport {
    std::vector<double> per_slice;
    std::vector<unsigned> slice_flags;
    double integral = 0.0;
    double integral_over_h = 0.0;
    unsigned flags = 0;
    int fallback_slices = 0;
};

struct GronwallRecord {
    double t = 0.0;
    double I1 = 0.0, I2 = 0.0, I3 = 0.0;
};

/// J times plaquette area, as masses on the plaquette-centre grid.
inline GridMeasure jacobian_measure(const PlaquetteField& J) {
    GridMeasure mu(J.px, J.py, J.dx, J.dy, J.x0, J.y0);
    for (std::size_t p = 0; p < J.value.size(); ++p) mu.mass[p] = J.value[p] * J.area();
    return mu;
}

/// Sums factor x factor blocks of cells; the coarse centres are the block
/// centroids. Each unit of mass moves at most half a block diagonal.
inline GridMeasure coarsen(const GridMeasure& mu, int factor) {
    if (factor <= 1) return mu;
    const int cx = (mu.nx + factor - 1) / factor, cy = (mu.ny + factor - 1) / factor;
    GridMeasure out(cx, cy, mu.dx * factor, mu.dy * factor, mu.x0 + 0.5 * (factor - 1) * mu.dx,
                    mu.y0 + 0.5 * (factor - 1) * mu.dy);
    for (int j = 0; j < mu.ny; ++j)
        for (int i = 0; i < mu.nx; ++i) out(i / factor, j / factor) += mu(i, j);
    return out;
}

/// h_eps f(z_k) for every filament.
inline std::vector<Vec2> scaled_slice(const FilamentConfiguration& f, int k, double eps) {
    auto pts = f.slice(k);
    const double h = ScaleParameters::h_of(eps);
    for (auto& p : pts) p *= h;
    return pts;
}

/// Grid-LP norm of J - pi sum delta_{targets} on slice k. The measure is
/// coarsened until it has at most max_cells cells per side.
inline double residual_norm(const GpField& u, int k, std::span<const Vec2> targets, int max_cells = 96) {
    GridMeasure mu = jacobian_measure(jacobian_J(u, k));
    rasterize_deltas(mu, targets, -std::numbers::pi);
    const int factor = (std::max(mu.nx, mu.ny) + max_cells - 1) / max_cells;
    return w11_norm_grid(coarsen(mu, factor));
}

inline bool unit_charges(const SliceVortexSet& s, int n) {
    if (int(s.vortices.size()) != n) return false;
    for (const auto& v : s.vortices)
        if (v.charge != 1) return false;
    return true;
}

inline std::vector<SliceVortexSet> detect_all(const GpField& u, double window = 2.5) {
    std::vector<SliceVortexSet> out;
    for (int k = 0; k < u.nz(); ++k) out.push_back(detect_vortices(u, k, window));
    return out;
}

/// Per-slice W^{-1,1} distance between J(u) and pi sum delta_{h f_j}: pi times
/// the matching cost when exactly n unit vortices are found, otherwise the
/// grid LP on the residual measure (slice flagged).
inline DiscrepancyReport slice_discrepancy(const GpField& u, const FilamentConfiguration& f_target, double eps,
                                           const std::vector<SliceVortexSet>& detected) {
    const FilamentConfiguration f = f_target.nz() == u.nz() ? f_target : resample(f_target, u.nz());
    if (int(detected.size()) != u.nz()) throw InvalidParameters("one vortex set per slice required");
    DiscrepancyReport r;
    r.per_slice.resize(u.nz());
    r.slice_flags.assign(u.nz(), 0);
    for (int k = 0; k < u.nz(); ++k) {
        const auto targets = scaled_slice(f, k, eps);
        if (unit_charges(detected[k], f.n())) {
            const auto centres = detected[k].centres();
            r.per_slice[k] = std::numbers::pi * w11_match_deltas(centres, targets).cost;
        } else {
            r.slice_flags[k] |= kFlagFallback;
            if (int(detected[k].vortices.size()) != f.n()) r.slice_flags[k] |= kFlagCountMismatch;
            r.per_slice[k] = residual_norm(u, k, targets);
            ++r.fallback_slices;
        }
        r.flags |= r.slice_flags[k];
        r.integral += r.per_slice[k];
    }
    r.integral *= u.geom.dz();
    r.integral_over_h = r.integral / ScaleParameters::h_of(eps);
    return r;
}

inline DiscrepancyReport slice_discrepancy(const GpField& u, const FilamentConfiguration& f_target, double eps) {
    return slice_discrepancy(u, f_target, eps, detect_all(u));
}

/// T = int J chi^f_{r,eps} dx dz by plaquette quadrature.
inline double concentration_T(const GpField& u, const FilamentConfiguration& f_in, double r, double eps) {
    if (!(r > 0.0)) throw InvalidParameters("cutoff radius must be positive");
    if (f_in.n() >= 2 && r >= min_separation(f_in) / 4.0) throw RadiusTooLarge("cutoff radius must be below rho_f / 4");
    const FilamentConfiguration f = f_in.nz() == u.nz() ? f_in : resample(f_in, u.nz());
    const double h = ScaleParameters::h_of(eps), reach = 2.0 * r * h;
    double acc = 0.0;
    for (int k = 0; k < u.nz(); ++k) {
        const PlaquetteField J = jacobian_J(u, k);
        const auto centres = scaled_slice(f, k, eps);
        for (int q = 0; q < J.py; ++q)
            for (int p = 0; p < J.px; ++p) {
                const Vec2 x = J.centre(p, q);
                bool near = false;
                for (const Vec2& c : centres) near = near || norm(x - c) < reach;
                if (near) acc += J(p, q) * cutoff_chi_f(f, r, eps, x, k);
            }
    }
    return acc * u.geom.cell_area() * u.geom.dz();
}

/// I1 = pi int |f - f*|^2, I2 = pi int (-f'' + grad W(f)) . (f - f*),
/// I3 = G0(f) - G0(f*).
inline GronwallRecord gronwall_functionals(const FilamentConfiguration& f, const FilamentConfiguration& fs,
                                           double t = 0.0) {
    if (!f.same_shape(fs)) throw InvalidParameters("f and f* must share n, nz and L");
    for (const auto* c : {&f, &fs})
        if (c->n() >= 2 && min_separation(*c) == 0.0) throw NonSimpleConfiguration("filaments intersect");
    GronwallRecord g;
    g.t = t;
    const auto& fft = fft::periodic_fft(f.nz());
    std::vector<std::complex<double>> row(f.nz());
    FilamentConfiguration force(f.n(), f.nz(), f.L());
    for (int j = 0; j < f.n(); ++j) {
        for (int k = 0; k < f.nz(); ++k) row[k] = to_complex(f(j, k));
        fft.second_derivative(row, f.L());
        for (int k = 0; k < f.nz(); ++k) force(j, k) = -to_vec(row[k]);
    }
    for (int k = 0; k < f.nz(); ++k) {
        const auto pts = f.slice(k);
        const auto gw = gradient_W(pts);
        for (int j = 0; j < f.n(); ++j) {
            const Vec2 d = f(j, k) - fs(j, k);
            g.I1 += norm2(d);
            g.I2 += dot(force(j, k) + gw[j], d);
        }
    }
    g.I1 *= std::numbers::pi * f.dz();
    g.I2 *= std::numbers::pi * f.dz();
    g.I3 = hamiltonian_G0(f) - hamiltonian_G0(fs);
    return g;
}

/// Detected centres divided by h_eps, labelled slice by slice to the nearest
/// filaments of `reference`. Empty when some slice lacks exactly n unit
/// vortices.
inline std::optional<FilamentConfiguration> extract_f_star(const std::vector<SliceVortexSet>& detected,
                                                           const FilamentConfiguration& reference, double eps) {
    if (int(detected.size()) != reference.nz()) throw InvalidParameters("one vortex set per reference slice required");
    const double h = ScaleParameters::h_of(eps);
    FilamentConfiguration out(reference.n(), reference.nz(), reference.L());
    for (int k = 0; k < reference.nz(); ++k) {
        if (!unit_charges(detected[k], reference.n())) return std::nullopt;
        auto centres = detected[k].centres();
        for (auto& c : centres) c = c / h;
        const auto ref = reference.slice(k);
        const auto m = w11_match_deltas(ref, centres);
        for (int j = 0; j < reference.n(); ++j) out(j, k) = centres[m.permutation[j]];
    }
    return out;
}

}  // namespace vfil::metrics
