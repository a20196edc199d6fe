#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vfil/errors.hpp"
#include "vfil/vec2.hpp"

namespace vfil {

enum class CrossSection : unsigned char { disk = 0, rectangle = 1 };

/// Cross-section omega (disk or axis-aligned rectangle, centred at the
/// origin) times a periodic vertical interval of length L, together with the
/// cell-centred transverse grid and the periodic vertical grid.
///
/// Transverse cell (i, j) has centre (-half_x + (i + 1/2) dx, -half_y + (j + 1/2) dy).
/// For the disk the transverse grid covers the bounding square.
struct DomainGeometry {
    CrossSection shape = CrossSection::rectangle;
    double radius = 0.0;
    double half_x = 1.0;
    double half_y = 1.0;
    double L = 1.0;
    int nx = 8;
    int ny = 8;
    int nz = 8;

    static DomainGeometry rectangle(double ax, double ay, double L, int nx, int ny, int nz) {
        DomainGeometry g;
        g.shape = CrossSection::rectangle;
        g.half_x = ax;
        g.half_y = ay;
        g.L = L;
        g.nx = nx;
        g.ny = ny;
        g.nz = nz;
        g.validate();
        return g;
    }

    static DomainGeometry disk(double R, double L, int nx, int ny, int nz) {
        DomainGeometry g;
        g.shape = CrossSection::disk;
        g.radius = R;
        g.half_x = R;
        g.half_y = R;
        g.L = L;
        g.nx = nx;
        g.ny = ny;
        g.nz = nz;
        g.validate();
        return g;
    }

    double dx() const { return 2.0 * half_x / nx; }
    double dy() const { return 2.0 * half_y / ny; }
    double dz() const { return L / nz; }
    double cell_area() const { return dx() * dy(); }
    double cell_volume() const { return dx() * dy() * dz(); }

    double x_at(int i) const { return -half_x + (i + 0.5) * dx(); }
    double y_at(int j) const { return -half_y + (j + 0.5) * dy(); }
    double z_at(int k) const { return k * dz(); }
    Vec2 cell_center(int i, int j) const { return {x_at(i), y_at(j)}; }

    bool is_disk() const { return shape == CrossSection::disk; }

    /// Strict interior test.
    bool contains(Vec2 p) const {
        if (is_disk()) return norm(p) < radius;
        return std::abs(p.x) < half_x && std::abs(p.y) < half_y;
    }

    /// Euclidean distance from an interior point to the lateral boundary
    /// (negative outside).
    double distance_to_boundary(Vec2 p) const {
        if (is_disk()) return radius - norm(p);
        return std::min(half_x - std::abs(p.x), half_y - std::abs(p.y));
    }

    /// Closest boundary point to p.
    Vec2 nearest_boundary_point(Vec2 p) const {
        if (is_disk()) {
            const double r = norm(p);
            if (r == 0.0) return {radius, 0.0};
            return p * (radius / r);
        }
        const double gx = half_x - std::abs(p.x);
        const double gy = half_y - std::abs(p.y);
        if (gx <= gy) return {std::copysign(half_x, p.x == 0.0 ? 1.0 : p.x), p.y};
        return {p.x, std::copysign(half_y, p.y == 0.0 ? 1.0 : p.y)};
    }

    void validate() const {
        if (nx < 8 || ny < 8 || nz < 8)
            throw InvalidParameters("grid counts must be >= 8");
        if (!(L > 0.0)) throw InvalidParameters("vertical period must be positive");
        if (is_disk()) {
            if (!(radius > 0.0)) throw InvalidParameters("disk radius must be positive");
        } else if (!(half_x > 0.0) || !(half_y > 0.0)) {
            throw InvalidParameters("rectangle half-widths must be positive");
        }
    }

    friend bool operator==(const DomainGeometry&, const DomainGeometry&) = default;
};

/// Core scale epsilon and the derived filament scale h = |log eps|^{-1/2}.
struct ScaleParameters {
    double epsilon = 0.05;
    double h_epsilon = 0.0;
    double gamma = 0.0;

    static ScaleParameters make(double eps, double gamma) {
        if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameters("epsilon must lie in (0,1)");
        return {eps, h_of(eps), gamma};
    }

    static double h_of(double eps) { return 1.0 / std::sqrt(-std::log(eps)); }
};

/// Rescaled time t corresponds to physical time h_eps^2 t.
inline double physical_time(double t_rescaled, double eps) {
    const double h = ScaleParameters::h_of(eps);
    return h * h * t_rescaled;
}

/// The fixed cutoff profile: 1 on [0,1), 0 on [2,inf), quintic smoothstep in
/// between (C^2, nonincreasing).
inline double cutoff_chi(double s) {
    if (s < 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    const double u = 2.0 - s;
    return std::min(1.0, u * u * u * (10.0 + u * (-15.0 + 6.0 * u)));
}

struct CutoffSpec {
    double r = 1.0;
    double operator()(double s) const { return cutoff_chi(s / r); }
};

}  // namespace vfil
