#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "vfil/domain/fft.hpp"
#include "vfil/domain/functionals.hpp"
#include "vfil/domain/geometry.hpp"
#include "vfil/errors.hpp"

namespace vfil {

/// Five-point Laplace solver with Dirichlet data on the node grid of
/// [-ax, ax] x [-ay, ay], diagonalised by the type-I sine transform.
/// Node (i, j) sits at (-ax + i hx, -ay + j hy), 0 <= i <= nx, 0 <= j <= ny.
class RectangleLaplace {
public:
    RectangleLaplace(double ax, double ay, int nx_intervals)
        : ax_(ax), ay_(ay), nx_(nx_intervals),
          ny_(std::max(4, int(std::lround(nx_intervals * ay / ax)))),
          hx_(2.0 * ax / nx_), hy_(2.0 * ay / ny_) {
        if (nx_ < 4) throw InvalidParameters("RectangleLaplace needs at least 4 intervals");
        std::vector<double> buf(std::size_t(nx_ - 1) * (ny_ - 1));
        std::lock_guard lock(fft::planner_mutex());
        plan_.reset(fftw_plan_r2r_2d(ny_ - 1, nx_ - 1, buf.data(), buf.data(), FFTW_RODFT00, FFTW_RODFT00,
                                     fft::kPlanFlags));
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    Vec2 node(int i, int j) const { return {-ax_ + i * hx_, -ay_ + j * hy_}; }
    std::size_t index(int i, int j) const { return std::size_t(j) * (nx_ + 1) + i; }

    /// Discrete harmonic extension of the boundary data into the interior.
    std::vector<double> solve(const std::function<double(Vec2)>& boundary) const {
        std::vector<double> u(std::size_t(nx_ + 1) * (ny_ + 1), 0.0);
        for (int i = 0; i <= nx_; ++i) {
            u[index(i, 0)] = boundary(node(i, 0));
            u[index(i, ny_)] = boundary(node(i, ny_));
        }
        for (int j = 1; j < ny_; ++j) {
            u[index(0, j)] = boundary(node(0, j));
            u[index(nx_, j)] = boundary(node(nx_, j));
        }
        const int mx = nx_ - 1, my = ny_ - 1;
        std::vector<double> rhs(std::size_t(mx) * my, 0.0);
        const double ix2 = 1.0 / (hx_ * hx_), iy2 = 1.0 / (hy_ * hy_);
        for (int j = 1; j < ny_; ++j)
            for (int i = 1; i < nx_; ++i) {
                double r = 0.0;
                if (i == 1) r -= u[index(0, j)] * ix2;
                if (i == nx_ - 1) r -= u[index(nx_, j)] * ix2;
                if (j == 1) r -= u[index(i, 0)] * iy2;
                if (j == ny_ - 1) r -= u[index(i, ny_)] * iy2;
                rhs[std::size_t(j - 1) * mx + (i - 1)] = r;
            }
        fftw_execute_r2r(plan_.get(), rhs.data(), rhs.data());
        for (int q = 1; q <= my; ++q) {
            const double ly = (2.0 * std::cos(std::numbers::pi * q / ny_) - 2.0) * iy2;
            for (int p = 1; p <= mx; ++p) {
                const double lx = (2.0 * std::cos(std::numbers::pi * p / nx_) - 2.0) * ix2;
                rhs[std::size_t(q - 1) * mx + (p - 1)] /= (lx + ly);
            }
        }
        fftw_execute_r2r(plan_.get(), rhs.data(), rhs.data());
        const double norm = 1.0 / (4.0 * nx_ * ny_);
        for (int j = 1; j < ny_; ++j)
            for (int i = 1; i < nx_; ++i) u[index(i, j)] = rhs[std::size_t(j - 1) * mx + (i - 1)] * norm;
        return u;
    }

    /// Tensor-product cubic Lagrange interpolation of nodal values.
    double interpolate(const std::vector<double>& u, Vec2 x) const {
        std::array<double, 4> wx, wy;
        const int sx = stencil(x.x + ax_, hx_, nx_, wx, false);
        const int sy = stencil(x.y + ay_, hy_, ny_, wy, false);
        double acc = 0.0;
        for (int b = 0; b < 4; ++b)
            for (int a = 0; a < 4; ++a) acc += wx[a] * wy[b] * u[index(sx + a, sy + b)];
        return acc;
    }

    /// Gradient of the cubic interpolant.
    Vec2 interpolate_gradient(const std::vector<double>& u, Vec2 x) const {
        std::array<double, 4> wx, wy, dx, dy;
        const int sx = stencil(x.x + ax_, hx_, nx_, wx, false);
        const int sy = stencil(x.y + ay_, hy_, ny_, wy, false);
        stencil(x.x + ax_, hx_, nx_, dx, true);
        stencil(x.y + ay_, hy_, ny_, dy, true);
        Vec2 g;
        for (int b = 0; b < 4; ++b)
            for (int a = 0; a < 4; ++a) {
                const double v = u[index(sx + a, sy + b)];
                g.x += dx[a] * wy[b] * v;
                g.y += wx[a] * dy[b] * v;
            }
        return g;
    }

private:
    // Four-point stencil start and Lagrange weights (or their derivative) for
    // coordinate s measured from the lower boundary.
    static int stencil(double s, double h, int n, std::array<double, 4>& w, bool derivative) {
        int i0 = int(std::floor(s / h)) - 1;
        i0 = std::clamp(i0, 0, n - 3);
        const double t = s / h - i0;  // position in units of h relative to node i0
        for (int a = 0; a < 4; ++a) {
            if (!derivative) {
                double p = 1.0;
                for (int b = 0; b < 4; ++b)
                    if (b != a) p *= (t - b) / double(a - b);
                w[a] = p;
            } else {
                double sum = 0.0;
                for (int skip = 0; skip < 4; ++skip) {
                    if (skip == a) continue;
                    double p = 1.0 / double(a - skip);
                    for (int b = 0; b < 4; ++b)
                        if (b != a && b != skip) p *= (t - b) / double(a - b);
                    sum += p;
                }
                w[a] = sum / h;
            }
        }
        return i0;
    }

    double ax_, ay_;
    int nx_, ny_;
    double hx_, hy_;
    fft::Plan plan_;
};

/// H_A(., a): harmonic in A with H_A(x, a) = -log|x - a| on the boundary.
///
/// Disk of radius R: closed form by the image point a* = R^2 a / |a|^2,
/// H(x, a) = -log(|a| |x - a*| / R), and H(x, 0) = -log R.
/// Rectangle: two five-point solves (h and h/2) combined by Richardson
/// extrapolation and cubic interpolation, so the error is O(h^4).
class HarmonicCorrection {
public:
    static constexpr int kDefaultIntervals = 128;

    HarmonicCorrection(const DomainGeometry& geom, Vec2 a, int intervals = kDefaultIntervals) : geom_(geom), a_(a) {
        if (!geom.contains(a)) throw PointOutsideDomain("source point must lie strictly inside the cross-section");
        if (!geom.is_disk()) {
            coarse_ = std::make_shared<RectangleLaplace>(geom.half_x, geom.half_y, intervals);
            fine_ = std::make_shared<RectangleLaplace>(geom.half_x, geom.half_y, 2 * intervals);
            auto data = [a](Vec2 x) { return -std::log(norm(x - a)); };
            u_coarse_ = coarse_->solve(data);
            u_fine_ = fine_->solve(data);
        }
    }

    double value(Vec2 x) const {
        check(x);
        if (geom_.is_disk()) {
            const double R = geom_.radius;
            const double ra = norm(a_);
            if (ra == 0.0) return -std::log(R);
            const Vec2 image = a_ * (R * R / (ra * ra));
            return -std::log(ra * norm(x - image) / R);
        }
        return (4.0 * fine_->interpolate(u_fine_, x) - coarse_->interpolate(u_coarse_, x)) / 3.0;
    }

    Vec2 gradient(Vec2 x) const {
        check(x);
        if (geom_.is_disk()) {
            const double ra = norm(a_);
            if (ra == 0.0) return {};
            const double R = geom_.radius;
            const Vec2 d = x - a_ * (R * R / (ra * ra));
            return d * (-1.0 / norm2(d));
        }
        const Vec2 gf = fine_->interpolate_gradient(u_fine_, x);
        const Vec2 gc = coarse_->interpolate_gradient(u_coarse_, x);
        return (4.0 * gf - gc) / 3.0;
    }

    Vec2 source() const { return a_; }

private:
    void check(Vec2 x) const {
        const double tol = 1e-12 * (1.0 + geom_.half_x + geom_.half_y);
        if (geom_.distance_to_boundary(x) < -tol) throw PointOutsideDomain("evaluation point outside the cross-section");
    }

    DomainGeometry geom_;
    Vec2 a_;
    std::shared_ptr<RectangleLaplace> coarse_, fine_;
    std::vector<double> u_coarse_, u_fine_;
};

inline double harmonic_correction_H(const DomainGeometry& geom, Vec2 x, Vec2 a) {
    return HarmonicCorrection(geom, a).value(x);
}

/// H_omega(0, 0), memoised per cross-section.
inline double harmonic_H00(const DomainGeometry& geom) {
    if (geom.is_disk()) return -std::log(geom.radius);
    static std::mutex m;
    static std::map<std::pair<double, double>, double> memo;
    const auto key = std::make_pair(geom.half_x, geom.half_y);
    {
        std::lock_guard lock(m);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    const double v = HarmonicCorrection(geom, {0.0, 0.0}).value({0.0, 0.0});
    std::lock_guard lock(m);
    memo[key] = v;
    return v;
}

/// W_A(a) = -pi ( sum_{i != j} log|a_i - a_j| + sum_{i,j} H_A(a_i, a_j) ).
inline double renormalized_W_omega(const DomainGeometry& geom, std::span<const Vec2> a) {
    double acc = std::numbers::pi * interaction_W(a);  // -pi sum log
    for (std::size_t j = 0; j < a.size(); ++j) {
        const HarmonicCorrection H(geom, a[j]);
        for (std::size_t i = 0; i < a.size(); ++i) acc -= std::numbers::pi * H.value(a[i]);
    }
    return acc;
}

/// j*_{R^2}(x; a) = sum_i (x - a_i)^perp / |x - a_i|^2.
inline Vec2 jstar_plane(Vec2 x, std::span<const Vec2> a) {
    Vec2 j;
    for (const Vec2& ai : a) {
        const Vec2 d = x - ai;
        const double r2 = norm2(d);
        if (r2 == 0.0) throw SingularPoint("jstar evaluated at a vortex centre");
        j += perp(d) / r2;
    }
    return j;
}

/// j*_A(x; a) = -grad^perp psi*_A with psi*_A = -sum_i (log|x - a_i| + H_A(x, a_i)).
inline Vec2 jstar_domain(const DomainGeometry& geom, Vec2 x, std::span<const HarmonicCorrection> corrections) {
    std::vector<Vec2> a(corrections.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = corrections[i].source();
    Vec2 j = jstar_plane(x, a);
    if (geom.distance_to_boundary(x) < -1e-12) throw PointOutsideDomain("jstar evaluated outside the cross-section");
    for (const auto& H : corrections) j += perp(H.gradient(x));
    return j;
}

inline Vec2 jstar_domain(const DomainGeometry& geom, Vec2 x, std::span<const Vec2> a) {
    std::vector<HarmonicCorrection> hs;
    hs.reserve(a.size());
    for (const Vec2& ai : a) hs.emplace_back(geom, ai);
    return jstar_domain(geom, x, std::span<const HarmonicCorrection>(hs));
}

/// kappa(n, eps, omega) = n(pi|log eps| + gamma) + n(n-1) pi |log h_eps| - pi n^2 H_omega(0,0).
inline double kappa(int n, double eps, const DomainGeometry& geom, double gamma) {
    if (n == 0) return 0.0;
    if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameters("kappa: epsilon must lie in (0,1)");
    const double pi = std::numbers::pi;
    const double abs_log_eps = -std::log(eps);
    const double abs_log_h = std::abs(std::log(ScaleParameters::h_of(eps)));
    return n * (pi * abs_log_eps + gamma) + n * (n - 1) * pi * abs_log_h - pi * n * n * harmonic_H00(geom);
}

}  // namespace vfil
