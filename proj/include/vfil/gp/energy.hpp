#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "vfil/domain/filaments.hpp"
#include "vfil/domain/green.hpp"
#include "vfil/gp/field.hpp"

namespace vfil::gp {

struct EnergyReport {
    double G_eps = 0.0;                 // e_eps_integral - L kappa
    double raw_energy = 0.0;            // e_eps_integral
    double e_eps_integral = 0.0;        // int 1/2 (|grad_x u|^2 + 1/2 |d_z u|^2) + (|u|^2-1)^2 / (4 eps^2)
    double standard_e_integral = 0.0;   // int 1/2 |grad u|^2 + (|u|^2-1)^2 / (4 eps^2)
    double z_kinetic = 0.0;             // int |d_z u|^2
    double transverse = 0.0;            // int e2d = sum_k e2d(k) dz
};

namespace detail {

// int_omega 1/2 |grad_x u|^2 + (|u|^2 - 1)^2 / (4 eps^2) dx for one slice; the
// gradient term by Parseval in the cosine basis.
class SliceEnergy {
public:
    explicit SliceEnergy(const GpField& f)
        : nx_(f.nx()), ny_(f.ny()), tr_(nx_, ny_, 1), buf_(f.slice_size()), inv4e2_(0.25 / (f.epsilon * f.epsilon)),
          area_(f.geom.cell_area()) {
        const double ax = f.geom.half_x, ay = f.geom.half_y;
        for (int i = 0; i < nx_; ++i) {
            wx_.push_back(ax * (i == 0 ? 0.5 : 1.0) / (double(nx_) * nx_));
            kx_w_.push_back(std::pow(cosine_wavenumber(i, ax), 2) * wx_.back());
        }
        for (int j = 0; j < ny_; ++j) {
            wy_.push_back(ay * (j == 0 ? 0.5 : 1.0) / (double(ny_) * ny_));
            ky2_.push_back(std::pow(cosine_wavenumber(j, ay), 2));
        }
    }

    double operator()(const Complex* s) {
        double pot = 0.0;
        for (std::size_t p = 0; p < buf_.size(); ++p) {
            buf_[p] = s[p];
            const double q = std::norm(s[p]) - 1.0;
            pot += q * q;
        }
        tr_.forward(buf_.data());
        double kin = 0.0;
        for (int j = 0; j < ny_; ++j) {
            const Complex* row = buf_.data() + std::size_t(nx_) * j;
            double a = 0.0, b = 0.0;
            for (int i = 0; i < nx_; ++i) {
                const double m = std::norm(row[i]);
                a += kx_w_[i] * m;
                b += wx_[i] * m;
            }
            kin += wy_[j] * (a + ky2_[j] * b);
        }
        return 0.5 * kin + inv4e2_ * pot * area_;
    }

private:
    int nx_, ny_;
    std::vector<double> wx_, wy_, kx_w_, ky2_;
    CosineTransform2d tr_;
    std::vector<Complex> buf_;
    double inv4e2_, area_;
};

}  // namespace detail

/// Per-slice int_omega e2d dx.
inline std::vector<double> slice_energies_2d(const GpField& f) {
    detail::SliceEnergy e(f);
    std::vector<double> out(f.nz());
    for (int k = 0; k < f.nz(); ++k) out[k] = e(f.slice(k));
    return out;
}

inline double energy_e2d(const GpField& f, int k) {
    if (k < 0 || k >= f.nz()) throw InvalidParameters("slice index out of range");
    return detail::SliceEnergy(f)(f.slice(k));
}

/// Slice test int e2d <= pi (n + theta) |log eps|.
inline bool slice_is_good(double e2d, int n, double theta, double eps) {
    return e2d <= std::numbers::pi * (n + theta) * -std::log(eps);
}

/// int |d_z u|^2 over the whole domain, spectral in z.
inline double z_kinetic_integral(const GpField& f) {
    const int nz = f.nz();
    const std::size_t plane = f.slice_size();
    std::vector<Complex> col(nz);
    const auto& fft = fft::periodic_fft(nz);
    double acc = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
        for (int k = 0; k < nz; ++k) col[k] = f.u[p + plane * k];
        acc += fft.derivative_power(col, f.geom.L);
    }
    return acc * f.geom.L * f.geom.cell_area();
}

inline EnergyReport energy_G_eps(const GpField& f, int n, double gamma) {
    EnergyReport r;
    const auto e2d = slice_energies_2d(f);
    for (double e : e2d) r.transverse += e;
    r.transverse *= f.geom.dz();
    r.z_kinetic = z_kinetic_integral(f);
    r.e_eps_integral = r.transverse + 0.25 * r.z_kinetic;
    r.standard_e_integral = r.transverse + 0.5 * r.z_kinetic;
    r.raw_energy = r.e_eps_integral;
    r.G_eps = r.e_eps_integral - f.geom.L * kappa(n, f.epsilon, f.geom, gamma);
    return r;
}

/// W_eps(a; omega) = n (pi |log eps| + gamma) + W_omega(a).
inline double renormalized_W_eps(const DomainGeometry& geom, std::span<const Vec2> a, double eps, double gamma) {
    return a.size() * (std::numbers::pi * -std::log(eps) + gamma) + renormalized_W_omega(geom, a);
}

/// sigma2d(z_k) = int e2d dx - W_eps(h_eps f(z_k); omega).
inline double surplus_sigma2d(double e2d, const FilamentConfiguration& f, double eps, const DomainGeometry& geom,
                              double gamma, int k) {
    const double h = ScaleParameters::h_of(eps);
    auto pts = f.slice(k);
    for (auto& p : pts) p *= h;
    return e2d - renormalized_W_eps(geom, pts, eps, gamma);
}

inline double surplus_sigma2d(const GpField& u, const FilamentConfiguration& f, double eps, const DomainGeometry& geom,
                              double gamma, int k) {
    return surplus_sigma2d(energy_e2d(u, k), f, eps, geom, gamma, k);
}

/// Sigma2d = int sigma2d dz; f must share the field's z-grid.
inline double surplus_Sigma2d(const GpField& u, const FilamentConfiguration& f, double gamma) {
    if (f.nz() != u.nz()) throw InvalidParameters("filament and field z-grids differ");
    const auto e2d = slice_energies_2d(u);
    double acc = 0.0;
    for (int k = 0; k < u.nz(); ++k) acc += surplus_sigma2d(e2d[k], f, u.epsilon, u.geom, gamma, k);
    return acc * u.geom.dz();
}

}  // namespace vfil::gp
