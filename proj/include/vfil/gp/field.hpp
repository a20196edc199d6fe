#pragma once

#include <complex>
#include <mutex>
#include <numbers>
#include <cstddef>
#include <vector>

#include "vfil/domain/fft.hpp"
#include "vfil/domain/geometry.hpp"
#include "vfil/errors.hpp"

namespace vfil::gp {

using Complex = std::complex<double>;

/// Complex scalar field on the cell-centred grid of a rectangular
/// cross-section times the periodic z-interval. Index i + nx (j + ny k).
struct GpField {
    DomainGeometry geom;
    double epsilon = 0.1;
    double t_phys = 0.0;
    std::vector<Complex> u;

    GpField() = default;
    GpField(const DomainGeometry& g, double eps, Complex fill = 1.0)
        : geom(g), epsilon(eps), u(std::size_t(g.nx) * g.ny * g.nz, fill) {
        g.validate();
        if (g.is_disk()) throw InvalidParameters("GP fields live on rectangular cross-sections");
        if (!(eps > 0.0 && eps < 1.0)) throw InvalidParameters("epsilon must lie in (0,1)");
    }

    int nx() const { return geom.nx; }
    int ny() const { return geom.ny; }
    int nz() const { return geom.nz; }
    std::size_t slice_size() const { return std::size_t(geom.nx) * geom.ny; }
    std::size_t index(int i, int j, int k) const { return std::size_t(i) + std::size_t(geom.nx) * (j + std::size_t(geom.ny) * k); }
    Complex& operator()(int i, int j, int k) { return u[index(i, j, k)]; }
    Complex operator()(int i, int j, int k) const { return u[index(i, j, k)]; }
    const Complex* slice(int k) const { return u.data() + slice_size() * k; }
    Complex* slice(int k) { return u.data() + slice_size() * k; }
};

inline double mass(const GpField& f) {
    double m = 0.0;
    for (const Complex& v : f.u) m += std::norm(v);
    return m * f.geom.cell_volume();
}

/// Wavenumber of cosine mode m on [-a, a]: pi m / (2 a).
inline double cosine_wavenumber(int m, double half_width) { return std::numbers::pi * m / (2.0 * half_width); }

/// Type-II/III cosine transform in x and y of `howmany` consecutive complex
/// slices (real and imaginary parts transformed independently). Unnormalised:
/// backward(forward(x)) = 4 nx ny x.
class CosineTransform2d {
public:
    CosineTransform2d(int nx, int ny, int howmany, unsigned flags = fft::kPlanFlags) : nx_(nx), ny_(ny), howmany_(howmany) {
        std::vector<Complex> buf(std::size_t(nx) * ny * howmany);
        double* d = reinterpret_cast<double*>(buf.data());
        fftw_iodim dims[2] = {{ny, 2 * nx, 2 * nx}, {nx, 2, 2}};
        fftw_iodim many[2] = {{2, 1, 1}, {howmany, 2 * nx * ny, 2 * nx * ny}};
        fftw_r2r_kind fwd[2] = {FFTW_REDFT10, FFTW_REDFT10};
        fftw_r2r_kind bwd[2] = {FFTW_REDFT01, FFTW_REDFT01};
        std::lock_guard lock(fft::planner_mutex());
        fwd_.reset(fftw_plan_guru_r2r(2, dims, 2, many, d, d, fwd, flags));
        bwd_.reset(fftw_plan_guru_r2r(2, dims, 2, many, d, d, bwd, flags));
        if (!fwd_ || !bwd_) throw SolverFailure("FFTW could not plan the cosine transform");
    }

    void forward(Complex* data) const { fftw_execute_r2r(fwd_.get(), as_real(data), as_real(data)); }
    void backward(Complex* data) const { fftw_execute_r2r(bwd_.get(), as_real(data), as_real(data)); }
    int nx() const { return nx_; }
    int ny() const { return ny_; }

private:
    static double* as_real(Complex* p) { return reinterpret_cast<double*>(p); }
    int nx_, ny_, howmany_;
    fft::Plan fwd_, bwd_;
};

/// Cosine(x, y) x Fourier(z) transform of a whole field, in place.
/// Unnormalised: backward(forward(u)) = 4 nx ny nz u.
class MixedTransform3d {
public:
    MixedTransform3d(int nx, int ny, int nz, unsigned flags = fft::kPlanFlags)
        : xy_(nx, ny, nz, flags), nx_(nx), ny_(ny), nz_(nz) {
        std::vector<Complex> buf(std::size_t(nx) * ny * nz);
        const int plane = nx * ny;
        fftw_iodim dim{nz, plane, plane};
        fftw_iodim many{plane, 1, 1};
        auto* d = fft::as_fftw(buf.data());
        std::lock_guard lock(fft::planner_mutex());
        zf_.reset(fftw_plan_guru_dft(1, &dim, 1, &many, d, d, FFTW_FORWARD, flags));
        zb_.reset(fftw_plan_guru_dft(1, &dim, 1, &many, d, d, FFTW_BACKWARD, flags));
        if (!zf_ || !zb_) throw SolverFailure("FFTW could not plan the z transform");
    }

    void forward(std::vector<Complex>& u) const {
        xy_.forward(u.data());
        fftw_execute_dft(zf_.get(), fft::as_fftw(u.data()), fft::as_fftw(u.data()));
    }
    void backward(std::vector<Complex>& u) const {
        fftw_execute_dft(zb_.get(), fft::as_fftw(u.data()), fft::as_fftw(u.data()));
        xy_.backward(u.data());
    }
    /// z transform only (per transverse column).
    void forward_z(std::vector<Complex>& u) const { fftw_execute_dft(zf_.get(), fft::as_fftw(u.data()), fft::as_fftw(u.data())); }
    /// xy transform only (every slice).
    const CosineTransform2d& transverse() const { return xy_; }

    double normalisation() const { return 1.0 / (4.0 * nx_ * ny_ * nz_); }

private:
    CosineTransform2d xy_;
    int nx_, ny_, nz_;
    fft::Plan zf_, zb_;
};

}  // namespace vfil::gp
