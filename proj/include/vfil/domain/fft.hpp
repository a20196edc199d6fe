#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace vfil::fft {

// The FFTW planner is not re-entrant; plan creation and destruction are
// serialised. Executing an existing plan on new arrays is thread-safe.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// ESTIMATE keeps plans (and therefore round-off) reproducible run to run.
inline constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

inline fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

/// Angular wavenumber of DFT index m on a periodic interval of length L.
/// The Nyquist index maps to +pi n / L.
inline double periodic_wavenumber(int m, int n, double L) {
    const int mm = (m <= n / 2) ? m : m - n;
    return 2.0 * std::numbers::pi * mm / L;
}

/// Unnormalised forward/backward complex DFT of fixed length.
class PeriodicFft {
public:
    explicit PeriodicFft(int n) : n_(n) {
        std::vector<std::complex<double>> buf(n);
        std::lock_guard lock(planner_mutex());
        fwd_.reset(fftw_plan_dft_1d(n, as_fftw(buf.data()), as_fftw(buf.data()), FFTW_FORWARD, kPlanFlags));
        bwd_.reset(fftw_plan_dft_1d(n, as_fftw(buf.data()), as_fftw(buf.data()), FFTW_BACKWARD, kPlanFlags));
    }

    int size() const { return n_; }

    void forward(std::span<std::complex<double>> data) const {
        fftw_execute_dft(fwd_.get(), as_fftw(data.data()), as_fftw(data.data()));
    }
    void backward(std::span<std::complex<double>> data) const {
        fftw_execute_dft(bwd_.get(), as_fftw(data.data()), as_fftw(data.data()));
    }

    /// Spectral second derivative of a periodic complex sequence (in place).
    void second_derivative(std::span<std::complex<double>> data, double L) const {
        forward(data);
        for (int m = 0; m < n_; ++m) {
            const double k = periodic_wavenumber(m, n_, L);
            data[m] *= -k * k / n_;
        }
        backward(data);
    }

    /// Spectral first derivative; the Nyquist coefficient is dropped.
    void first_derivative(std::span<std::complex<double>> data, double L) const {
        forward(data);
        for (int m = 0; m < n_; ++m) {
            const double k = (2 * m == n_) ? 0.0 : periodic_wavenumber(m, n_, L);
            data[m] *= std::complex<double>(0.0, k / n_);
        }
        backward(data);
    }

    /// Returns sum_m k_m^2 |c_m|^2 with c_m the normalised Fourier
    /// coefficients, so that L times the result is int |f'|^2 for the
    /// trigonometric interpolant (Nyquist counted with k = pi n / L).
    double derivative_power(std::span<const std::complex<double>> data, double L) const {
        std::vector<std::complex<double>> tmp(data.begin(), data.end());
        forward(tmp);
        double acc = 0.0;
        for (int m = 0; m < n_; ++m) {
            const double k = periodic_wavenumber(m, n_, L);
            acc += k * k * std::norm(tmp[m]);
        }
        return acc / (double(n_) * n_);
    }

private:
    int n_;
    Plan fwd_;
    Plan bwd_;
};

/// Per-thread cache of 1-D transforms keyed by length.
inline const PeriodicFft& periodic_fft(int n) {
    thread_local std::vector<std::unique_ptr<PeriodicFft>> cache;
    for (const auto& p : cache)
        if (p->size() == n) return *p;
    cache.push_back(std::make_unique<PeriodicFft>(n));
    return *cache.back();
}

}  // namespace vfil::fft
