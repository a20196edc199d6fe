#pragma once

#include <cstddef>
#include <vector>

#include "vfil/errors.hpp"
#include "vfil/vec2.hpp"

namespace vfil {

/// n periodic curves z -> f_j(z) in R^2 sampled on a uniform grid of nz
/// points over [0, L). Index nz wraps to 0.
class FilamentConfiguration {
public:
    FilamentConfiguration() = default;
    FilamentConfiguration(int n, int nz, double L) : n_(n), nz_(nz), L_(L), samples_(std::size_t(n) * nz) {
        if (n < 0 || nz < 1 || !(L > 0.0)) throw InvalidParameters("bad filament configuration shape");
    }

    int n() const { return n_; }
    int nz() const { return nz_; }
    double L() const { return L_; }
    double dz() const { return L_ / nz_; }
    double z_at(int k) const { return k * dz(); }

    Vec2& operator()(int j, int k) { return samples_[std::size_t(j) * nz_ + wrap(k)]; }
    Vec2 operator()(int j, int k) const { return samples_[std::size_t(j) * nz_ + wrap(k)]; }

    /// All n points of slice k.
    std::vector<Vec2> slice(int k) const {
        std::vector<Vec2> out(n_);
        for (int j = 0; j < n_; ++j) out[j] = (*this)(j, k);
        return out;
    }
    void set_slice(int k, const std::vector<Vec2>& pts) {
        for (int j = 0; j < n_; ++j) (*this)(j, k) = pts[j];
    }

    std::vector<Vec2>& samples() { return samples_; }
    const std::vector<Vec2>& samples() const { return samples_; }

    bool same_shape(const FilamentConfiguration& o) const {
        return n_ == o.n_ && nz_ == o.nz_ && L_ == o.L_;
    }

    FilamentConfiguration scaled(double s) const {
        FilamentConfiguration out = *this;
        for (auto& p : out.samples_) p *= s;
        return out;
    }

    friend bool operator==(const FilamentConfiguration&, const FilamentConfiguration&) = default;

private:
    int wrap(int k) const {
        k %= nz_;
        return k < 0 ? k + nz_ : k;
    }

    int n_ = 0;
    int nz_ = 1;
    double L_ = 1.0;
    std::vector<Vec2> samples_;
};

}  // namespace vfil
