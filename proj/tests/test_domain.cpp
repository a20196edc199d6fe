#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "vfil/domain/functionals.hpp"
#include "vfil/domain/geometry.hpp"

using namespace vfil;
using std::numbers::pi;

namespace {

FilamentConfiguration constant_pair(double d, int nz = 16, double L = 1.0) {
    FilamentConfiguration f(2, nz, L);
    for (int k = 0; k < nz; ++k) {
        f(0, k) = {0.5 * d, 0.0};
        f(1, k) = {-0.5 * d, 0.0};
    }
    return f;
}

FilamentConfiguration double_helix(int nz, double L, double R = 1.0) {
    FilamentConfiguration f(2, nz, L);
    for (int k = 0; k < nz; ++k) {
        const double z = f.z_at(k);
        const Vec2 p{R * std::cos(2 * pi * z / L), R * std::sin(2 * pi * z / L)};
        f(0, k) = p;
        f(1, k) = -p;
    }
    return f;
}

}  // namespace

TEST(Geometry, SpacingsAndValidation) {
    const auto g = DomainGeometry::rectangle(1.0, 0.5, 2.0, 16, 8, 32);
    EXPECT_DOUBLE_EQ(g.dx(), 0.125);
    EXPECT_DOUBLE_EQ(g.dy(), 0.125);
    EXPECT_EQ(g.dz(), 2.0 / 32);
    EXPECT_TRUE(g.contains({0.0, 0.0}));
    EXPECT_FALSE(g.contains({1.0, 0.0}));
    EXPECT_THROW(DomainGeometry::rectangle(1.0, 1.0, 1.0, 4, 8, 8), InvalidParameters);
    EXPECT_THROW(DomainGeometry::disk(-1.0, 1.0, 8, 8, 8), InvalidParameters);
}

TEST(Scale, HEpsilonMatchesDefinition) {
    for (double eps : {0.5, 0.1, 0.05, 1e-3}) {
        const auto s = ScaleParameters::make(eps, 0.0);
        EXPECT_EQ(s.h_epsilon, 1.0 / std::sqrt(-std::log(eps)));
    }
    EXPECT_THROW(ScaleParameters::make(1.5, 0.0), InvalidParameters);
}

TEST(Scale, PhysicalDuration) {
    // eps = 0.05, t = 0.1: h^2 = 1 / |log 0.05|.
    EXPECT_NEAR(physical_time(0.1, 0.05), 0.1 / 2.995732273553991, 1e-15);
    EXPECT_NEAR(physical_time(0.1, 0.05), 0.03338, 1e-5);
}

TEST(Cutoff, PlateauSupportMonotone) {
    EXPECT_EQ(cutoff_chi(0.0), 1.0);
    EXPECT_EQ(cutoff_chi(0.999), 1.0);
    EXPECT_EQ(cutoff_chi(2.0), 0.0);
    EXPECT_EQ(cutoff_chi(7.0), 0.0);
    double prev = 1.0;
    for (double s = 0.0; s <= 2.5; s += 1e-3) {
        const double c = cutoff_chi(s);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
        EXPECT_LE(c, prev + 1e-15);
        prev = c;
    }
    EXPECT_NEAR(cutoff_chi(1.5), 0.5, 1e-15);
    // C^1 at the joins (first derivative by differences).
    EXPECT_NEAR((cutoff_chi(1.0 + 1e-6) - 1.0) / 1e-6, 0.0, 1e-6);
    EXPECT_NEAR(cutoff_chi(2.0 - 1e-6) / 1e-6, 0.0, 1e-6);
}

TEST(Cutoff, ChiFExamples) {
    const double eps = 0.05, h = ScaleParameters::h_of(eps), r = 0.3;
    FilamentConfiguration f(2, 8, 1.0);
    for (int k = 0; k < 8; ++k) {
        f(0, k) = {0.2, 0.1 * k};
        f(1, k) = {-5.0, 0.0};
    }
    EXPECT_EQ(cutoff_chi_f(f, r, eps, h * f(0, 3), 3), 0.0);
    const Vec2 far = h * f(0, 3) + Vec2{h * 2.0 * r, 0.0} + Vec2{1e-9, 0.0};
    EXPECT_EQ(cutoff_chi_f(f, r, eps, far, 3), 0.0);
    const Vec2 half = h * f(0, 3) + Vec2{0.0, h * 0.5 * r};
    EXPECT_NEAR(cutoff_chi_f(f, r, eps, half, 3), 0.25 * r * r, 1e-14);
    // unscaled form relation chi^f_{r,eps} = h^{-2} chi^{hf}_{hr}
    const Vec2 x{0.1, 0.05};
    EXPECT_NEAR(cutoff_chi_f(f, r, eps, x, 2), cutoff_chi_f_unscaled(f.scaled(h), h * r, x, 2) / (h * h), 1e-12);
}

TEST(MinSeparation, Examples) {
    EXPECT_DOUBLE_EQ(min_separation(constant_pair(0.7)), 0.7);
    FilamentConfiguration single(1, 8, 1.0);
    EXPECT_EQ(min_separation(single), std::numeric_limits<double>::infinity());
    EXPECT_NEAR(min_separation(double_helix(64, 3.0)), 2.0, 1e-14);
}

TEST(InteractionW, ClosedForms) {
    const std::vector<Vec2> a{{0, 0}, {1, 0}};
    EXPECT_EQ(interaction_W(a), 0.0);
    const auto g = gradient_W(a);
    EXPECT_DOUBLE_EQ(g[0].x, 2.0);
    EXPECT_DOUBLE_EQ(g[0].y, 0.0);
    EXPECT_DOUBLE_EQ(g[1].x, -2.0);
    const std::vector<Vec2> bad{{0, 0}, {0, 0}};
    EXPECT_THROW(interaction_W(bad), NonSimpleConfiguration);
    EXPECT_THROW(gradient_W(bad), NonSimpleConfiguration);
}

TEST(InteractionW, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> N(2, 5);
    const double step = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Vec2> a(N(rng));
        for (auto& p : a) p = {U(rng), U(rng)};
        const auto g = gradient_W(a);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (int c = 0; c < 2; ++c) {
                auto ap = a, am = a;
                (c == 0 ? ap[i].x : ap[i].y) += step;
                (c == 0 ? am[i].x : am[i].y) -= step;
                const double fd = (interaction_W(ap) - interaction_W(am)) / (2 * step);
                const double an = c == 0 ? g[i].x : g[i].y;
                EXPECT_LT(std::abs(fd - an), 1e-6 * std::max(1.0, std::abs(an)));
            }
    }
}

TEST(HamiltonianG0, ConstantPairs) {
    EXPECT_NEAR(hamiltonian_G0(constant_pair(1.0, 16, 3.0)), 0.0, 1e-14);
    for (double d : {0.3, 2.5}) {
        const double L = 1.7;
        EXPECT_NEAR(hamiltonian_G0(constant_pair(d, 16, L)), -2 * pi * L * std::log(d), 1e-12);
    }
    auto f = constant_pair(0.5);
    f(1, 3) = f(0, 3);
    EXPECT_THROW(hamiltonian_G0(f), NonSimpleConfiguration);
}

TEST(HamiltonianG0, DoubleHelixAgainstQuadratureOracle) {
    // Oracle: analytic derivatives, trapezoid on 4096 points.
    const double L = 2 * pi;
    const int M = 4096;
    double oracle = 0.0;
    for (int k = 0; k < M; ++k) {
        const double z = k * L / M;
        const Vec2 p{std::cos(z), std::sin(z)}, dp{-std::sin(z), std::cos(z)};
        const double kinetic = 0.5 * (norm2(dp) + norm2(-dp));
        oracle += kinetic - 2.0 * std::log(norm(p - (-p)));
    }
    oracle *= pi * L / M;
    EXPECT_NEAR(hamiltonian_G0(double_helix(64, L)), oracle, 1e-10);
    EXPECT_NEAR(oracle, 2 * pi * pi * (1 - 2 * std::log(2.0)), 1e-10);
}

TEST(HamiltonianG0, RotationAndRelabelInvariance) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N(0.0, 0.1);
    const int nz = 32;
    FilamentConfiguration f(3, nz, 2.0);
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < nz; ++k) {
            const double z = f.z_at(k);
            f(j, k) = Vec2{std::cos(2 * pi * j / 3), std::sin(2 * pi * j / 3)} +
                      Vec2{0.1 * std::sin(pi * z) + N(rng) * 0.01, 0.05 * std::cos(pi * z)};
        }
    const double g = hamiltonian_G0(f);
    FilamentConfiguration rot = f, perm = f;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < nz; ++k) {
            rot(j, k) = rotate(f(j, k), 0.7);
            perm(j, k) = f((j + 1) % 3, k);
        }
    EXPECT_NEAR(hamiltonian_G0(rot), g, 1e-12 * std::abs(g));
    EXPECT_NEAR(hamiltonian_G0(perm), g, 1e-12 * std::abs(g));
}
