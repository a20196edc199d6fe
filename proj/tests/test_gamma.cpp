#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vfil/domain/gamma.hpp"

using namespace vfil;

TEST(RadialProfile, ShapeAndBoundaryValues) {
    const auto p = solve_radial_profile(20.0, 0.02);
    EXPECT_EQ(p.rho.front(), 0.0);
    EXPECT_EQ(p.rho.back(), 1.0);
    for (std::size_t i = 1; i < p.rho.size(); ++i) EXPECT_GE(p.rho[i], p.rho[i - 1]);
    // Near the core rho ~ c s; c is about 0.58 for the degree-one vortex.
    EXPECT_NEAR(p(0.1) / 0.1, 0.583, 0.01);
}

TEST(RadialProfile, EnergyExceedsLogarithm) {
    for (double eps : {0.2, 0.1, 0.05}) EXPECT_GT(radial_vortex_energy(eps), std::numbers::pi * -std::log(eps));
}

TEST(Gamma, SuccessiveEstimatesAndCauchy) {
    const auto est = estimate_gamma(1e-3);
    ASSERT_GE(est.raw.size(), 3u);
    EXPECT_DOUBLE_EQ(est.eps[0], 0.1);
    EXPECT_LT(std::abs(est.raw[1] - est.raw[0]), 1e-2);
    EXPECT_LT(std::abs(est.raw[2] - est.raw[1]), 1e-2);
    const auto& x = est.extrapolated;
    EXPECT_LT(std::abs(x[x.size() - 1] - x[x.size() - 2]), 1e-3);
    EXPECT_GT(est.gamma, 1.0);
    EXPECT_LT(est.gamma, 1.5);
}

TEST(Gamma, GridDoublingChangesLittle) {
    const double coarse = estimate_gamma(1e-4, 0.02).gamma;
    const double fine = estimate_gamma(1e-4, 0.01).gamma;
    EXPECT_LT(std::abs(coarse - fine), 1e-4);
    EXPECT_NEAR(default_gamma(), fine, 1e-15);
}

TEST(Gamma, FailsWhenLevelsExhausted) { EXPECT_THROW(estimate_gamma(1e-14, 0.05, 0.1, 3), NonConvergence); }
