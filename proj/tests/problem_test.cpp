#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "hypo/problem.hpp"

using namespace hypo;

TEST(Problem, DefaultsValidate) {
    Problem p;
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ(p.m, 4);
    EXPECT_EQ(p.series_order, 8);
    EXPECT_EQ(p.cutoff.x_min, 2.0);
}

TEST(Problem, RejectsBadInput) {
    Problem p;
    p.m = 1;
    EXPECT_THROW(p.validate(), error);
    p = {};
    p.tol.ode_rel_tol = 0;
    EXPECT_THROW(p.validate(), error);
    p = {};
    p.series_order = 1;
    EXPECT_THROW(p.validate(), error);
    p = {};
    p.matching.secondary = p.matching.primary;
    EXPECT_THROW(p.validate(), error);
    p = {};
    p.cutoff.x_cap = 1.0;
    EXPECT_THROW(p.validate(), error);
}

TEST(Problem, GammaExponent) {
    // gamma = -(m-1)/2
    Problem p;
    p.m = 2;
    EXPECT_EQ(gamma_exponent(p), (Rational{-1, 2}));
    p.m = 3;
    EXPECT_EQ(gamma_exponent(p), (Rational{-1, 1}));
    p.m = 4;
    EXPECT_EQ(gamma_exponent(p), (Rational{-3, 2}));
    EXPECT_DOUBLE_EQ(gamma_exponent(p).value(), -1.5);
}

TEST(Problem, PotentialMatchesDefinition) {
    Problem p;
    p.m = 4;
    const std::complex<double> z(0.3, 1.2);
    for (double x : {-1.7, -0.2, 0.0, 0.9, 2.4}) {
        const auto d = z - 4.0 * x * x * x;
        EXPECT_LT(std::abs(potential(p, z, x) - d * d), 1e-12 * (1 + std::norm(d)));
    }
    // alpha enters with a minus sign: V -= alpha m (m-1) x^{m-2}.
    p.alpha = 0.5;
    EXPECT_NEAR(std::abs(potential(p, z, 1.0) - ((z - 4.0) * (z - 4.0) - 6.0)), 0.0, 1e-12);
}

TEST(Problem, PotentialDerivativeByDifferences) {
    Problem p;
    p.m = 3;
    p.alpha = 0.25;
    const std::complex<double> z(-0.7, 0.4);
    const double h = 1e-5;
    for (double x : {-1.3, 0.2, 1.1}) {
        const auto fd = (potential(p, z, x + h) - potential(p, z, x - h)) / (2 * h);
        EXPECT_LT(std::abs(potential_derivative(p, z, x) - fd), 1e-7);
    }
}

TEST(Problem, PhiAndOddPowers) {
    Problem p;
    p.m = 3;
    const std::complex<double> z(1.0, 2.0);
    EXPECT_EQ(phi(p, z, 2.0), z * 2.0 - 8.0);
    // (-x)^n == -(x^n) exactly for odd n.
    for (double x : {0.1, 1.7, 3.3}) EXPECT_EQ(ipow(-x, 5), -ipow(x, 5));
}
