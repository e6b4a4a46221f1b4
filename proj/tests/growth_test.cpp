#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hypo/growth.hpp"

using namespace hypo;

namespace {

Problem make(int m) {
    Problem p;
    p.m = m;
    return p;
}

}  // namespace

// m = 2: V = (zeta - 2x)^2 is a shifted harmonic oscillator with ground state 2.
TEST(Eigen, HarmonicOscillator) {
    for (double zeta : {0.0, 3.0}) {
        const auto e = lowest_eigenvalue(make(2), zeta);
        EXPECT_NEAR(e.lambda_min, 2.0, 1e-8) << zeta;
        EXPECT_TRUE(e.converged());
        EXPECT_GT(e.cutoff, 0.0);
    }
}

TEST(Eigen, EvenMIsSymmetricInZeta) {
    const Problem p = make(4);
    const auto a = lowest_eigenvalue(p, 1.3), b = lowest_eigenvalue(p, -1.3);
    EXPECT_NEAR(a.lambda_min, b.lambda_min, 1e-9);
    EXPECT_GT(a.lambda_min, 0.0);
}

TEST(Eigen, RichardsonImprovesOnFineGrid) {
    const auto e = lowest_eigenvalue(make(2), 0.0, 0.0, 500);
    EXPECT_LT(std::abs(e.lambda_min - 2.0), std::abs(e.lambda_fine - 2.0));
    EXPECT_THROW(lowest_eigenvalue(make(2), 0.0, 0.0, 4), error);
    EXPECT_THROW(lowest_eigenvalue(make(2), std::nan(""), 0.0), error);
}

TEST(LeastSquares, ExactLineAndDegenerateInput) {
    const auto f = least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.rms, 0.0, 1e-14);
    EXPECT_NEAR(f.slope_stderr, 0.0, 1e-14);
    EXPECT_THROW(least_squares({1}, {1}), error);
    EXPECT_THROW(least_squares({2, 2, 2}, {1, 2, 3}), error);
    EXPECT_THROW(least_squares({1, 2}, {1}), error);
}

TEST(Growth, QuadraticOrderIsTwo) {
    // log max |W| - log |W(0)| = R^2 / 2 exactly.
    const auto g = fit_growth(make(2), {1.0, 2.0, 3.0, 4.0}, 16);
    EXPECT_NEAR(g.exponent_est, 2.0, 1e-3);
    EXPECT_NEAR(g.log_max.back() - g.log_abs_W0, 8.0, 1e-4);
    const auto r = integrality_gap(g);
    EXPECT_FALSE(r.applicable);
    EXPECT_EQ(r.nearest_integer, 2);
}

TEST(Growth, RejectsBadInput) {
    EXPECT_THROW(fit_growth(make(2), {1, 2, 3}), error);
    EXPECT_THROW(fit_growth(make(2), {1, 3, 2, 4}), error);
    EXPECT_THROW(fit_growth(make(2), {1, 2, 3, 4}, 10), error);
}
