#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "hypo/log_complex.hpp"

using hypo::LogComplex;

TEST(LogComplex, RoundTripsOrdinaryValues) {
    const std::complex<double> z(-3.25, 1.5);
    const auto w = LogComplex::from_complex(z);
    EXPECT_NEAR(std::abs(w.to_complex() - z), 0.0, 1e-15 * std::abs(z));
    EXPECT_NEAR(w.log_mag(), std::log(std::abs(z)), 1e-15);
    EXPECT_NEAR(w.arg(), std::arg(z), 1e-15);
}

TEST(LogComplex, ZeroIsAbsorbingAndNeutral) {
    const auto z = LogComplex::zero();
    const auto a = LogComplex::from_complex({2.0, -1.0});
    EXPECT_TRUE(z.is_zero());
    EXPECT_TRUE((z * a).is_zero());
    EXPECT_EQ((z + a).log_mag(), a.log_mag());
    EXPECT_TRUE((a - a).is_zero() || (a - a).log_mag() < -30);
    EXPECT_THROW(a / z, hypo::error);
}

TEST(LogComplex, MagnitudesFarOutsideDoubleRange) {
    // e^{5000} * e^{-4990} = e^{10}
    const auto big = LogComplex::exp({5000.0, 0.3});
    const auto small = LogComplex::exp({-4990.0, -0.3});
    const auto prod = big * small;
    EXPECT_NEAR(prod.log_mag(), 10.0, 1e-12);
    EXPECT_NEAR(prod.arg(), 0.0, 1e-15);
    EXPECT_THROW(big.to_complex(), hypo::error);
    // Sum with a negligible partner keeps the large one.
    EXPECT_NEAR((big + small).log_mag(), 5000.0, 1e-12);
}

TEST(LogComplex, FieldIdentitiesOnRandomValues) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0), ph(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const auto a = LogComplex::from_polar(u(rng), ph(rng));
        const auto b = LogComplex::from_polar(u(rng), ph(rng));
        const auto c = LogComplex::from_polar(u(rng), ph(rng));
        EXPECT_LT(hypo::relative_difference(a * b, b * a), 1e-15);
        EXPECT_LT(hypo::relative_difference((a * b) / b, a), 1e-14);
        EXPECT_LT(hypo::relative_difference(a + b, b + a), 1e-15);
        EXPECT_LT(hypo::relative_difference(a * (b + c), a * b + a * c), 1e-12);
        EXPECT_LT(hypo::relative_difference(a.conj() * b.conj(), (a * b).conj()), 1e-15);
    }
}

TEST(LogComplex, RelativeDifference) {
    const auto a = LogComplex::from_complex({1.0, 0.0});
    const auto b = LogComplex::from_complex({1.0 + 1e-9, 0.0});
    EXPECT_NEAR(hypo::relative_difference(a, b), 1e-9, 1e-15);
    EXPECT_EQ(hypo::relative_difference(LogComplex::zero(), LogComplex::zero()), 0.0);
}

TEST(LogComplex, FromRawKeepsBits) {
    const std::complex<double> unit(0.6, 0.8);
    const auto w = LogComplex::from_raw(12.5, unit);
    EXPECT_EQ(w.log_mag(), 12.5);
    EXPECT_EQ(w.unit(), unit);
}
