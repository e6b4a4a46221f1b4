#include <cmath>
#include <complex>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "hypo/asymptotics.hpp"
#include "hypo/ode.hpp"

using namespace hypo;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Power series of a solution of g'' = c x^j g from (g(0), g'(0)), summed in 50 digits.
big maclaurin(big g0, big g1, int j, big c, big x) {
    std::vector<big> a = {g0, g1};
    big sum = g0 + g1 * x, xn = x;
    for (int n = 2; n < 1500; ++n) {
        // a_n n (n-1) = c a_{n-2-j}
        const int src = n - 2 - j;
        const big an = src >= 0 ? c * a[static_cast<std::size_t>(src)] / (big(n) * (n - 1)) : big(0);
        a.push_back(an);
        xn *= x;
        sum += an * xn;
    }
    return sum;
}

}  // namespace

TEST(Integrate, ConstantCoefficientDecay) {
    // q = 1: e^{-x} tracked inward from x = 5.
    SolutionState<double> s{5.0, {1.0, 0.0}, {-1.0, 0.0}, 0.0};
    const auto out = integrate<double>([](double) { return std::complex<double>(1.0); }, s, 0.0, 1e-11);
    EXPECT_EQ(out.x, 0.0);
    const auto f = out.value * std::exp(out.log_scale);
    const auto g = out.derivative * std::exp(out.log_scale);
    EXPECT_NEAR(std::abs(f - std::exp(5.0)) / std::exp(5.0), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(g + std::exp(5.0)) / std::exp(5.0), 0.0, 1e-9);
}

TEST(Integrate, AiryRatioAgainstMaclaurinOracle) {
    // Start from the large-x expansion of Ai at x = 8 and integrate f'' = x f to 0.
    const double x8 = 8.0;
    const double xi = 2.0 / 3.0 * std::pow(x8, 1.5);
    double u = 1.0, su = 1.0, sv = 1.0;
    for (int k = 1; k <= 12; ++k) {
        u *= (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / (216.0 * k * (2.0 * k - 1));
        const double v = -(6.0 * k + 1) / (6.0 * k - 1) * u;
        const double sign = k % 2 ? -1.0 : 1.0;
        su += sign * u / std::pow(xi, k);
        sv += sign * v / std::pow(xi, k);
    }
    const double norm = 1.0 / (2.0 * std::sqrt(M_PI));
    SolutionState<double> s{x8, {norm * su * std::pow(x8, -0.25), 0}, {-norm * sv * std::pow(x8, 0.25), 0}, -xi};
    const auto out = integrate<double>([](double x) { return std::complex<double>(x); }, s, 0.0, 1e-12);
    const double ratio = std::exp(out.log_scale + xi) * out.value.real() / s.value.real();

    const big ai0 = big(1) / (pow(big(3), big(2) / 3) * boost::math::tgamma(big(2) / 3));
    const big aip0 = -big(1) / (pow(big(3), big(1) / 3) * boost::math::tgamma(big(1) / 3));
    const big ai8 = maclaurin(ai0, aip0, 1, big(1), big(8));
    const double oracle = static_cast<double>(ai0 / ai8);
    EXPECT_NEAR(ratio / oracle - 1.0, 0.0, 1e-7);
}

TEST(Integrate, WeberShapeForQuadraticWell) {
    // m = 2, zeta = 0: V = 4x^2 and the recessive solution is U(0, 2x).
    Problem p;
    p.m = 2;
    const std::complex<double> z(0.0, 0.0);
    const auto start = initial_data<double>(p, z, Side::plus, 6.0);
    auto q = [&](double x) { return potential(p, z, x); };
    const auto out = integrate<double>(q, start.state, 2.0, p.tol.ode_rel_tol);
    const std::complex<double> ratio = out.value / start.state.value * std::exp(out.log_scale - start.state.log_scale);

    const big sqrt_pi = sqrt(boost::math::constants::pi<big>());
    const big u0 = sqrt_pi / (pow(big(2), big("0.25")) * boost::math::tgamma(big(3) / 4));
    const big u1 = -sqrt_pi * pow(big(2), big("0.25")) / boost::math::tgamma(big(1) / 4);
    const big u4 = maclaurin(u0, u1, 2, big("0.25"), big(4));
    const big u12 = maclaurin(u0, u1, 2, big("0.25"), big(12));
    const double oracle = static_cast<double>(u4 / u12);
    EXPECT_NEAR(std::abs(ratio / oracle - 1.0), 0.0, 1e-6);
    // and the shape e^{-x^2} x^{-1/2} at x = 2 relative to x = 6
    const double shape = std::exp(-4.0 + 36.0) * std::sqrt(6.0 / 2.0);
    EXPECT_NEAR(oracle / shape, 1.0, 5e-2);
}

TEST(Integrate, RenormalizationBand) {
    // Strong growth forces repeated renormalization; the stored state stays in band.
    SolutionState<double> s{0.0, {1.0, 0.0}, {-10.0, 0.0}, 0.0};
    IntegrationStats stats;
    DenseOutput<double> dense;
    const auto out =
        integrate<double>([](double) { return std::complex<double>(100.0); }, s, -20.0, 1e-10, &dense, &stats);
    EXPECT_GT(stats.renormalizations, 10u);
    const double len = 1.0 / std::sqrt(101.0);
    const double norm = std::max(std::abs(out.value), std::abs(out.derivative) * len);
    EXPECT_GE(norm, 1e-2);
    EXPECT_LE(norm, 1e2);
    EXPECT_NEAR(out.log_scale + std::log(std::abs(out.value)), 200.0, 1e-6);
}

TEST(DenseOutput, ExactAtBreakpointsAndSmoothBetween) {
    Problem p;
    p.m = 4;
    const std::complex<double> z(0.0, 1.7);
    auto q = [&](double x) { return potential(p, z, x); };
    const auto start = initial_data<double>(p, z, Side::plus);
    DenseOutput<double> dense;
    const auto end = integrate<double>(q, start.state, 0.0, 1e-11, &dense);
    ASSERT_FALSE(dense.empty());
    EXPECT_EQ(dense.lower(), 0.0);
    EXPECT_EQ(dense.upper(), start.x0);
    const auto at0 = dense(0.0);
    EXPECT_EQ(at0.value, end.value);
    EXPECT_EQ(at0.derivative, end.derivative);
    // Segment ends agree with the stored step data; the end of one segment and
    // the start of the next may differ only by a renormalization.
    for (const auto& seg : dense.segments()) {
        EXPECT_EQ(dense(seg.x0).value, seg.f0);
        const auto at1 = dense(seg.x1);
        const auto a = at1.value * std::exp(at1.log_scale), b = seg.f1 * std::exp(seg.log_scale);
        EXPECT_LT(std::abs(a - b), 1e-14 * std::abs(b));
    }
    // Midpoint of a segment against a fresh integration to that point.
    const auto& seg = dense.segments()[dense.segments().size() / 2];
    const double mid = 0.5 * (seg.x0 + seg.x1);
    const auto direct = integrate<double>(q, start.state, mid, 1e-13);
    const auto interp = dense(mid);
    const auto a = direct.value * std::exp(direct.log_scale), b = interp.value * std::exp(interp.log_scale);
    EXPECT_LT(std::abs(a - b) / std::abs(a), 1e-9);
    EXPECT_THROW(dense(start.x0 + 1.0), error);
}

TEST(Integrate, Errors) {
    SolutionState<double> s{1.0, {1.0, 0.0}, {0.0, 0.0}, 0.0};
    EXPECT_THROW(integrate<double>([](double) { return std::complex<double>(1.0); }, s, 0.0, 0.0), error);
    try {
        integrate<double>([](double x) { return x < 0.5 ? std::complex<double>(std::nan(""), 0) : 1.0; }, s, 0.0, 1e-10);
        FAIL() << "expected non_finite";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::non_finite);
    }
    try {
        integrate<double>([](double) { return std::complex<double>(1e40, 1e40); }, s, 0.0, 1e-10);
        FAIL() << "expected step_underflow";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::step_underflow);
    }
}

TEST(Wronskian, ConstantForExactSolutions) {
    // q = 1: e^{-x} and e^{x} have Wronskian 2.
    SolutionState<double> a{0.5, {std::exp(-0.5), 0}, {-std::exp(-0.5), 0}, 0.0};
    SolutionState<double> b{0.5, {std::exp(0.5), 0}, {std::exp(0.5), 0}, 0.0};
    EXPECT_NEAR(wronskian_of(a, b).to_complex().real(), 2.0, 1e-15);
    b.x = 0.6;
    EXPECT_THROW(wronskian_of(a, b), error);
}
