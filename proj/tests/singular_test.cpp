#include <cmath>
#include <complex>

#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "hypo/singular.hpp"
#include "hypo/zeros.hpp"

using namespace hypo;
using cd = std::complex<double>;

namespace {

struct Quartic {
    Problem p;
    CertifiedZero zero;
    BoundedSolution sol;

    Quartic() {
        p.m = 4;
        zero = refine_zero(p, cd(0.01, 1.7));
        sol = bounded_solution(p, zero);
    }
};

const Quartic& quartic() {
    static const Quartic q;
    return q;
}

}  // namespace

TEST(Oracle, IncompleteGammaMatchesBoostOnRealAxis) {
    for (int a : {1, 3, 8, 25}) {
        for (double w : {0.5, 1.7, 6.0}) {
            const double expect = std::log(boost::math::tgamma(static_cast<double>(a), w)) - a * std::log(w);
            const LogComplex got = detail::incomplete_gamma_ratio(a, cd(w, 0));
            EXPECT_NEAR(got.log_mag(), expect, 1e-12 * std::max(1.0, std::abs(expect))) << a << " " << w;
            EXPECT_NEAR(got.arg(), 0.0, 1e-12);
        }
    }
}

TEST(Oracle, RayQuadratureMatchesRecurrence) {
    // int_1^inf s^{a-1} e^{i zeta s} ds = Gamma(a, -i zeta) / (-i zeta)^a
    for (cd zeta : {cd(0.0, 1.7), cd(0.8, 1.2), cd(-1.5, 0.6)}) {
        const cd w(zeta.imag(), -zeta.real());
        for (int a : {1, 4, 20, 60}) {
            const auto q = detail::ray_moment(zeta, a, 1e-13);
            const auto o = detail::incomplete_gamma_ratio(a, w);
            EXPECT_LT(relative_difference(q, o), 1e-10) << zeta << " a=" << a;
        }
    }
}

TEST(Bounded, SolutionAtFirstQuarticZero) {
    const auto& q = quartic();
    EXPECT_LT(q.sol.proportionality_defect, 1e-8);
    EXPECT_GT(std::max(std::abs(q.sol.f0), std::abs(q.sol.f0_prime)), 1e-3);
    EXPECT_LT(ode_residual(q.p, q.sol, 20), 1e-10);
    // decays beyond the cutoff and is continuous across it
    const double X = q.sol.cutoff;
    EXPECT_LT(std::abs(q.sol.value(X + 1.0)), std::abs(q.sol.value(X)));
    EXPECT_LT(std::abs(q.sol.value(X + 1e-9) - q.sol.value(X)), 1e-6 * std::abs(q.sol.value(X)));
    // sup norm is 1 on [-X, X]
    double sup = 0.0;
    for (int i = -400; i <= 400; ++i) sup = std::max(sup, std::abs(q.sol.value(X * i / 400.0)));
    EXPECT_LE(sup, 1.0 + 1e-9);
    EXPECT_GT(sup, 0.9);
}

TEST(Bounded, RejectsNonZero) {
    Problem p;
    p.m = 4;
    CertifiedZero fake;
    fake.zeta_star = cd(0.3, 1.0);
    EXPECT_THROW(bounded_solution(p, fake), error);
}

TEST(Moments, FirstMomentIsFAtOrigin) {
    const auto& q = quartic();
    const auto rep = derivative_sequence(q.p, q.sol, 12);
    ASSERT_EQ(rep.variant, MomentVariant::value);
    const cd F = evaluate_F(q.p, q.sol, EvalPoint{0.0, 1.0, 0.0});
    EXPECT_LT(relative_difference(rep.D[0], LogComplex::from_complex(F)), 1e-9);
    for (double d : rep.oracle_dev) EXPECT_LT(d, 1e-8);
    EXPECT_GT(rep.delta_hat, 0.0);
    EXPECT_GT(rep.delta_bound, 0.0);
}

TEST(Moments, CertificatePassesAtQuarticZero) {
    const auto& q = quartic();
    const auto rep = derivative_sequence(q.p, q.sol, 30);
    const auto v = nonanalyticity_certificate(rep);
    EXPECT_TRUE(v.pass);
}

TEST(Moments, SyntheticFactorialSequenceFails) {
    // D_k = k! has Taylor coefficients of modulus 1 in t: analytic, so FAIL.
    SingularReport rep;
    rep.m = 4;
    rep.k_max = 30;
    for (int k = 0; k <= 30; ++k) {
        rep.D.push_back(LogComplex::from_polar(std::lgamma(k + 1.0), 0.0));
        rep.oracle_dev.push_back(0.0);
    }
    fit_delta(rep);
    EXPECT_FALSE(nonanalyticity_certificate(rep).pass);
}

TEST(Moments, FitIgnoresOverallScale) {
    SingularReport rep;
    rep.m = 3;
    rep.k_max = 20;
    for (int k = 0; k <= 20; ++k) rep.D.push_back(LogComplex::from_polar(std::lgamma(3.0 * k + 1.0) + 0.3 * (k + 1), 0));
    fit_delta(rep);
    SingularReport doubled = rep;
    for (auto& d : doubled.D) d = d * LogComplex::from_complex(2.0);
    fit_delta(doubled);
    EXPECT_NEAR(rep.delta_hat, std::exp(0.3), 1e-10);
    EXPECT_NEAR(doubled.delta_hat, rep.delta_hat, 1e-10);
    EXPECT_NEAR(doubled.fit_intercept - rep.fit_intercept, std::log(2.0), 1e-10);
}

TEST(Moments, DerivativeVariantWhenValueVanishes) {
    // Synthetic solution data with f(0) = 0: the x-derivative moments are used.
    const auto& q = quartic();
    BoundedSolution sol = q.sol;
    sol.f0 = 0.0;
    sol.f0_prime = cd(0.5, 0.0);
    const auto rep = derivative_sequence(q.p, sol, 12);
    EXPECT_EQ(rep.variant, MomentVariant::x_derivative);
    for (double d : rep.oracle_dev) EXPECT_LT(d, 1e-8);
    const auto v = nonanalyticity_certificate(rep, 4);
    EXPECT_FALSE(v.diagnostics.empty());
}

TEST(Transform, DecaysInY) {
    const auto& q = quartic();
    double prev = 1e300;
    for (double y : {1.0, 2.0, 4.0}) {
        const double a = std::abs(evaluate_F(q.p, q.sol, EvalPoint{0.0, y, 0.0}));
        EXPECT_LT(a, prev);
        prev = a;
    }
    EXPECT_THROW(evaluate_F(q.p, q.sol, EvalPoint{0.0, 0.0, 0.0}), error);
}

TEST(Transform, PdeResidualScalesAsFourthPower) {
    const auto& q = quartic();
    const EvalPoint pt{0.1, 1.0, 0.0};
    const auto a = pde_residual_detail(q.p, q.sol, pt, 2e-2);
    const auto b = pde_residual_detail(q.p, q.sol, pt, 1e-2);
    const double ratio = a.residual / b.residual;
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
    EXPECT_LT(b.residual, 1e-3);
    // stencil centred on x = 0 where the t-direction correction vanishes
    EXPECT_LT(pde_residual(q.p, q.sol, EvalPoint{0.0, 1.0, 0.3}), 1e-3);
    EXPECT_THROW(pde_residual(q.p, q.sol, EvalPoint{0.0, 0.01, 0.0}, 1e-2), error);
}

// zeta* = i beta and m even: V(-x) = conj V(x), so f(-x) = c conj f(x) with |c| = 1
// and F(-x, y, -t) = c conj F(x, y, t) with the same c at every point.
TEST(Transform, ReflectionConjugationSymmetry) {
    const auto& q = quartic();
    ASSERT_NEAR(q.sol.zeta_star.real(), 0.0, 1e-8);
    cd first;
    bool have = false;
    for (EvalPoint pt : {EvalPoint{0.3, 1.0, 0.2}, EvalPoint{-0.5, 1.5, 0.7}, EvalPoint{0.8, 2.0, -0.4}}) {
        const cd a = evaluate_F(q.p, q.sol, EvalPoint{-pt.x, pt.y, -pt.t});
        const cd b = std::conj(evaluate_F(q.p, q.sol, pt));
        const cd c = a / b;
        EXPECT_NEAR(std::abs(c), 1.0, 1e-6);
        if (have) EXPECT_LT(std::abs(c - first), 1e-6);
        first = c;
        have = true;
    }
}
