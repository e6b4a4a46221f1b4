#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "hypo/wronskian.hpp"

using namespace hypo;
using cd = std::complex<double>;

namespace {

Problem make(int m, double alpha = 0.0) {
    Problem p;
    p.m = m;
    p.alpha = alpha;
    return p;
}

}  // namespace

// For m = 2 the recessive solutions are shifted parabolic cylinder functions,
// giving W(zeta) = 4 sqrt(2) e^{zeta^2/2} in this normalization.
TEST(EvalW, QuadraticClosedForm) {
    const Problem p = make(2);
    const auto w0 = eval_W(p, cd(0, 0));
    EXPECT_NEAR(w0.W.log_mag(), std::log(4.0 * std::sqrt(2.0)), 1e-9);
    EXPECT_NEAR(std::abs(w0.W.arg()), 0.0, 1e-9);
    for (cd z : {cd(1.5, 0), cd(0, 2), cd(-2, 1), cd(3, -2.5)}) {
        const auto w = eval_W(p, z);
        const LogComplex expect = w0.W * LogComplex::exp(z * z / 2.0);
        EXPECT_LT(relative_difference(w.W, expect), 1e-8) << z;
    }
}

TEST(EvalW, ConstancyDefectSmall) {
    for (int m : {2, 3, 4, 5}) {
        const Problem p = make(m);
        for (cd z : {cd(0.3, 0.2), cd(-1, 2), cd(2, -1)}) {
            const auto w = eval_W(p, z);
            EXPECT_TRUE(w.reliable(p));
            EXPECT_LT(w.constancy_defect, 1e-8) << "m=" << m << " z=" << z;
            EXPECT_GT(w.cutoff_used, 0.0);
        }
    }
}

TEST(EvalW, ConjugationSymmetry) {
    const Problem p = make(3);
    const cd z(0.7, 1.9);
    const auto a = eval_W(p, z), b = eval_W(p, std::conj(z));
    EXPECT_LT(relative_difference(a.W.conj(), b.W), 1e-10);
}

// Even m: x -> -x swaps the two sides, so W(-zeta) = -W(zeta) up to the
// normalization; in log-magnitude the values agree.
TEST(EvalW, ReflectionSymmetryEvenM) {
    const Problem p = make(4);
    const cd z(1.1, 0.8);
    const auto a = eval_W(p, z), b = eval_W(p, -z);
    EXPECT_NEAR(a.W.log_mag(), b.W.log_mag(), 1e-9);
}

TEST(EvalW, NonzeroAlphaIsWellDefined) {
    const Problem p = make(4, 0.5);
    const auto w = eval_W(p, cd(0.5, 0.5));
    EXPECT_TRUE(std::isfinite(w.W.log_mag()));
    EXPECT_LT(w.constancy_defect, 1e-8);
    // and differs from alpha = 0
    const auto w0 = eval_W(make(4), cd(0.5, 0.5));
    EXPECT_GT(relative_difference(w.W, w0.W), 1e-3);
}

#ifdef HYPO_HAVE_FLOAT128
TEST(EvalW, ExtendedPrecisionAgrees) {
    Problem p = make(4);
    const cd z(0.4, 1.2);
    const auto a = eval_W(p, z);
    p.precision = Precision::extended;
    p.tol.ode_rel_tol = 1e-14;
    const auto b = eval_W(p, z);
    EXPECT_LT(relative_difference(a.W, b.W), 1e-8);
    EXPECT_LT(b.constancy_defect, a.constancy_defect * 10 + 1e-12);
}
#else
TEST(EvalW, ExtendedPrecisionRejectedWhenDisabled) {
    Problem p = make(4);
    p.precision = Precision::extended;
    EXPECT_THROW(eval_W(p, cd(0, 1)), error);
}
#endif

TEST(EvalW, LargeZetaStaysInLogSpace) {
    // |W| ~ e^{zeta^2/2} for m = 2 overflows a double at zeta = 40.
    Problem p = make(2);
    p.cutoff.x_cap = 200.0;
    const auto w = eval_W(p, cd(40, 0));
    EXPECT_NEAR(w.W.log_mag(), std::log(4.0 * std::sqrt(2.0)) + 800.0, 1e-6 * 800.0);
    EXPECT_THROW(w.W.to_complex(), error);
}

TEST(Scan, GridOrderAndErrors) {
    const Problem p = make(2);
    const Region r{-1, 1, 0, 2};
    const auto g = scan(p, r, 3, 2);
    ASSERT_EQ(g.cells.size(), 6u);
    EXPECT_EQ(g.at(0, 0).zeta, cd(-1, 0));
    EXPECT_EQ(g.at(2, 0).zeta, cd(1, 0));
    EXPECT_EQ(g.at(1, 1).zeta, cd(0, 2));
    for (const auto& c : g.cells) EXPECT_TRUE(c.ok);
    EXPECT_THROW(scan(p, Region{0, 0, 0, 1}, 4, 4), error);
    EXPECT_THROW(scan(p, r, 1, 4), error);
    Problem bad = p;
    bad.tol.match_tol = 0;
    EXPECT_THROW(scan(bad, r, 2, 2), error);
}

TEST(Scan, CustomEvaluatorFailuresAreMarked) {
    const Problem p = make(2);
    const auto g = scan_with(p, Region{0, 1, 0, 1}, 2, 2, [](cd) -> WronskianEval {
        throw error(errc::cutoff_failure, "synthetic");
    });
    for (const auto& c : g.cells) {
        EXPECT_FALSE(c.ok);
        EXPECT_NE(c.failure.find("synthetic"), std::string::npos);
    }
}
