#pragma once

#include <cmath>
#include <complex>
#include <numeric>

#include "hypo/error.hpp"
#include "hypo/scalar.hpp"

namespace hypo {

struct Tolerances {
    double ode_rel_tol = 1e-11;
    double match_tol = 1e-6;
    double zero_tol = 1e-8;
    double quad_tol = 1e-10;
};

struct CutoffPolicy {
    double x_min = 2.0;
    double x_cap = 50.0;
};

enum class Precision { standard, extended };

// Interior points where the two recessive solutions are matched; the second
// one only measures how constant the Wronskian is.
struct MatchingPoints {
    double primary = 0.0;
    double secondary = 0.4;
};

// Parameters of the ODE family
//
//     -f'' + V(zeta, x) f = 0,   V = (zeta - m x^{m-1})^2 - alpha m (m-1) x^{m-2},
//
// obtained from X^2 + Y^2 + i alpha [X, Y], X = d/dx, Y = d/dy - m x^{m-1} d/dt,
// acting on e^{i tau t + i eta y} g(x): Y -> i(eta - tau m x^{m-1}),
// [X, Y] -> -m(m-1) x^{m-2} d/dt -> -i tau m(m-1) x^{m-2}, so
// i alpha [X, Y] -> alpha tau m(m-1) x^{m-2}. Rescaling x -> tau^{-1/m} x,
// eta = tau^{1/m} zeta removes tau and leaves V above. alpha = 0 is the
// plain sum of squares.
struct Problem {
    int m = 4;
    double alpha = 0.0;
    Tolerances tol;
    int series_order = 8;
    CutoffPolicy cutoff;
    MatchingPoints matching;
    Precision precision = Precision::standard;

    void validate() const {
        if (m < 2) throw error(errc::invalid_argument, "m must be >= 2");
        if (!(tol.ode_rel_tol > 0 && tol.match_tol > 0 && tol.zero_tol > 0 && tol.quad_tol > 0))
            throw error(errc::invalid_argument, "tolerances must be strictly positive");
        if (series_order < 2) throw error(errc::invalid_argument, "series_order must be >= 2");
        if (!std::isfinite(alpha)) throw error(errc::invalid_argument, "alpha must be finite");
        if (!(cutoff.x_min > 0 && cutoff.x_cap >= cutoff.x_min))
            throw error(errc::invalid_argument, "cutoff policy needs 0 < x_min <= x_cap");
        if (matching.primary == matching.secondary)
            throw error(errc::invalid_argument, "matching points must differ");
    }
};

struct EvalPoint {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

struct Rational {
    long num = 0;
    long den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

// x^n by repeated multiplication, so that (-x)^n == +-(x^n) bit for bit.
template <class T>
inline T ipow(const T& x, int n) {
    T out(1);
    for (int i = 0; i < n; ++i) out *= x;
    return out;
}

// Phi_zeta(x) = zeta x - x^m.
template <class Real = double>
inline complex_t<Real> phi(const Problem& p, const complex_t<Real>& zeta, const Real& x) {
    return zeta * x - complex_t<Real>(ipow(x, p.m));
}

inline std::complex<double> phi(const Problem& p, std::complex<double> zeta, double x) {
    return phi<double>(p, zeta, x);
}

// gamma = -(m-1)/2 in lowest terms.
inline Rational gamma_exponent(const Problem& p) {
    if (p.m < 2) throw error(errc::invalid_argument, "gamma_exponent needs m >= 2");
    long num = -(p.m - 1);
    long den = 2;
    const long g = std::gcd(num, den);
    return {num / g, den / g};
}

template <class Real = double>
inline complex_t<Real> potential(const Problem& p, const complex_t<Real>& zeta, const Real& x) {
    const complex_t<Real> d = zeta - complex_t<Real>(Real(p.m) * ipow(x, p.m - 1));
    complex_t<Real> v = d * d;
    if (p.alpha != 0.0) v -= complex_t<Real>(Real(p.alpha) * Real(p.m * (p.m - 1)) * ipow(x, p.m - 2));
    return v;
}

inline std::complex<double> potential(const Problem& p, std::complex<double> zeta, double x) {
    return potential<double>(p, zeta, x);
}

// dV/dx.
inline std::complex<double> potential_derivative(const Problem& p, std::complex<double> zeta, double x) {
    const int m = p.m;
    std::complex<double> v = -2.0 * m * (m - 1) * ipow(x, m - 2) * (zeta - m * ipow(x, m - 1));
    if (p.alpha != 0.0 && m > 2) v -= p.alpha * m * (m - 1) * (m - 2) * ipow(x, m - 3);
    return v;
}

}  // namespace hypo
