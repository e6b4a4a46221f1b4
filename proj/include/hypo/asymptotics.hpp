#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/ode.hpp"
#include "hypo/problem.hpp"

namespace hypo {

enum class Side { plus, minus };

inline const char* to_string(Side s) { return s == Side::plus ? "+inf" : "-inf"; }

// Largest supported series_order.
inline constexpr int max_series_order = 64;

// Sign s of the recessive branch r ~ s Phi'(x) at the given end. Phi = zeta x - x^m
// decays at +inf always and at -inf for even m; for odd m the recessive branch at
// -inf is e^{-Phi}.
inline int recessive_sign(const Problem& p, Side side) {
    return (side == Side::minus && p.m % 2 == 1) ? -1 : 1;
}

// Asymptotic series for the log-derivative r = f'/f of the recessive solution,
//
//     r(x) ~ sum_n c_n x^{m-1-n},   n = 0 .. m-1 + order*m,
//
// obtained by matching powers in r' + r^2 = V. c_0 = -s m and c_{m-1} = s zeta
// reproduce s Phi'; c_m is the exponent of |x| (gamma = -(m-1)/2 when alpha = 0).
template <class Real = double>
struct RiccatiSeries {
    using complex = complex_t<Real>;

    Side side = Side::plus;
    int m = 2;
    int order = 0;
    int lead_sign = 1;
    std::vector<complex> coefficients;

    int power(std::size_t n) const { return m - 1 - static_cast<int>(n); }

    complex gamma_effective() const { return coefficients[static_cast<std::size_t>(m)]; }

    complex r(const Real& x) const {
        complex sum(0);
        // Horner in 1/x from the most negative power upward, then scale.
        const Real inv = Real(1) / x;
        for (std::size_t n = coefficients.size(); n-- > 0;) sum = sum * inv + coefficients[n];
        return sum * ipow(x, m - 1);
    }

    complex r_prime(const Real& x) const {
        complex sum(0);
        for (std::size_t n = 0; n < coefficients.size(); ++n) {
            const int p = power(n);
            if (p == 0) continue;
            sum += coefficients[n] * Real(p) * pow_signed(x, p - 1);
        }
        return sum;
    }

    // Sum of the integrated terms with power <= -2: log f - s Phi - gamma log|x|.
    complex log_correction(const Real& x) const {
        complex sum(0);
        for (std::size_t n = coefficients.size(); n-- > static_cast<std::size_t>(m) + 1;) {
            const int p = power(n);
            sum += coefficients[n] * pow_signed(x, p + 1) / Real(p + 1);
        }
        return sum;
    }

    // Size of the last retained group of terms after integration, i.e. the
    // relative error they contribute to f at x.
    double tail_size(double x) const {
        double worst = 0.0;
        const std::size_t n_end = coefficients.size();
        const std::size_t n_begin = n_end - static_cast<std::size_t>(m);
        for (std::size_t n = n_begin; n < n_end; ++n) {
            const int p = power(n);
            const double c = std::abs(to_std<Real>(coefficients[n]));
            worst = std::max(worst, c * std::pow(std::abs(x), p + 1) / std::abs(p + 1));
        }
        return worst;
    }

private:
    static Real pow_signed(const Real& x, int p) {
        return p >= 0 ? ipow(x, p) : Real(1) / ipow(x, -p);
    }
};

template <class Real = double>
inline RiccatiSeries<Real> riccati_series(const Problem& p, const complex_t<Real>& zeta, Side side, int order) {
    using complex = complex_t<Real>;
    if (order < 2) throw error(errc::invalid_argument, "riccati_series: order must be >= 2");
    if (order > max_series_order) throw error(errc::invalid_argument, "riccati_series: order beyond recursion depth");

    const int m = p.m;
    const int s = recessive_sign(p, side);
    const std::size_t count = static_cast<std::size_t>(m + order * m);

    // V_n: coefficient of x^{2m-2-n} in V.
    auto v_coeff = [&](std::size_t n) -> complex {
        const std::size_t mm = static_cast<std::size_t>(m);
        complex v(0);
        if (n == 0) v += complex(Real(m) * Real(m));
        if (n == mm - 1) v += complex(Real(-2 * m)) * zeta;
        if (n == 2 * mm - 2) v += zeta * zeta;
        if (n == mm) v += complex(Real(-p.alpha) * Real(m * (m - 1)));
        return v;
    };

    RiccatiSeries<Real> out;
    out.side = side;
    out.m = m;
    out.order = order;
    out.lead_sign = s;
    out.coefficients.assign(count, complex(0));
    out.coefficients[0] = complex(Real(-s * m));

    const complex two_c0 = Real(2) * out.coefficients[0];
    for (std::size_t n = 1; n < count; ++n) {
        complex rest(0);
        for (std::size_t j = 1; j < n; ++j) rest += out.coefficients[j] * out.coefficients[n - j];
        if (n >= static_cast<std::size_t>(m)) {
            const long factor = 2L * m - 1 - static_cast<long>(n);
            rest += out.coefficients[n - static_cast<std::size_t>(m)] * Real(factor);
        }
        out.coefficients[n] = (v_coeff(n) - rest) / two_c0;
    }
    return out;
}

// Smallest X >= x_min (on a 2% ladder) with m X^{m-1} >= 4(1 + |zeta|) whose
// retained series tail is below ode_rel_tol / 10 on both ends.
inline double choose_cutoff(const Problem& p, std::complex<double> zeta) {
    p.validate();
    const double a = 4.0 * (1.0 + std::abs(zeta)) / p.m;
    double x = std::max(p.cutoff.x_min, std::pow(a, 1.0 / (p.m - 1)));
    const auto plus = riccati_series<double>(p, zeta, Side::plus, p.series_order);
    const auto minus = riccati_series<double>(p, zeta, Side::minus, p.series_order);
    const double target = p.tol.ode_rel_tol / 10.0;
    while (x <= p.cutoff.x_cap) {
        if (std::max(plus.tail_size(x), minus.tail_size(-x)) < target) return x;
        x *= 1.02;
    }
    throw error(errc::cutoff_failure, "no cutoff below x_cap satisfies the series tail bound");
}

template <class Real = double>
struct InitialData {
    Real x0{};
    SolutionState<Real> state;
};

// Recessive data at x0 = +-cutoff:
//   log_scale = Re(s Phi(x0)) + gamma log|x0|,
//   value     = exp(i Im(s Phi(x0)) + correction),   derivative = r(x0) value.
template <class Real = double>
inline InitialData<Real> initial_data(const Problem& p, const complex_t<Real>& zeta, Side side, double cutoff) {
    using std::imag;
    using std::log;
    using std::real;
    using std::abs;
    using std::exp;
    using complex = complex_t<Real>;

    const auto series = riccati_series<Real>(p, zeta, side, p.series_order);
    const Real x0 = side == Side::plus ? Real(cutoff) : Real(-cutoff);
    const complex s_phi = Real(series.lead_sign) * phi<Real>(p, zeta, x0);
    const Real gamma = real(series.gamma_effective());

    InitialData<Real> out;
    out.x0 = x0;
    out.state.x = x0;
    out.state.log_scale = real(s_phi) + gamma * log(abs(x0));
    out.state.value = exp(complex(Real(0), imag(s_phi)) + series.log_correction(x0));
    out.state.derivative = series.r(x0) * out.state.value;
    return out;
}

template <class Real = double>
inline InitialData<Real> initial_data(const Problem& p, const complex_t<Real>& zeta, Side side) {
    return initial_data<Real>(p, zeta, side, choose_cutoff(p, to_std<Real>(zeta)));
}

}  // namespace hypo
