#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hypo/asymptotics.hpp"
#include "hypo/error.hpp"
#include "hypo/log_complex.hpp"
#include "hypo/ode.hpp"
#include "hypo/parallel.hpp"
#include "hypo/problem.hpp"
#include "hypo/zeros.hpp"

namespace hypo {

// The bounded null solution at a zero of W: f = f+ on [0, inf) and f-/c on
// (-inf, 0], scaled so that sup |f| = 1 on [-X, X]. Beyond +-X the recessive
// asymptotic series is used.
class BoundedSolution {
public:
    std::complex<double> zeta_star;
    double cutoff = 0.0;
    LogComplex c;                     // f- = c f+ before normalization
    double proportionality_defect = 0.0;
    std::complex<double> f0;          // f(0)
    std::complex<double> f0_prime;    // f'(0)
    double sup_norm = 1.0;

    BoundedSolution() = default;

    BoundedSolution(const Problem& p, std::complex<double> zeta, double cutoff_, DenseOutput<double> plus,
                    DenseOutput<double> minus, LogComplex c_, double norm_log)
        : zeta_star(zeta),
          cutoff(cutoff_),
          c(c_),
          problem_(p),
          plus_(std::move(plus)),
          minus_(std::move(minus)),
          norm_log_(norm_log),
          series_plus_(riccati_series<double>(p, zeta, Side::plus, p.series_order)),
          series_minus_(riccati_series<double>(p, zeta, Side::minus, p.series_order)) {}

    bool has_samples() const { return !plus_.empty() && !minus_.empty(); }
    const DenseOutput<double>& plus_samples() const { return plus_; }
    const DenseOutput<double>& minus_samples() const { return minus_; }

    // (f(x), f'(x)) in the normalized frame.
    std::pair<std::complex<double>, std::complex<double>> eval(double x) const {
        if (x >= 0) {
            if (x <= cutoff) return scaled(plus_(x), norm_log_);
            return asymptotic(series_plus_, x, norm_log_);
        }
        const double shift = norm_log_ + c.log_mag();
        const std::complex<double> rot = std::conj(c.unit());
        auto [v, d] = x >= -cutoff ? scaled(minus_(x), shift) : asymptotic(series_minus_, x, shift);
        return {v * rot, d * rot};
    }

    std::complex<double> value(double x) const { return eval(x).first; }
    std::complex<double> derivative(double x) const { return eval(x).second; }

    // Second derivative as the slope of a quintic Hermite interpolant of f', built
    // from (f', f'', f''') = (g, q f, q' f + q g) at the segment ends.
    std::complex<double> second_derivative(double x) const {
        if (std::abs(x) > cutoff) return potential(problem_, zeta_star, x) * value(x);
        const auto& dense = x >= 0 ? plus_ : minus_;
        double shift = norm_log_;
        std::complex<double> rot = 1.0;
        if (x < 0) {
            shift += c.log_mag();
            rot = std::conj(c.unit());
        }
        const auto& segs = dense.segments();
        auto it = std::upper_bound(segs.begin(), segs.end(), x, [](double v, const auto& s) { return v < s.x0; });
        if (it != segs.begin()) --it;
        const auto& s = *it;
        const double h = s.x1 - s.x0;
        const double t = (x - s.x0) / h;
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        const double d0 = -30 * t2 + 60 * t3 - 30 * t4;
        const double d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
        const double d2 = (2 * t - 9 * t2 + 12 * t3 - 5 * t4) / 2;
        const double d3 = 30 * t2 - 60 * t3 + 30 * t4;
        const double d4 = -12 * t2 + 28 * t3 - 15 * t4;
        const double d5 = (3 * t2 - 8 * t3 + 5 * t4) / 2;
        const auto a0 = s.q0 * s.f0, a1 = s.q1 * s.f1;
        const auto b0 = potential_derivative(problem_, zeta_star, s.x0) * s.f0 + s.q0 * s.g0;
        const auto b1 = potential_derivative(problem_, zeta_star, s.x1) * s.f1 + s.q1 * s.g1;
        const auto fpp = (s.g0 * d0 + s.g1 * d3) / h + a0 * d1 + a1 * d4 + (b0 * d2 + b1 * d5) * h;
        return fpp * std::exp(s.log_scale - shift) * rot;
    }

private:
    static std::pair<std::complex<double>, std::complex<double>> scaled(const SolutionState<double>& s, double shift) {
        const double k = std::exp(s.log_scale - shift);
        return {s.value * k, s.derivative * k};
    }

    std::pair<std::complex<double>, std::complex<double>> asymptotic(const RiccatiSeries<double>& series, double x,
                                                                     double shift) const {
        const std::complex<double> s_phi = static_cast<double>(series.lead_sign) * phi(problem_, zeta_star, x);
        const double gamma = series.gamma_effective().real();
        const std::complex<double> log_f = s_phi + gamma * std::log(std::abs(x)) + series.log_correction(x) - shift;
        const std::complex<double> v = log_f.real() < -745.0 ? std::complex<double>(0.0) : std::exp(log_f);
        return {v, series.r(x) * v};
    }

    Problem problem_;
    DenseOutput<double> plus_, minus_;
    double norm_log_ = 0.0;
    RiccatiSeries<double> series_plus_, series_minus_;
};

// Builds f at a certified zero (upper half plane). Checks proportionality of f+
// and f- at 0, decay at +-X and that (f(0), f'(0)) does not vanish.
inline BoundedSolution bounded_solution(const Problem& p, const CertifiedZero& zero) {
    p.validate();
    const std::complex<double> zeta = zero.zeta_star;
    if (!(zeta.imag() > 0))
        throw error(errc::invalid_argument, "bounded_solution: take the representative with Im zeta > 0");
    const double cutoff = choose_cutoff(p, zeta);
    auto q = [&](double x) { return potential(p, zeta, x); };
    const double rtol = p.tol.ode_rel_tol;

    DenseOutput<double> plus, minus;
    const auto a = integrate<double>(q, initial_data<double>(p, zeta, Side::plus, cutoff).state, 0.0, rtol, &plus);
    const auto b = integrate<double>(q, initial_data<double>(p, zeta, Side::minus, cutoff).state, 0.0, rtol, &minus);

    // Least squares for f- = c f+ on (value, derivative) at 0, in a common frame.
    const std::complex<double> u0 = a.value, u1 = a.derivative, v0 = b.value, v1 = b.derivative;
    const double uu = std::norm(u0) + std::norm(u1);
    const std::complex<double> c_rel = (std::conj(u0) * v0 + std::conj(u1) * v1) / uu;
    const double vv = std::sqrt(std::norm(v0) + std::norm(v1));
    const double spread = std::sqrt(std::norm(v0 - c_rel * u0) + std::norm(v1 - c_rel * u1)) / vv;
    const LogComplex c = LogComplex::from_parts(b.log_scale - a.log_scale, c_rel);

    // sup |f| over breakpoints and segment midpoints, in log form.
    double sup_log = -std::numeric_limits<double>::infinity();
    auto visit = [&](const DenseOutput<double>& dense, double extra) {
        for (const auto& s : dense.segments()) {
            for (double x : {s.x0, 0.5 * (s.x0 + s.x1), s.x1}) {
                const auto st = dense(x);
                const double m = std::abs(st.value);
                if (m > 0) sup_log = std::max(sup_log, std::log(m) + st.log_scale - extra);
            }
        }
    };
    visit(plus, 0.0);
    visit(minus, c.log_mag());

    BoundedSolution sol(p, zeta, cutoff, std::move(plus), std::move(minus), c, sup_log);
    sol.proportionality_defect = spread;
    sol.f0 = sol.value(0.0);
    sol.f0_prime = sol.derivative(0.0);
    sol.sup_norm = 1.0;

    if (spread >= p.tol.match_tol)
        throw error(errc::proportionality_defect,
                    "bounded_solution: f- is not a multiple of f+ (spread " + std::to_string(spread) + ")");
    const double tail = std::max(std::abs(sol.value(cutoff)), std::abs(sol.value(-cutoff)));
    if (!(tail <= 1e-6 * sol.sup_norm)) throw error(errc::decay_failure, "bounded_solution: no decay at +-X");
    if (!(std::max(std::abs(sol.f0), std::abs(sol.f0_prime)) > 1e-6 * sol.sup_norm))
        throw error(errc::decay_failure, "bounded_solution: f and f' both vanish at 0");
    return sol;
}

// Worst relative residual |f'' - V f| / (|V| |f|) over `count` random points of [-X, X].
inline double ode_residual(const Problem& p, const BoundedSolution& sol, std::size_t count, unsigned seed = 7) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-sol.cutoff, sol.cutoff);
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = dist(rng);
        const auto f = sol.value(x);
        const auto v = potential(p, sol.zeta_star, x);
        const auto fpp = sol.second_derivative(x);
        worst = std::max(worst, std::abs(fpp - v * f) / (std::abs(v) * std::abs(f)));
    }
    return worst;
}

enum class MomentVariant { value, x_derivative };

struct SingularReport {
    std::complex<double> zeta_star;
    int m = 0;
    int k_max = 0;
    MomentVariant variant = MomentVariant::value;
    std::vector<LogComplex> D;         // d^k/dt^k F(0,1,0) by quadrature
    std::vector<LogComplex> D_oracle;  // same via incomplete gamma recurrence
    std::vector<double> oracle_dev;
    double delta_hat = 0.0;            // exp(slope) of log|D_k| - log (mk)! against k+1
    double fit_intercept = 0.0;
    double delta_bound = 0.0;          // largest delta with |D_k| >= delta^{k+1} (mk)! on the fit window
    int fit_k_min = 5;
    std::optional<double> pde_residual;
};

namespace detail {

// m i^k c * int_1^inf s^{a-1} e^{i zeta s} ds along the ray s = 1 + r e^{i theta},
// theta = pi/2 - arg zeta, on which e^{i zeta s} decays without oscillating.
inline LogComplex ray_moment(std::complex<double> zeta, int a, double rel_tol) {
    const double theta = std::numbers::pi / 2 - std::arg(zeta);
    const std::complex<double> dir = std::polar(1.0, theta);
    const std::complex<double> iz(-zeta.imag(), zeta.real());
    auto log_integrand = [&](double r) {
        const std::complex<double> s = 1.0 + r * dir;
        return static_cast<double>(a - 1) * std::log(s) + iz * s;
    };
    // Peak of the modulus: (a-1) d/dr log|s| = |zeta|.
    const double az = std::abs(zeta);
    double lo = 0.0, hi = std::max(1.0, 2.0 * a / az);
    auto slope = [&](double r) {
        const double c = std::cos(theta);
        return static_cast<double>(a - 1) * (c + r) / (1 + 2 * r * c + r * r) - az;
    };
    if (slope(0.0) <= 0) {
        hi = 0.0;
    } else {
        while (slope(hi) > 0) hi *= 2;
        for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) > 0 ? lo : hi) = mid;
        }
    }
    const double r_peak = hi;
    const double shift = log_integrand(r_peak).real();
    // Truncate where the integrand is 1e-17 below its peak.
    const double drop = std::log(1e17);
    double r_end = std::max(r_peak, 1.0);
    while (log_integrand(r_end).real() > shift - drop) r_end = r_peak + 2.0 * (r_end - r_peak + 1.0);

    auto f = [&](double r) { return std::exp(log_integrand(r) - shift) * dir; };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err1 = 0, err2 = 0;
    std::complex<double> sum(0.0);
    if (r_peak > 0) sum += gk::integrate(f, 0.0, r_peak, 20, rel_tol, &err1);
    sum += gk::integrate(f, r_peak, r_end, 20, rel_tol, &err2);
    if (!(std::isfinite(sum.real()) && std::isfinite(sum.imag())))
        throw error(errc::quadrature_failure, "ray_moment: non-finite quadrature");
    return LogComplex::from_complex(sum) * LogComplex::from_polar(shift, 0.0);
}

// Gamma(a, w) / w^a for integer a >= 1 by Gamma(j+1, w) = j Gamma(j, w) + w^j e^{-w}.
inline LogComplex incomplete_gamma_ratio(int a, std::complex<double> w) {
    const LogComplex ew = LogComplex::exp(-w);
    const std::complex<double> log_w = std::log(w);
    LogComplex g = ew;  // Gamma(1, w)
    for (int j = 1; j < a; ++j)
        g = g * LogComplex::from_complex(static_cast<double>(j)) + LogComplex::exp(static_cast<double>(j) * log_w - w);
    return g / LogComplex::exp(static_cast<double>(a) * log_w);
}

inline LogComplex i_power(int k) {
    static const std::complex<double> table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return LogComplex::from_complex(table[k % 4]);
}

}  // namespace detail

// Fits log|D_k| - log (mk)! = A + (k+1) log delta on k in [fit_k_min, k_max]
// (delta_hat), and takes the largest delta with |D_k| >= delta^{k+1} (mk)! on
// the same window (delta_bound). Multiplying every D_k by a constant moves only A.
inline void fit_delta(SingularReport& rep) {
    const int m = rep.m;
    const int k_max = std::min<int>(rep.k_max, static_cast<int>(rep.D.size()) - 1);
    rep.fit_k_min = std::min(5, k_max);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    double bound_log = std::numeric_limits<double>::infinity();
    for (int k = rep.fit_k_min; k <= k_max; ++k) {
        const double x = k + 1.0;
        const double y = rep.D[static_cast<std::size_t>(k)].log_mag() - std::lgamma(m * k + 1.0);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
        bound_log = std::min(bound_log, y / x);
    }
    rep.delta_hat = 0.0;
    rep.fit_intercept = 0.0;
    if (count >= 2) {
        const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        rep.delta_hat = std::exp(slope);
        rep.fit_intercept = (sy - slope * sx) / count;
    }
    rep.delta_bound = std::exp(bound_log);
}

// D_k = d^k/dt^k F(0,1,0) = f(0) i^k m int_1^inf s^{mk+m-1} e^{i zeta s} ds for k <= k_max,
// each checked against Gamma(a, w)/w^a with a = mk+m, w = -i zeta. When f(0) is
// negligible the x-derivative moments (f'(0), a = mk+m+1) are used instead.
inline SingularReport derivative_sequence(const Problem& p, const BoundedSolution& sol, int k_max) {
    if (!(sol.zeta_star.imag() > 0)) throw error(errc::invalid_argument, "derivative_sequence: needs Im zeta > 0");
    if (k_max < 1) throw error(errc::invalid_argument, "derivative_sequence: k_max must be >= 1");
    const int m = p.m;
    SingularReport rep;
    rep.zeta_star = sol.zeta_star;
    rep.m = m;
    rep.k_max = k_max;
    rep.variant = std::abs(sol.f0) > 1e-6 * sol.sup_norm ? MomentVariant::value : MomentVariant::x_derivative;
    const std::complex<double> amp = rep.variant == MomentVariant::value ? sol.f0 : sol.f0_prime;
    const int extra = rep.variant == MomentVariant::value ? 0 : 1;
    const LogComplex pref = LogComplex::from_complex(amp * static_cast<double>(m));
    const std::complex<double> w(sol.zeta_star.imag(), -sol.zeta_star.real());  // -i zeta

    const auto n = static_cast<std::size_t>(k_max + 1);
    rep.D.resize(n);
    rep.D_oracle.resize(n);
    rep.oracle_dev.resize(n);
    const double rel_tol = std::min(1e-13, p.tol.quad_tol);
    parallel_for(n, [&](std::size_t k) {
        const int a = m * static_cast<int>(k) + m + extra;
        const LogComplex ik = detail::i_power(static_cast<int>(k));
        rep.D[k] = pref * ik * detail::ray_moment(sol.zeta_star, a, rel_tol);
        rep.D_oracle[k] = pref * ik * detail::incomplete_gamma_ratio(a, w);
        rep.oracle_dev[k] = std::exp((rep.D[k] - rep.D_oracle[k]).log_mag() - rep.D_oracle[k].log_mag());
    });

    fit_delta(rep);
    return rep;
}

namespace detail {

// Smallest S with m int_S^inf s^{m-1} e^{-b s} ds below `target` (closed form for integer m).
inline double envelope_cutoff(int m, double b, double target) {
    auto tail = [&](double S) {
        // m Gamma(m, bS) / b^m = m (m-1)! e^{-bS} sum_{k<m} (bS)^k / k! / b^m
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < m; ++k) {
            term *= b * S / k;
            sum += term;
        }
        return std::exp(std::log(m * std::tgamma(m) * sum) - b * S - m * std::log(b));
    };
    double S = 2.0;
    while (tail(S) > target) {
        S *= 1.5;
        if (S > 1e7) throw error(errc::quadrature_failure, "evaluate_F: truncation bound unreachable");
    }
    return S;
}

}  // namespace detail

// F(x,y,t) = int_1^inf e^{i tau t + i tau^{1/m} zeta y} f(tau^{1/m} x) dtau
//          = m int_1^inf s^{m-1} e^{i s^m t + i s zeta y} f(s x) ds,   y > 0.
inline std::complex<double> evaluate_F(const Problem& p, const BoundedSolution& sol, const EvalPoint& pt) {
    if (!(pt.y > 0)) throw error(errc::invalid_argument, "evaluate_F: requires y > 0");
    if (!(sol.zeta_star.imag() > 0)) throw error(errc::invalid_argument, "evaluate_F: requires Im zeta > 0");
    const int m = p.m;
    const double b = pt.y * sol.zeta_star.imag();
    const double S = detail::envelope_cutoff(m, b, 0.01 * p.tol.quad_tol);
    const std::complex<double> izy = std::complex<double>(0, 1) * sol.zeta_star * pt.y;
    auto f = [&](double s) {
        const double sm = ipow(s, m);
        return static_cast<double>(m) * (sm / s) * std::exp(std::complex<double>(0, sm * pt.t) + izy * s) *
               sol.value(s * pt.x);
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    double err = 0.0, l1 = 0.0;
    const std::complex<double> out = gk::integrate(f, 1.0, S, 25, 0.1 * p.tol.quad_tol, &err, &l1);
    if (!(std::isfinite(out.real()) && std::isfinite(out.imag())) || err > p.tol.quad_tol * (1.0 + std::abs(out)))
        throw error(errc::quadrature_failure, "evaluate_F: quadrature did not reach quad_tol");
    return out;
}

struct PdeResidual {
    double residual = 0.0;  // |LF| / (|F| + sum |F_i| h^-2 quad_tol)
    double floor = 0.0;     // the quadrature-noise part of that denominator, relative to |F|
    std::complex<double> LF;
    std::complex<double> F;
};

// L F = F_xx + (d/dy - m x^{m-1} d/dt)^2 F by fourth-order central differences;
// the Y^2 term is a second difference along the direction (0, 1, -m x^{m-1}).
inline PdeResidual pde_residual_detail(const Problem& p, const BoundedSolution& sol, const EvalPoint& pt, double h) {
    if (!(h > 0) || !(pt.y > 4 * h)) throw error(errc::invalid_argument, "pde_residual: needs y > 4h, h > 0");
    const double c = p.m * ipow(pt.x, p.m - 1);
    std::array<EvalPoint, 9> pts;
    pts[0] = pt;
    const std::array<double, 4> off = {-2, -1, 1, 2};
    for (std::size_t i = 0; i < 4; ++i) {
        pts[1 + i] = {pt.x + off[i] * h, pt.y, pt.t};
        pts[5 + i] = {pt.x, pt.y + off[i] * h, pt.t - c * off[i] * h};
    }
    std::array<std::complex<double>, 9> vals;
    parallel_for(9, [&](std::size_t i) { vals[i] = evaluate_F(p, sol, pts[i]); });

    const std::array<double, 4> w = {-1.0, 16.0, 16.0, -1.0};
    const double inv = 1.0 / (12.0 * h * h);
    std::complex<double> xx = -30.0 * vals[0], yy = -30.0 * vals[0];
    for (std::size_t i = 0; i < 4; ++i) {
        xx += w[i] * vals[1 + i];
        yy += w[i] * vals[5 + i];
    }
    PdeResidual out;
    out.F = vals[0];
    out.LF = (xx + yy) * inv;
    double stencil = 0.0;
    for (const auto& v : vals) stencil += std::abs(v);
    const double noise = stencil * p.tol.quad_tol / (h * h);
    out.residual = std::abs(out.LF) / (std::abs(out.F) + noise);
    out.floor = noise / std::abs(out.F);
    return out;
}

inline double pde_residual(const Problem& p, const BoundedSolution& sol, const EvalPoint& pt, double h = 1e-2) {
    return pde_residual_detail(p, sol, pt, h).residual;
}

struct Verdict {
    bool pass = false;
    std::vector<std::string> diagnostics;
};

// PASS iff delta_hat > 0, every oracle deviation is below 1e-8 and
// g_k = (log|D_k| - log k!)/k increases strictly on [tail_start, k_max]
// (the Taylor coefficients D_k / k! in t grow without bound).
inline Verdict nonanalyticity_certificate(const SingularReport& rep, int tail_start = 10) {
    Verdict v;
    bool ok = true;
    if (!(rep.delta_hat > 0)) {
        ok = false;
        v.diagnostics.push_back("fitted delta is not positive");
    }
    for (std::size_t k = 0; k < rep.oracle_dev.size(); ++k) {
        if (!(rep.oracle_dev[k] < 1e-8)) {
            ok = false;
            v.diagnostics.push_back("quadrature and oracle disagree at k = " + std::to_string(k));
            break;
        }
    }
    const int lo = std::min(tail_start, std::max(1, rep.k_max / 3));
    if (rep.k_max - lo < 2) {
        ok = false;
        v.diagnostics.push_back("tail window too short");
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = lo; k <= rep.k_max && k < static_cast<int>(rep.D.size()); ++k) {
        const double g = (rep.D[static_cast<std::size_t>(k)].log_mag() - std::lgamma(k + 1.0)) / k;
        if (!(g > prev)) {
            ok = false;
            v.diagnostics.push_back("(log|D_k| - log k!)/k stops increasing at k = " + std::to_string(k));
            break;
        }
        prev = g;
    }
    if (rep.variant == MomentVariant::x_derivative)
        v.diagnostics.push_back("f(0) vanishes: moments of d/dx d^k/dt^k F with f'(0) were used");
    v.pass = ok;
    return v;
}

}  // namespace hypo
