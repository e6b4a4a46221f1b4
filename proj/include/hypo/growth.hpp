#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/parallel.hpp"
#include "hypo/problem.hpp"
#include "hypo/wronskian.hpp"

namespace hypo {

struct EigenEstimate {
    double zeta = 0.0;
    double lambda_min = 0.0;       // Richardson-extrapolated from n and 2n
    double lambda_coarse = 0.0;    // at n points
    double lambda_fine = 0.0;      // at 2n points
    double cutoff = 0.0;           // Xd
    std::size_t points = 0;        // n
    double refinement_defect = 0.0;

    bool converged() const { return refinement_defect < 1e-3 * std::max(1.0, lambda_min); }
};

namespace detail {

// Smallest eigenvalue of tridiag(-1/h^2, 2/h^2 + V_i, -1/h^2) by inverse
// iteration (the matrix is symmetric positive definite for real zeta).
inline double tridiagonal_ground_state(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    const double off = -1.0 / (h * h);
    std::vector<double> diag(n), c(n), x(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = 2.0 / (h * h) + v[i];
    // Thomas factorization, reused for every solve.
    std::vector<double> denom(n);
    denom[0] = diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        c[i - 1] = off / denom[i - 1];
        denom[i] = diag[i] - off * c[i - 1];
        if (!(denom[i] > 0)) throw error(errc::no_convergence, "lowest_eigenvalue: matrix is not positive definite");
    }
    auto solve = [&](const std::vector<double>& rhs, std::vector<double>& out) {
        out[0] = rhs[0] / denom[0];
        for (std::size_t i = 1; i < n; ++i) out[i] = (rhs[i] - off * out[i - 1]) / denom[i];
        for (std::size_t i = n - 1; i-- > 0;) out[i] -= c[i] * out[i + 1];
    };
    auto normalize = [](std::vector<double>& u) {
        double s = 0;
        for (double e : u) s += e * e;
        s = std::sqrt(s);
        for (double& e : u) e /= s;
    };
    normalize(x);
    double lambda = 0.0;
    for (int it = 0; it < 2000; ++it) {
        solve(x, y);
        double dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += x[i] * y[i];
        const double next = 1.0 / dot;  // Rayleigh quotient of A^{-1}
        normalize(y);
        x.swap(y);
        if (it > 2 && std::abs(next - lambda) <= 1e-14 * std::abs(next)) return next;
        lambda = next;
    }
    throw error(errc::no_convergence, "lowest_eigenvalue: inverse iteration did not converge");
}

inline double grid_eigenvalue(const Problem& p, double zeta, double xd, std::size_t n) {
    const double h = 2.0 * xd / static_cast<double>(n + 1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = potential(p, std::complex<double>(zeta), -xd + h * (i + 1.0)).real();
    return tridiagonal_ground_state(v, h);
}

// WKB decay int sqrt(V - lambda) dx from the outermost turning point to x_end
// (x_end on either side).
inline double wkb_decay(const Problem& p, double zeta, double lambda, double x_end) {
    const int steps = 400;
    const double dx = x_end / steps;
    double sum = 0.0;
    for (int i = steps; i > 0; --i) {
        const double x = dx * (i - 0.5);
        const double w = potential(p, std::complex<double>(zeta), x).real() - lambda;
        if (w <= 0) break;
        sum += std::sqrt(w) * std::abs(dx);
    }
    return sum;
}

}  // namespace detail

// Smallest X >= 1 (5% ladder) with V(+-X) >= 10 lambda and a WKB decay of at
// least 20 on both sides, for a trial lambda.
inline double choose_eigen_cutoff(const Problem& p, double zeta, double lambda) {
    for (double x = 1.0; x < 1e3; x *= 1.05) {
        bool ok = true;
        for (double end : {x, -x}) {
            ok = ok && potential(p, std::complex<double>(zeta), end).real() >= 10.0 * lambda &&
                 detail::wkb_decay(p, zeta, lambda, end) >= 20.0;
        }
        if (ok) return x;
    }
    throw error(errc::insufficient_domain, "lowest_eigenvalue: no domain satisfies the decay requirement");
}

// Ground state of -d^2/dx^2 + V(zeta, x) with Dirichlet conditions at +-xd by second
// differences on n interior points, checked against 2n. xd <= 0 selects it automatically.
inline EigenEstimate lowest_eigenvalue(const Problem& p, double zeta, double xd = 0.0, std::size_t n = 4000) {
    p.validate();
    if (n < 16) throw error(errc::invalid_argument, "lowest_eigenvalue: n must be at least 16");
    if (!std::isfinite(zeta)) throw error(errc::invalid_argument, "lowest_eigenvalue: zeta must be finite");
    if (xd <= 0) {
        double guess = 1.0;
        for (int pass = 0; pass < 8; ++pass) {
            xd = choose_eigen_cutoff(p, zeta, guess);
            const double lam = detail::grid_eigenvalue(p, zeta, xd, std::max<std::size_t>(n / 8, 256));
            if (lam <= guess) break;
            guess = 1.5 * lam;
        }
    }
    EigenEstimate out;
    out.zeta = zeta;
    out.cutoff = xd;
    out.points = n;
    out.lambda_coarse = detail::grid_eigenvalue(p, zeta, xd, n);
    out.lambda_fine = detail::grid_eigenvalue(p, zeta, xd, 2 * n + 1);  // h halves exactly
    out.lambda_min = (4.0 * out.lambda_fine - out.lambda_coarse) / 3.0;
    out.refinement_defect = std::abs(out.lambda_fine - out.lambda_coarse);
    const double wall = std::min(potential(p, std::complex<double>(zeta), xd).real(),
                                 potential(p, std::complex<double>(zeta), -xd).real());
    if (wall < 10.0 * out.lambda_min)
        throw error(errc::insufficient_domain, "lowest_eigenvalue: V(+-Xd) is below 10 lambda");
    return out;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;          // residual root mean square
    double max_residual = 0.0;
    double slope_stderr = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw error(errc::degenerate_fit, "least_squares: need two or more points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0)) throw error(errc::degenerate_fit, "least_squares: abscissae coincide");
    if (!(syy > 0)) throw error(errc::degenerate_fit, "least_squares: data are flat");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
        f.max_residual = std::max(f.max_residual, std::abs(r));
    }
    f.rms = std::sqrt(ss / n);
    f.slope_stderr = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return f;
}

struct GrowthFit {
    int m = 0;
    std::vector<double> radii;
    std::size_t angles = 0;
    std::size_t excluded_samples = 0;  // unreliable but far below the circle maximum
    double log_abs_W0 = 0.0;
    std::vector<double> log_max;        // log max_{|zeta|=R} |W|
    double exponent_est = 0.0;          // rho hat
    LineFit order_fit;                  // log(log M(R) - log|W(0)|) against log R
    std::vector<double> real_zeta;      // real-axis samples used for the second fit
    std::vector<double> real_log_abs;
    double slope_real_axis = 0.0;       // delta hat
    LineFit real_fit;                   // log|W(zeta)| against |zeta|^{m/(m-1)}
    double real_range = 0.0;            // spread of log|W| over the real samples
};

// Order of growth from circles |zeta| = R (angles 2 pi j / n, so the real axis
// is sampled) and the real-axis fit. log M(R) is taken relative to log|W(0)| so
// the constant factor in W does not bias the slope at desk radii. On the real
// axis both signs are used for even m and zeta > 0 only for odd m.
inline GrowthFit fit_growth(const Problem& p_in, const std::vector<double>& radii, std::size_t angles = 64) {
    if (radii.size() < 4) throw error(errc::invalid_argument, "fit_growth: need at least four radii");
    for (std::size_t i = 0; i < radii.size(); ++i)
        if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1])))
            throw error(errc::invalid_argument, "fit_growth: radii must be positive and increasing");
    if (angles < 8 || angles % 4 != 0) throw error(errc::invalid_argument, "fit_growth: angles must be a multiple of 4");

    // The cutoff must clear the turning region of the largest circle.
    Problem p = p_in;
    const double need = std::pow(4.0 * (1.0 + radii.back()) / p.m, 1.0 / (p.m - 1));
    p.cutoff.x_cap = std::max(p.cutoff.x_cap, 1.6 * need);
    p.validate();

    const std::size_t nr = radii.size();
    std::vector<double> samples(nr * angles), defects(nr * angles);
    parallel_for(samples.size(), [&](std::size_t k) {
        const std::size_t i = k / angles, j = k % angles;
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(angles);
        const auto w = eval_W(p, std::polar(radii[i], theta));
        samples[k] = w.W.log_mag();
        defects[k] = w.constancy_defect;
    });

    GrowthFit g;
    g.m = p.m;
    g.radii = radii;
    g.angles = angles;
    g.log_abs_W0 = eval_W(p, 0.0).W.log_mag();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < nr; ++i) {
        const double mx = *std::max_element(samples.begin() + i * angles, samples.begin() + (i + 1) * angles);
        // Unreliable samples are tolerated only where |W| is so far below the
        // circle maximum that even an O(1) relative error could not reach it.
        for (std::size_t j = 0; j < angles; ++j) {
            const std::size_t k = i * angles + j;
            if (defects[k] < p.tol.match_tol) continue;
            const bool on_real_axis = j == 0 || (p.m % 2 == 0 && j == angles / 2);
            if (on_real_axis || !(samples[k] + std::log1p(std::min(defects[k], 1e300)) < mx - 1.0))
                throw error(errc::unreliable_contour,
                            "fit_growth: constancy defect above match_tol at R = " + std::to_string(radii[i]));
            ++g.excluded_samples;
        }
        g.log_max.push_back(mx);
        const double excess = mx - g.log_abs_W0;
        if (!(excess > 0)) throw error(errc::degenerate_fit, "fit_growth: max |W| on a circle does not exceed |W(0)|");
        lx.push_back(std::log(radii[i]));
        ly.push_back(std::log(excess));
    }
    g.order_fit = least_squares(lx, ly);
    g.exponent_est = g.order_fit.slope;

    const double expo = static_cast<double>(p.m) / (p.m - 1);
    std::vector<double> rx, ry;
    for (std::size_t i = 0; i < nr; ++i) {
        g.real_zeta.push_back(radii[i]);
        g.real_log_abs.push_back(samples[i * angles]);
        if (p.m % 2 == 0) {
            g.real_zeta.push_back(-radii[i]);
            g.real_log_abs.push_back(samples[i * angles + angles / 2]);
        }
    }
    for (std::size_t i = 0; i < g.real_zeta.size(); ++i) {
        rx.push_back(std::pow(std::abs(g.real_zeta[i]), expo));
        ry.push_back(g.real_log_abs[i]);
    }
    g.real_fit = least_squares(rx, ry);
    g.slope_real_axis = g.real_fit.slope;
    g.real_range = *std::max_element(ry.begin(), ry.end()) - *std::min_element(ry.begin(), ry.end());
    return g;
}

struct IntegralityReport {
    int m = 0;
    double exponent_est = 0.0;
    int nearest_integer = 0;
    double gap = 0.0;
    double fit_residual = 0.0;  // standard error of the fitted order
    bool applicable = true;     // false for m = 2, where m/(m-1) is an integer
    bool separated = false;     // gap > 3 fit_residual
};

inline IntegralityReport integrality_gap(const GrowthFit& g) {
    IntegralityReport r;
    r.m = g.m;
    r.exponent_est = g.exponent_est;
    r.nearest_integer = static_cast<int>(std::lround(g.exponent_est));
    r.gap = std::abs(g.exponent_est - r.nearest_integer);
    r.fit_residual = g.order_fit.slope_stderr;
    r.applicable = g.m >= 3;
    r.separated = r.applicable && r.gap > 3.0 * r.fit_residual;
    return r;
}

}  // namespace hypo
