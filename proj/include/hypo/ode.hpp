#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/log_complex.hpp"
#include "hypo/scalar.hpp"

namespace hypo {

// A solution of f'' = q f at x, stored as e^{log_scale} * (value, derivative).
template <class Real = double>
struct SolutionState {
    using complex = complex_t<Real>;

    Real x{};
    complex value{};
    complex derivative{};
    Real log_scale{};
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t renormalizations = 0;
};

// Piecewise quintic Hermite interpolant built from accepted steps. Each
// segment keeps the frame (log_scale) its step was taken in, and uses
// f'' = q f for the second-derivative data.
template <class Real = double>
class DenseOutput {
public:
    using complex = complex_t<Real>;

    struct Segment {
        Real x0{}, x1{};
        complex f0{}, g0{}, q0{};
        complex f1{}, g1{}, q1{};
        Real log_scale{};
    };

    void push(Segment s) {
        if (s.x1 < s.x0) {
            std::swap(s.x0, s.x1);
            std::swap(s.f0, s.f1);
            std::swap(s.g0, s.g1);
            std::swap(s.q0, s.q1);
        }
        segments_.push_back(s);
    }

    // Sorts segments by position; call once after integration.
    void finalize() {
        std::sort(segments_.begin(), segments_.end(),
                  [](const Segment& a, const Segment& b) { return a.x0 < b.x0; });
    }

    bool empty() const { return segments_.empty(); }
    Real lower() const { return segments_.front().x0; }
    Real upper() const { return segments_.back().x1; }
    const std::vector<Segment>& segments() const { return segments_; }

    std::vector<Real> breakpoints() const {
        std::vector<Real> out;
        out.reserve(segments_.size() + 1);
        for (const auto& s : segments_) out.push_back(s.x0);
        if (!segments_.empty()) out.push_back(segments_.back().x1);
        return out;
    }

    SolutionState<Real> operator()(const Real& x) const {
        if (segments_.empty() || x < lower() || x > upper())
            throw error(errc::invalid_argument, "DenseOutput: point outside the integrated range");
        auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                                   [](const Real& v, const Segment& s) { return v < s.x0; });
        if (it != segments_.begin()) --it;
        const Segment& s = *it;

        SolutionState<Real> out;
        out.x = x;
        out.log_scale = s.log_scale;
        if (x == s.x0) {
            out.value = s.f0;
            out.derivative = s.g0;
            return out;
        }
        if (x == s.x1) {
            out.value = s.f1;
            out.derivative = s.g1;
            return out;
        }
        const Real h = s.x1 - s.x0;
        const Real t = (x - s.x0) / h;
        const Real t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const Real h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        const Real h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        const Real h2 = (t2 - 3 * t3 + 3 * t4 - t5) / 2;
        const Real h3 = 10 * t3 - 15 * t4 + 6 * t5;
        const Real h4 = -4 * t3 + 7 * t4 - 3 * t5;
        const Real h5 = (t3 - 2 * t4 + t5) / 2;
        const Real d0 = -30 * t2 + 60 * t3 - 30 * t4;
        const Real d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
        const Real d2 = (2 * t - 9 * t2 + 12 * t3 - 5 * t4) / 2;
        const Real d3 = 30 * t2 - 60 * t3 + 30 * t4;
        const Real d4 = -12 * t2 + 28 * t3 - 15 * t4;
        const Real d5 = (3 * t2 - 8 * t3 + 5 * t4) / 2;
        const complex a0 = s.q0 * s.f0;
        const complex a1 = s.q1 * s.f1;
        out.value = s.f0 * h0 + s.g0 * (h * h1) + a0 * (h * h * h2) + s.f1 * h3 + s.g1 * (h * h4) + a1 * (h * h * h5);
        out.derivative = (s.f0 * d0 + s.f1 * d3) / h + s.g0 * d1 + s.g1 * d4 + (a0 * d2 + a1 * d5) * h;
        return out;
    }

private:
    std::vector<Segment> segments_;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
template <class Real>
struct DormandPrince {
    static Real r(long n, long d) { return Real(n) / Real(d); }
    const Real c2 = r(1, 5), c3 = r(3, 10), c4 = r(4, 5), c5 = r(8, 9);
    const Real a21 = r(1, 5);
    const Real a31 = r(3, 40), a32 = r(9, 40);
    const Real a41 = r(44, 45), a42 = r(-56, 15), a43 = r(32, 9);
    const Real a51 = r(19372, 6561), a52 = r(-25360, 2187), a53 = r(64448, 6561), a54 = r(-212, 729);
    const Real a61 = r(9017, 3168), a62 = r(-355, 33), a63 = r(46732, 5247), a64 = r(49, 176),
               a65 = r(-5103, 18656);
    const Real b1 = r(35, 384), b3 = r(500, 1113), b4 = r(125, 192), b5 = r(-2187, 6784), b6 = r(11, 84);
    const Real e1 = r(71, 57600), e3 = r(-71, 16695), e4 = r(71, 1920), e5 = r(-17253, 339200),
               e6 = r(22, 525), e7 = r(-1, 40);
};

template <class Real>
inline Real local_length(const complex_t<Real>& q) {
    using std::abs;
    using std::sqrt;
    return Real(1) / sqrt(Real(1) + abs(q));
}

template <class Real>
inline bool finite(const complex_t<Real>& z) {
    using std::imag;
    using std::real;
    const Real re = real(z), im = imag(z);
    return re == re && im == im && re - re == Real(0) && im - im == Real(0);
}

// Rescales to unit max-norm when the state leaves [1e-2, 1e2].
template <class Real>
inline bool renormalize(SolutionState<Real>& s, const Real& length) {
    using std::abs;
    using std::log;
    using std::max;
    const Real norm = max(abs(s.value), abs(s.derivative) * length);
    if (norm >= Real(1e-2) && norm <= Real(1e2)) return false;
    if (norm == Real(0)) return false;
    s.value /= norm;
    s.derivative /= norm;
    s.log_scale += log(norm);
    return true;
}

}  // namespace detail

// Adaptive integration of f'' = q(x) f from start.x to x_end. The error of each
// step is measured relative to the state in the scaled frame max(|f|, L|f'|),
// L = (1 + |q|)^{-1/2}. Callers integrate in the direction in which the tracked
// solution dominates.
template <class Real = double, class Q>
SolutionState<Real> integrate(Q&& q, SolutionState<Real> start, const Real& x_end, double rel_tol,
                              DenseOutput<Real>* dense = nullptr, IntegrationStats* stats = nullptr) {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    using complex = complex_t<Real>;

    if (!(rel_tol > 0)) throw error(errc::invalid_argument, "integrate: rel_tol must be positive");
    const detail::DormandPrince<Real> tab;
    IntegrationStats local_stats;
    IntegrationStats& st = stats ? *stats : local_stats;

    SolutionState<Real> s = start;
    if (s.x == x_end) return s;
    const Real dir = x_end > s.x ? Real(1) : Real(-1);
    const Real tol(rel_tol);

    auto eval_q = [&](const Real& x) -> complex {
        complex v = q(x);
        if (!detail::finite<Real>(v))
            throw error(errc::non_finite, "integrate: coefficient is not finite at x = " +
                                              std::to_string(scalar_traits<Real>::to_double(x)));
        return v;
    };

    complex q0 = eval_q(s.x);
    Real length = detail::local_length<Real>(q0);
    if (detail::renormalize(s, length)) ++st.renormalizations;
    Real h = dir * min(abs(x_end - s.x), Real(0.05) * length);
    Real err_prev(1e-4);

    while (s.x != x_end) {
        bool last = false;
        if (abs(h) >= abs(x_end - s.x)) {
            h = x_end - s.x;
            last = true;
        }
        const Real x = s.x;
        const complex f = s.value, g = s.derivative;

        // y = (f, g), y' = (g, q f)
        const complex kf1 = g, kg1 = q0 * f;
        complex ff = f + h * (tab.a21 * kf1), gg = g + h * (tab.a21 * kg1);
        const complex kf2 = gg, kg2 = eval_q(x + tab.c2 * h) * ff;
        ff = f + h * (tab.a31 * kf1 + tab.a32 * kf2);
        gg = g + h * (tab.a31 * kg1 + tab.a32 * kg2);
        const complex kf3 = gg, kg3 = eval_q(x + tab.c3 * h) * ff;
        ff = f + h * (tab.a41 * kf1 + tab.a42 * kf2 + tab.a43 * kf3);
        gg = g + h * (tab.a41 * kg1 + tab.a42 * kg2 + tab.a43 * kg3);
        const complex kf4 = gg, kg4 = eval_q(x + tab.c4 * h) * ff;
        ff = f + h * (tab.a51 * kf1 + tab.a52 * kf2 + tab.a53 * kf3 + tab.a54 * kf4);
        gg = g + h * (tab.a51 * kg1 + tab.a52 * kg2 + tab.a53 * kg3 + tab.a54 * kg4);
        const complex kf5 = gg, kg5 = eval_q(x + tab.c5 * h) * ff;
        ff = f + h * (tab.a61 * kf1 + tab.a62 * kf2 + tab.a63 * kf3 + tab.a64 * kf4 + tab.a65 * kf5);
        gg = g + h * (tab.a61 * kg1 + tab.a62 * kg2 + tab.a63 * kg3 + tab.a64 * kg4 + tab.a65 * kg5);
        const Real x1 = last ? x_end : x + h;
        const complex q1 = eval_q(x1);
        const complex kf6 = gg, kg6 = q1 * ff;
        const complex f1 = f + h * (tab.b1 * kf1 + tab.b3 * kf3 + tab.b4 * kf4 + tab.b5 * kf5 + tab.b6 * kf6);
        const complex g1 = g + h * (tab.b1 * kg1 + tab.b3 * kg3 + tab.b4 * kg4 + tab.b5 * kg5 + tab.b6 * kg6);
        const complex kf7 = g1, kg7 = q1 * f1;
        const complex ef =
            h * (tab.e1 * kf1 + tab.e3 * kf3 + tab.e4 * kf4 + tab.e5 * kf5 + tab.e6 * kf6 + tab.e7 * kf7);
        const complex eg =
            h * (tab.e1 * kg1 + tab.e3 * kg3 + tab.e4 * kg4 + tab.e5 * kg5 + tab.e6 * kg6 + tab.e7 * kg7);

        const Real length1 = detail::local_length<Real>(q1);
        const Real len = min(length, length1);
        const Real scale = max(max(abs(f), abs(g) * len), max(abs(f1), abs(g1) * len));
        Real err = max(abs(ef), abs(eg) * len) / (tol * scale);
        if (!(err == err)) err = Real(1e10);

        if (err <= Real(1)) {
            ++st.accepted;
            if (dense) dense->push({x, x1, f, g, q0, f1, g1, q1, s.log_scale});
            s.x = x1;
            s.value = f1;
            s.derivative = g1;
            q0 = q1;
            length = length1;
            if (detail::renormalize(s, length)) ++st.renormalizations;
            // PI controller
            const Real e = max(err, Real(1e-10));
            Real factor = Real(0.9) * pow(e, Real(-0.7 / 5)) * pow(err_prev, Real(0.4 / 5));
            factor = min(Real(5), max(Real(0.2), factor));
            err_prev = e;
            h *= factor;
        } else {
            ++st.rejected;
            h *= max(Real(0.2), Real(0.9) * pow(err, Real(-0.2)));
        }
        if (s.x != x_end && abs(h) < Real(1e-14) * max(Real(1), abs(s.x)))
            throw error(errc::step_underflow, "integrate: step size underflow at x = " +
                                                  std::to_string(scalar_traits<Real>::to_double(s.x)));
    }
    if (dense) dense->finalize();
    return s;
}

// (a.value b.derivative - a.derivative b.value) e^{a.log_scale + b.log_scale}.
template <class Real = double>
LogComplex wronskian_of(const SolutionState<Real>& a, const SolutionState<Real>& b) {
    if (a.x != b.x) throw error(errc::mismatched_points, "wronskian_of: states at different x");
    const auto w = a.value * b.derivative - a.derivative * b.value;
    const double log_scale = scalar_traits<Real>::to_double(a.log_scale + b.log_scale);
    using std::abs;
    using std::log;
    const Real r = abs(w);
    if (r == Real(0)) return LogComplex::zero();
    return LogComplex::from_parts(log_scale + scalar_traits<Real>::to_double(log(r)), to_std<Real>(w / r));
}

}  // namespace hypo
