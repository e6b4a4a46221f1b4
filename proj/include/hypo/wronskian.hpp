#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hypo/asymptotics.hpp"
#include "hypo/log_complex.hpp"
#include "hypo/ode.hpp"
#include "hypo/parallel.hpp"
#include "hypo/problem.hpp"

namespace hypo {

struct WronskianEval {
    std::complex<double> zeta;
    LogComplex W;
    double constancy_defect = 0.0;
    double cutoff_used = 0.0;
    int series_order_used = 0;

    bool reliable(const Problem& p) const { return constancy_defect < p.tol.match_tol; }
};

// W(zeta) = f+ (f-)' - (f+)' f-, with f+ integrated inward from +X and f- from -X,
// matched at the primary point and re-checked at the secondary one. Both
// solutions carry the exact e^{Phi} |x|^gamma normalization, so values are
// comparable across zeta.
template <class Real>
WronskianEval eval_W_as(const Problem& p, std::complex<double> zeta) {
    p.validate();
    const double cutoff = choose_cutoff(p, zeta);
    const auto z = from_std<Real>(zeta);
    auto q = [&p, &z](const Real& x) { return potential<Real>(p, z, x); };
    const double rtol = p.tol.ode_rel_tol;

    const Real lo(std::min(p.matching.primary, p.matching.secondary));
    const Real hi(std::max(p.matching.primary, p.matching.secondary));

    const auto plus = initial_data<Real>(p, z, Side::plus, cutoff);
    const auto minus = initial_data<Real>(p, z, Side::minus, cutoff);
    const auto plus_hi = integrate<Real>(q, plus.state, hi, rtol);
    const auto plus_lo = integrate<Real>(q, plus_hi, lo, rtol);
    const auto minus_lo = integrate<Real>(q, minus.state, lo, rtol);
    const auto minus_hi = integrate<Real>(q, minus_lo, hi, rtol);

    const LogComplex w_lo = wronskian_of(plus_lo, minus_lo);
    const LogComplex w_hi = wronskian_of(plus_hi, minus_hi);

    WronskianEval out;
    out.zeta = zeta;
    const bool primary_is_lo = p.matching.primary <= p.matching.secondary;
    out.W = primary_is_lo ? w_lo : w_hi;
    const LogComplex& other = primary_is_lo ? w_hi : w_lo;
    out.constancy_defect = out.W.is_zero() ? std::numeric_limits<double>::infinity()
                                           : std::exp((out.W - other).log_mag() - out.W.log_mag());
    out.cutoff_used = cutoff;
    out.series_order_used = p.series_order;
    return out;
}

inline WronskianEval eval_W(const Problem& p, std::complex<double> zeta) {
    if (p.precision == Precision::extended) {
#ifdef HYPO_HAVE_FLOAT128
        return eval_W_as<extended_real>(p, zeta);
#else
        throw error(errc::invalid_argument, "extended precision was not enabled in this build");
#endif
    }
    return eval_W_as<double>(p, zeta);
}

struct Region {
    double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;

    bool degenerate() const { return !(re_max > re_min) || !(im_max > im_min); }
    std::complex<double> center() const { return {(re_min + re_max) / 2, (im_min + im_max) / 2}; }
    double diameter() const { return std::hypot(re_max - re_min, im_max - im_min); }
    bool contains(std::complex<double> z) const {
        return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
    }
};

struct ScanCell {
    std::complex<double> zeta;
    double log_abs_W = std::numeric_limits<double>::quiet_NaN();
    double arg_W = std::numeric_limits<double>::quiet_NaN();
    double defect = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string failure;
};

// Cells are row-major: row j (imaginary part), column i (real part).
struct ScanGrid {
    Region region;
    std::size_t n_re = 0, n_im = 0;
    std::vector<ScanCell> cells;

    const ScanCell& at(std::size_t i_re, std::size_t j_im) const { return cells[j_im * n_re + i_re]; }
};

// eval(zeta) -> WronskianEval; used with eval_W or a cached equivalent.
template <class Eval>
ScanGrid scan_with(const Problem& p, const Region& region, std::size_t n_re, std::size_t n_im, Eval&& eval) {
    if (region.degenerate()) throw error(errc::invalid_argument, "scan: region has zero area");
    if (n_re < 2 || n_im < 2) throw error(errc::invalid_argument, "scan: resolution must be at least 2x2");
    p.validate();

    ScanGrid grid;
    grid.region = region;
    grid.n_re = n_re;
    grid.n_im = n_im;
    grid.cells.resize(n_re * n_im);
    parallel_for(grid.cells.size(), [&](std::size_t k) {
        const std::size_t i = k % n_re, j = k / n_re;
        const double re = region.re_min + (region.re_max - region.re_min) * static_cast<double>(i) / (n_re - 1);
        const double im = region.im_min + (region.im_max - region.im_min) * static_cast<double>(j) / (n_im - 1);
        ScanCell& cell = grid.cells[k];
        cell.zeta = {re, im};
        try {
            const WronskianEval w = eval(cell.zeta);
            cell.log_abs_W = w.W.log_mag();
            cell.arg_W = w.W.arg();
            cell.defect = w.constancy_defect;
            cell.ok = w.reliable(p);
            if (!cell.ok) cell.failure = "constancy defect above match_tol";
        } catch (const error& e) {
            cell.ok = false;
            cell.failure = e.what();
        }
    });
    return grid;
}

inline ScanGrid scan(const Problem& p, const Region& region, std::size_t n_re, std::size_t n_im) {
    return scan_with(p, region, n_re, n_im, [&p](std::complex<double> z) { return eval_W(p, z); });
}

}  // namespace hypo
