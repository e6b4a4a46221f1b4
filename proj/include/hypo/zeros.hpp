#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypo/error.hpp"
#include "hypo/log_complex.hpp"
#include "hypo/parallel.hpp"
#include "hypo/problem.hpp"
#include "hypo/wronskian.hpp"

namespace hypo {

enum class RefineMethod { muller, newton_fd };

struct ZeroSearchOptions {
    std::size_t edge_samples = 16;           // initial samples per rectangle edge
    std::size_t circle_samples = 32;         // initial samples on a circle
    std::size_t max_edge_samples = 1u << 14; // refinement cap per edge
    double coarse_diameter = 0.5;            // cells below this are handed to refine_zero
    int max_depth = 12;
    int max_iterations = 60;
    double start_offset = 1e-3;              // spread of the Muller start triple
    double scale_radius = 0.05;              // circle defining the local scale of W
    RefineMethod method = RefineMethod::muller;
};

// Closed contour: a rectangle traversed counter-clockwise from its lower-left
// corner, or a circle traversed counter-clockwise from angle 0. The parameter s
// runs over [0, 4) for rectangles (one unit per edge) and [0, 1) for circles.
struct Contour {
    enum class Kind { rectangle, circle };

    Kind kind = Kind::rectangle;
    Region rect;
    std::complex<double> center;
    double radius = 0.0;

    static Contour rectangle(const Region& r) {
        Contour c;
        c.kind = Kind::rectangle;
        c.rect = r;
        return c;
    }

    static Contour circle(std::complex<double> center, double radius) {
        Contour c;
        c.kind = Kind::circle;
        c.center = center;
        c.radius = radius;
        return c;
    }

    double period() const { return kind == Kind::rectangle ? 4.0 : 1.0; }

    // Each edge is parametrized from its own start corner so that corners come out exact.
    std::complex<double> point(double s) const {
        if (kind == Kind::circle) {
            const double a = 2.0 * std::numbers::pi * s;
            return center + std::polar(radius, a);
        }
        const std::array<std::complex<double>, 4> corner = {
            std::complex<double>{rect.re_min, rect.im_min}, std::complex<double>{rect.re_max, rect.im_min},
            std::complex<double>{rect.re_max, rect.im_max}, std::complex<double>{rect.re_min, rect.im_max}};
        const double edge = std::floor(s);
        const auto k = static_cast<std::size_t>(edge) % 4;
        const double t = s - edge;
        if (t == 0.0) return corner[k];
        return corner[k] + (corner[(k + 1) % 4] - corner[k]) * t;
    }

    Contour conj() const {
        Contour c = *this;
        if (kind == Kind::circle) {
            c.center = std::conj(center);
        } else {
            c.rect.im_min = -rect.im_max;
            c.rect.im_max = -rect.im_min;
        }
        return c;
    }
};

struct ContourSample {
    double s = 0.0;
    std::complex<double> zeta;
    LogComplex W;
};

struct WindingResult {
    int winding = 0;
    std::vector<ContourSample> samples;
};

// Phase-tracked argument principle. Samples are bisected until consecutive
// phases differ by less than pi/2. A sample whose evaluation is unreliable
// (constancy defect above match_tol) means the contour runs too close to a zero.
inline WindingResult winding_samples(const Problem& p, const Contour& contour, const ZeroSearchOptions& opt = {}) {
    const bool rect = contour.kind == Contour::Kind::rectangle;
    if (rect && contour.rect.degenerate()) throw error(errc::invalid_argument, "winding_number: degenerate rectangle");
    if (!rect && !(contour.radius > 0)) throw error(errc::invalid_argument, "winding_number: radius must be positive");

    const std::size_t per_unit = rect ? opt.edge_samples : opt.circle_samples;
    const std::size_t units = rect ? 4 : 1;
    std::vector<ContourSample> samples(per_unit * units);
    for (std::size_t i = 0; i < samples.size(); ++i)
        samples[i].s = static_cast<double>(i) / static_cast<double>(per_unit);

    auto evaluate = [&](std::vector<ContourSample>& batch) {
        parallel_for(batch.size(), [&](std::size_t i) {
            batch[i].zeta = contour.point(batch[i].s);
            const auto w = eval_W(p, batch[i].zeta);
            if (!w.reliable(p))
                throw error(errc::unreliable_contour,
                            "contour passes too close to a zero near (" + std::to_string(batch[i].zeta.real()) + ", " +
                                std::to_string(batch[i].zeta.imag()) + ")");
            batch[i].W = w.W;
        });
    };
    evaluate(samples);

    const double period = contour.period();
    const double min_gap = 1.0 / static_cast<double>(opt.max_edge_samples);
    for (;;) {
        std::vector<ContourSample> fresh;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& a = samples[i];
            const auto& b = samples[(i + 1) % samples.size()];
            const double sb = (i + 1 == samples.size()) ? b.s + period : b.s;
            const double dphase = std::arg(b.W.unit() * std::conj(a.W.unit()));
            if (std::abs(dphase) < std::numbers::pi / 2) continue;
            if (sb - a.s <= min_gap)
                throw error(errc::budget_exhausted, "winding_number: per-edge sample cap reached");
            ContourSample mid;
            mid.s = std::fmod(0.5 * (a.s + sb), period);
            fresh.push_back(mid);
        }
        if (fresh.empty()) break;
        evaluate(fresh);
        samples.insert(samples.end(), fresh.begin(), fresh.end());
        std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.s < b.s; });
    }

    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& a = samples[i];
        const auto& b = samples[(i + 1) % samples.size()];
        total += std::arg(b.W.unit() * std::conj(a.W.unit()));
    }
    WindingResult out;
    out.winding = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    out.samples = std::move(samples);
    return out;
}

inline int winding_number(const Problem& p, const Contour& contour, const ZeroSearchOptions& opt = {}) {
    return winding_samples(p, contour, opt).winding;
}

struct CertifiedZero {
    std::complex<double> zeta_star;
    double residual_log = 0.0;  // log|W(zeta*)| - local_scale
    double local_scale = 0.0;   // log of the median |W| on the scale circle
    int winding = 0;
    double cert_radius = 0.0;
    int iterations = 0;
    std::optional<std::size_t> conjugate_of;
};

namespace detail {

// Rebased W: values relative to a common reference magnitude.
inline std::complex<double> rebased(const LogComplex& w, double ref) { return w.relative_to(ref); }

inline std::complex<double> muller(const Problem& p, std::complex<double> seed, const ZeroSearchOptions& opt,
                                   int& iterations) {
    const double tol = p.tol.zero_tol;
    std::array<std::complex<double>, 3> z = {seed + opt.start_offset, seed - opt.start_offset,
                                             seed + std::complex<double>(0, opt.start_offset)};
    std::array<LogComplex, 3> w;
    for (std::size_t i = 0; i < 3; ++i) w[i] = eval_W(p, z[i]).W;
    for (iterations = 1; iterations <= opt.max_iterations; ++iterations) {
        const double ref = w[2].log_mag();
        const auto f0 = rebased(w[0], ref), f1 = rebased(w[1], ref), f2 = rebased(w[2], ref);
        const auto h1 = z[1] - z[0], h2 = z[2] - z[1];
        const auto d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
        const auto a = (d2 - d1) / (h2 + h1);
        const auto b = a * h2 + d2;
        const auto disc = std::sqrt(b * b - 4.0 * a * f2);
        const auto e = std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc;
        std::complex<double> step = e == 0.0 ? std::complex<double>(tol, 0) : -2.0 * f2 / e;
        if (std::abs(step) > 1.0) step *= 1.0 / std::abs(step);
        const auto next = z[2] + step;
        z = {z[1], z[2], next};
        w = {w[1], w[2], eval_W(p, next).W};
        if (w[2].is_zero() || std::abs(step) < tol) return next;
    }
    throw error(errc::no_convergence, "refine_zero: Muller iteration did not converge from (" +
                                          std::to_string(seed.real()) + ", " + std::to_string(seed.imag()) + ")");
}

// Newton with a central-difference derivative.
inline std::complex<double> newton_fd(const Problem& p, std::complex<double> seed, const ZeroSearchOptions& opt,
                                      int& iterations) {
    const double tol = p.tol.zero_tol;
    auto z = seed;
    for (iterations = 1; iterations <= opt.max_iterations; ++iterations) {
        const double h = std::max(1e-6, std::min(opt.start_offset, 1e-2 * std::abs(z)));
        const LogComplex w = eval_W(p, z).W;
        const LogComplex wp = eval_W(p, z + h).W, wm = eval_W(p, z - h).W;
        const double ref = w.log_mag();
        const auto deriv = (rebased(wp, ref) - rebased(wm, ref)) / (2.0 * h);
        if (deriv == 0.0) break;
        std::complex<double> step = -rebased(w, ref) / deriv;
        if (std::abs(step) > 1.0) step *= 1.0 / std::abs(step);
        z += step;
        if (std::abs(step) < tol) return z;
    }
    throw error(errc::no_convergence, "refine_zero: Newton iteration did not converge");
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Converges from seed and certifies the result: winding 1 on a circle of
// radius 10 zero_tol and a residual below zero_tol relative to the local scale
// of W (median |W| on a circle of radius scale_radius).
inline CertifiedZero refine_zero(const Problem& p, std::complex<double> seed, const ZeroSearchOptions& opt = {}) {
    p.validate();
    CertifiedZero out;
    out.zeta_star = opt.method == RefineMethod::muller ? detail::muller(p, seed, opt, out.iterations)
                                                       : detail::newton_fd(p, seed, opt, out.iterations);
    if (out.zeta_star.imag() == 0.0 || std::abs(out.zeta_star.imag()) < 10.0 * p.tol.zero_tol)
        throw error(errc::real_axis_zero, "refine_zero: converged onto the real axis, where W cannot vanish");

    const LogComplex w_star = eval_W(p, out.zeta_star).W;
    std::vector<double> ring(16);
    parallel_for(ring.size(), [&](std::size_t k) {
        const auto z = out.zeta_star + std::polar(opt.scale_radius, 2.0 * std::numbers::pi * static_cast<double>(k) / 16.0);
        ring[k] = eval_W(p, z).W.log_mag();
    });
    out.local_scale = detail::median(ring);
    out.residual_log = w_star.log_mag() - out.local_scale;

    out.cert_radius = 10.0 * p.tol.zero_tol;
    ZeroSearchOptions cert_opt = opt;
    cert_opt.circle_samples = 16;
    // Near the zero W is small by construction; the constancy gate does not apply
    // on the certification circle, only the phase tracking does.
    Problem relaxed = p;
    relaxed.tol.match_tol = 1e-2;
    out.winding = winding_number(relaxed, Contour::circle(out.zeta_star, out.cert_radius), cert_opt);
    if (out.winding != 1)
        throw error(errc::certification_failed,
                    "refine_zero: winding " + std::to_string(out.winding) + " on the certification circle");
    if (out.residual_log > std::log(p.tol.zero_tol))
        throw error(errc::certification_failed, "refine_zero: residual above zero_tol");
    return out;
}

struct ZeroSearchReport {
    std::vector<CertifiedZero> zeros;
    int boundary_winding = 0;
    std::size_t cells_examined = 0;
    std::vector<std::string> failures;
};

namespace detail {

// Off-centre split fractions; zeros of W for even m sit on Re zeta = 0, which a
// midpoint split of a symmetric box would hit exactly.
inline constexpr std::array<double, 4> split_fractions = {0.5 + 0.0173, 0.5 - 0.0291, 0.5 + 0.0419, 0.5 - 0.0557};

inline std::array<Region, 4> quadrisect(const Region& r, double fx, double fy) {
    const double xm = r.re_min + fx * (r.re_max - r.re_min);
    const double ym = r.im_min + fy * (r.im_max - r.im_min);
    return {Region{r.re_min, xm, r.im_min, ym}, Region{xm, r.re_max, r.im_min, ym},
            Region{r.re_min, xm, ym, r.im_max}, Region{xm, r.re_max, ym, r.im_max}};
}

}  // namespace detail

// Recursive quadrisection driven by the argument principle; cells with winding 1
// below the coarse diameter are refined and certified. Cells are processed in a
// fixed order so the output is deterministic.
inline ZeroSearchReport find_zeros_report(const Problem& p, const Region& region, std::size_t max_zeros,
                                          const ZeroSearchOptions& opt = {}) {
    p.validate();
    if (region.degenerate()) throw error(errc::invalid_argument, "find_zeros: region has zero area");

    ZeroSearchReport report;
    report.boundary_winding = winding_number(p, Contour::rectangle(region), opt);
    if (report.boundary_winding < 0)
        throw error(errc::unreliable_contour, "find_zeros: negative winding on the region boundary");

    struct Cell {
        Region region;
        int winding;
        int depth;
    };
    std::vector<Cell> stack = {{region, report.boundary_winding, 0}};
    std::vector<CertifiedZero> found;

    while (!stack.empty() && found.size() < max_zeros) {
        const Cell cell = stack.back();
        stack.pop_back();
        ++report.cells_examined;
        if (cell.winding == 0) continue;

        if (cell.winding == 1 && cell.region.diameter() <= opt.coarse_diameter) {
            try {
                found.push_back(refine_zero(p, cell.region.center(), opt));
            } catch (const error& e) {
                report.failures.push_back(e.what());
            }
            continue;
        }
        if (cell.depth >= opt.max_depth)
            throw error(errc::budget_exhausted, "find_zeros: subdivision depth budget exhausted");

        std::optional<std::array<Cell, 4>> children;
        for (double fx : detail::split_fractions) {
            const double fy = 1.0 - fx;
            const auto parts = detail::quadrisect(cell.region, fx, fy);
            try {
                std::array<Cell, 4> kids;
                int total = 0;
                for (std::size_t k = 0; k < 4; ++k) {
                    kids[k] = {parts[k], winding_number(p, Contour::rectangle(parts[k]), opt), cell.depth + 1};
                    total += kids[k].winding;
                }
                if (total != cell.winding) continue;  // a zero slipped past the phase tracking; split elsewhere
                children = kids;
                break;
            } catch (const error& e) {
                if (e.code() != errc::unreliable_contour) throw;
            }
        }
        if (!children) throw error(errc::unreliable_contour, "find_zeros: no admissible split of a cell");
        // Push in reverse so the lower-left child is processed first.
        for (std::size_t k = 4; k-- > 0;) stack.push_back((*children)[k]);
    }

    // Merge duplicates within 3 zero_tol, keeping the smaller residual.
    std::vector<CertifiedZero> merged;
    for (const auto& z : found) {
        auto dup = std::find_if(merged.begin(), merged.end(), [&](const CertifiedZero& o) {
            return std::abs(o.zeta_star - z.zeta_star) < 3.0 * p.tol.zero_tol;
        });
        if (dup == merged.end())
            merged.push_back(z);
        else if (z.residual_log < dup->residual_log)
            *dup = z;
    }
    std::sort(merged.begin(), merged.end(), [](const CertifiedZero& a, const CertifiedZero& b) {
        const double ia = std::abs(a.zeta_star.imag()), ib = std::abs(b.zeta_star.imag());
        if (ia != ib) return ia < ib;
        const double ra = std::abs(a.zeta_star.real()), rb = std::abs(b.zeta_star.real());
        if (ra != rb) return ra < rb;
        return a.zeta_star.imag() > b.zeta_star.imag();
    });
    for (std::size_t i = 0; i < merged.size(); ++i) {
        for (std::size_t j = 0; j < merged.size(); ++j) {
            if (i != j && std::abs(merged[j].zeta_star - std::conj(merged[i].zeta_star)) < 3.0 * p.tol.zero_tol)
                merged[i].conjugate_of = j;
        }
    }
    report.zeros = std::move(merged);
    return report;
}

inline std::vector<CertifiedZero> find_zeros(const Problem& p, const Region& region, std::size_t max_zeros,
                                             const ZeroSearchOptions& opt = {}) {
    return find_zeros_report(p, region, max_zeros, opt).zeros;
}

}  // namespace hypo
