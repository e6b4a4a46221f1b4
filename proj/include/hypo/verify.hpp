#pragma once

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hypo/growth.hpp"
#include "hypo/io.hpp"
#include "hypo/singular.hpp"
#include "hypo/wronskian.hpp"
#include "hypo/zeros.hpp"

namespace hypo {

enum class Status { pass, fail, skip };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::pass: return "PASS";
        case Status::fail: return "FAIL";
        case Status::skip: return "SKIP";
    }
    return "?";
}

struct CriterionResult {
    int id = 0;
    std::string title;
    Status status = Status::skip;
    std::string summary;
    json payload = json::object();
    double seconds = 0.0;
};

struct VerifyOptions {
    std::vector<int> ms = {2, 3, 4};
    std::vector<int> criteria = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::filesystem::path scratch_dir;  // cache round-trip; empty means a temporary directory
};

// Thresholds of the acceptance suite.
namespace accept {
inline constexpr double constancy = 1e-6;
inline constexpr double closed_form = 1e-6;
inline constexpr double zero_residual = 1e-8;
inline constexpr double zero_stability = 1e-6;
inline constexpr double symmetry = 1e-8;
inline constexpr double spread = 1e-6;
inline constexpr double decay = 1e-6;
inline constexpr double nonvanishing = 1e-6;
inline constexpr double ode_residual_factor = 10.0;
inline constexpr double richardson = 1e-3;
inline constexpr double harmonic = 1e-3;
inline constexpr double order = 0.1;
inline constexpr double order_resampling = 0.02;
inline constexpr double real_fit_fraction = 0.1;
inline constexpr double oracle = 1e-8;
inline constexpr double pde = 1e-3;
inline constexpr double pde_ratio = 8.0;
inline constexpr int k_max = 30;
}  // namespace accept

namespace detail {

inline bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

inline bool same_bits(const WronskianEval& a, const WronskianEval& b) {
    return same_bits(a.zeta.real(), b.zeta.real()) && same_bits(a.zeta.imag(), b.zeta.imag()) &&
           same_bits(a.W.log_mag(), b.W.log_mag()) && same_bits(a.W.unit().real(), b.W.unit().real()) &&
           same_bits(a.W.unit().imag(), b.W.unit().imag()) && same_bits(a.constancy_defect, b.constancy_defect) &&
           same_bits(a.cutoff_used, b.cutoff_used) && a.series_order_used == b.series_order_used;
}

inline std::vector<std::complex<double>> random_points(std::uint64_t seed, std::size_t n, double half_width) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-half_width, half_width);
    std::vector<std::complex<double>> out(n);
    for (auto& z : out) {
        const double re = d(rng);
        z = {re, d(rng)};
    }
    return out;
}

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace detail

inline const Region& acceptance_box() {
    static const Region box{-6.0, 6.0, 0.0, 8.0};
    return box;
}

// Runs the acceptance criteria. Zero searches are shared between criteria.
class Verifier {
public:
    explicit Verifier(VerifyOptions opt = {}) : opt_(std::move(opt)) {}

    bool wants(int m) const { return std::find(opt_.ms.begin(), opt_.ms.end(), m) != opt_.ms.end(); }

    static Problem problem(int m) {
        Problem p;
        p.m = m;
        return p;
    }

    const ZeroSearchReport& zeros(int m) {
        auto it = zeros_.find(m);
        if (it == zeros_.end()) it = zeros_.emplace(m, find_zeros_report(problem(m), acceptance_box(), 32)).first;
        return it->second;
    }

    CriterionResult run(int id) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        r.id = id;
        try {
            switch (id) {
                case 1: constancy(r); break;
                case 2: closed_form(r); break;
                case 3: zero_existence(r); break;
                case 4: symmetries(r); break;
                case 5: bounded(r); break;
                case 6: eigenvalues(r); break;
                case 7: growth(r); break;
                case 8: derivative_growth(r); break;
                case 9: pde(r); break;
                case 10: determinism(r); break;
                default: throw error(errc::invalid_argument, "verify: no criterion " + std::to_string(id));
            }
        } catch (const std::exception& e) {
            r.status = Status::fail;
            r.summary = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (id != 10) done_[id] = r;
        return r;
    }

    std::vector<CriterionResult> run_all(const std::function<void(const CriterionResult&)>& on_result = {}) {
        std::vector<CriterionResult> out;
        for (int id : opt_.criteria) {
            out.push_back(run(id));
            if (on_result) on_result(out.back());
        }
        return out;
    }

private:
    static void finish(CriterionResult& r, bool ok, std::string summary) {
        r.status = ok ? Status::pass : Status::fail;
        r.summary = std::move(summary);
    }

    static void skip(CriterionResult& r, std::string why) {
        r.status = Status::skip;
        r.summary = std::move(why);
    }

    void constancy(CriterionResult& r) {
        r.title = "Wronskian constancy";
        bool ok = true;
        double worst = 0.0;
        for (int m : {2, 3, 4}) {
            if (!wants(m)) continue;
            const Problem p = problem(m);
            json defects = json::array();
            double mx = 0.0;
            for (const auto& z : detail::random_points(1000 + m, 20, 3.0)) {
                const auto w = eval_W(p, z);
                defects.push_back(w.constancy_defect);
                mx = std::max(mx, w.constancy_defect);
            }
            ok = ok && mx < accept::constancy;
            worst = std::max(worst, mx);
            r.payload[std::to_string(m)] = {{"defects", defects}, {"max_defect", mx}};
        }
        if (r.payload.empty()) return skip(r, "no m selected");
        finish(r, ok, "max defect " + detail::sci(worst) + " (tol " + detail::sci(accept::constancy) + ")");
    }

    void closed_form(CriterionResult& r) {
        r.title = "m=2 closed form and zero-free box";
        if (!wants(2)) return skip(r, "m=2 not selected");
        const Problem p = problem(2);
        const LogComplex w0 = eval_W(p, 0.0).W;
        double worst = 0.0;
        json dev = json::array();
        for (const auto& z : detail::random_points(2002, 10, 2.5)) {
            const LogComplex ratio = eval_W(p, z).W / w0;
            const double d = relative_difference(ratio, LogComplex::exp(z * z / 2.0));
            dev.push_back(d);
            worst = std::max(worst, d);
        }
        const int winding = winding_number(p, Contour::rectangle({-4.0, 4.0, -4.0, 4.0}));
        r.payload = {{"deviations", dev}, {"max_deviation", worst}, {"winding", winding}, {"log_abs_W0", w0.log_mag()}};
        finish(r, worst < accept::closed_form && winding == 0,
               "max |W/W(0) - e^{z^2/2}| rel " + detail::sci(worst) + ", winding " + std::to_string(winding));
    }

    void zero_existence(CriterionResult& r) {
        r.title = "zero existence for m=3,4";
        bool ok = true, any = false;
        std::string summary;
        for (int m : {3, 4}) {
            if (!wants(m)) continue;
            any = true;
            const auto& rep = zeros(m);
            Problem fine = problem(m);
            fine.series_order *= 2;
            fine.tol.ode_rel_tol /= 2;
            double worst_shift = 0.0, worst_res = -1e300;
            bool windings = true;
            for (const auto& z : rep.zeros) {
                windings = windings && z.winding == 1;
                worst_res = std::max(worst_res, z.residual_log);
                const auto again = refine_zero(fine, z.zeta_star);
                worst_shift = std::max(worst_shift, std::abs(again.zeta_star - z.zeta_star));
            }
            const bool m_ok = !rep.zeros.empty() && windings && worst_res <= std::log(accept::zero_residual) &&
                              worst_shift <= accept::zero_stability;
            ok = ok && m_ok;
            json j = to_json(rep);
            j["max_shift_under_refinement"] = worst_shift;
            r.payload[std::to_string(m)] = j;
            summary += "m=" + std::to_string(m) + ": " + std::to_string(rep.zeros.size()) + " zeros, shift " +
                       detail::sci(worst_shift) + "; ";
        }
        if (!any) return skip(r, "m=3,4 not selected");
        finish(r, ok, summary);
    }

    void symmetries(CriterionResult& r) {
        r.title = "conjugation and reflection symmetry";
        double conj_dev = 0.0, refl_dev = 0.0;
        bool zeros_ok = true;
        std::size_t recertified = 0;
        for (int m : {2, 3, 4}) {
            if (!wants(m)) continue;
            const Problem p = problem(m);
            for (const auto& z : detail::random_points(4000 + m, 10, 3.0)) {
                const auto w = eval_W(p, z).W;
                conj_dev = std::max(conj_dev, relative_difference(eval_W(p, std::conj(z)).W, w.conj()));
                if (m % 2 == 0) refl_dev = std::max(refl_dev, relative_difference(eval_W(p, -z).W, w));
            }
            if (m == 2) continue;
            json re = json::array();
            for (const auto& z : zeros(m).zeros) {
                try {
                    const auto c = refine_zero(p, std::conj(z.zeta_star));
                    const bool same = std::abs(c.zeta_star - std::conj(z.zeta_star)) < 3.0 * p.tol.zero_tol;
                    zeros_ok = zeros_ok && same && c.winding == 1;
                    re.push_back(complex_json(c.zeta_star));
                    ++recertified;
                } catch (const error&) {
                    zeros_ok = false;
                }
            }
            r.payload["conjugate_zeros_" + std::to_string(m)] = re;
        }
        if (opt_.ms.empty()) return skip(r, "no m selected");
        r.payload["max_conjugation_dev"] = conj_dev;
        r.payload["max_reflection_dev"] = refl_dev;
        finish(r, conj_dev < accept::symmetry && refl_dev < accept::symmetry && zeros_ok,
               "conj " + detail::sci(conj_dev) + ", reflection " + detail::sci(refl_dev) + ", " +
                   std::to_string(recertified) + " conjugate zeros re-certified");
    }

    void bounded(CriterionResult& r) {
        r.title = "bounded null solution at each zero";
        bool ok = true, any = false;
        double spread = 0, tail = 0, res = 0, lead = 1e300;
        for (int m : {3, 4}) {
            if (!wants(m)) continue;
            any = true;
            const Problem p = problem(m);
            json list = json::array();
            for (const auto& z : zeros(m).zeros) {
                if (z.zeta_star.imag() <= 0) continue;
                const auto sol = bounded_solution(p, z);
                const double t = std::max(std::abs(sol.value(sol.cutoff)), std::abs(sol.value(-sol.cutoff)));
                const double l = std::max(std::abs(sol.f0), std::abs(sol.f0_prime));
                const double o = ode_residual(p, sol, 20);
                spread = std::max(spread, sol.proportionality_defect);
                tail = std::max(tail, t);
                res = std::max(res, o);
                lead = std::min(lead, l);
                ok = ok && sol.proportionality_defect < accept::spread && t <= accept::decay * sol.sup_norm &&
                     l > accept::nonvanishing * sol.sup_norm && o <= accept::ode_residual_factor * p.tol.ode_rel_tol;
                list.push_back({{"zeta_star", complex_json(z.zeta_star)},
                                {"spread", sol.proportionality_defect},
                                {"tail", t},
                                {"f0", complex_json(sol.f0)},
                                {"f0_prime", complex_json(sol.f0_prime)},
                                {"ode_residual", o}});
            }
            r.payload[std::to_string(m)] = list;
        }
        if (!any) return skip(r, "m=3,4 not selected");
        finish(r, ok,
               "spread " + detail::sci(spread) + ", tail " + detail::sci(tail) + ", min max(|f0|,|f0'|) " +
                   detail::sci(lead) + ", ODE residual " + detail::sci(res));
    }

    void eigenvalues(CriterionResult& r) {
        r.title = "positive lowest eigenvalue on the real axis";
        bool ok = true;
        double min_lambda = 1e300, worst_defect = 0, harmonic_dev = 0;
        for (int m : {2, 3, 4}) {
            if (!wants(m)) continue;
            const Problem p = problem(m);
            std::vector<double> zs;
            for (int z = -5; z <= 5; ++z) zs.push_back(z);
            if (m == 2) zs.insert(zs.end(), {-2.5, 0.5, 3.3});
            json list = json::array();
            for (double z : zs) {
                const auto e = lowest_eigenvalue(p, z);
                list.push_back(to_json(e));
                worst_defect = std::max(worst_defect, e.refinement_defect);
                ok = ok && e.refinement_defect < accept::richardson;
                if (m == 2) {
                    harmonic_dev = std::max(harmonic_dev, std::abs(e.lambda_min - 2.0));
                    ok = ok && std::abs(e.lambda_min - 2.0) <= accept::harmonic;
                } else {
                    min_lambda = std::min(min_lambda, e.lambda_min);
                    ok = ok && e.lambda_min > 0;
                }
            }
            r.payload[std::to_string(m)] = list;
        }
        if (r.payload.empty()) return skip(r, "no m selected");
        finish(r, ok,
               "min lambda (m>=3) " + detail::sci(min_lambda) + ", |lambda-2| (m=2) " + detail::sci(harmonic_dev) +
                   ", max defect " + detail::sci(worst_defect));
    }

    void growth(CriterionResult& r) {
        r.title = "order of growth m/(m-1)";
        const std::vector<double> radii = {6, 8, 12, 16, 20, 25, 30};
        bool ok = true;
        std::string summary;
        for (int m : {2, 3, 4}) {
            if (!wants(m)) continue;
            const Problem p = problem(m);
            const auto g = fit_growth(p, radii, 64);
            const auto g2 = fit_growth(p, radii, 128);
            const auto gap = integrality_gap(g);
            const double target = static_cast<double>(m) / (m - 1);
            const bool m_ok = std::abs(g.exponent_est - target) < accept::order &&
                              std::abs(g2.exponent_est - g.exponent_est) <= accept::order_resampling &&
                              g.slope_real_axis > 0 &&
                              g.real_fit.max_residual < accept::real_fit_fraction * g.real_range &&
                              (!gap.applicable || gap.separated);
            ok = ok && m_ok;
            r.payload[std::to_string(m)] = {{"fit", to_json(g)},
                                            {"exponent_at_128", g2.exponent_est},
                                            {"integrality", to_json(gap)}};
            summary += "m=" + std::to_string(m) + ": rho " + detail::sci(g.exponent_est) + " delta " +
                       detail::sci(g.slope_real_axis) + "; ";
        }
        if (r.payload.empty()) return skip(r, "no m selected");
        finish(r, ok, summary);
    }

    const CertifiedZero& first_zero_m4() {
        const auto& z = zeros(4).zeros;
        for (const auto& c : z)
            if (c.zeta_star.imag() > 0) return c;
        throw error(errc::certification_failed, "verify: no certified zero for m=4");
    }

    void derivative_growth(CriterionResult& r) {
        r.title = "factorial derivative growth at the first m=4 zero";
        if (!wants(4)) return skip(r, "m=4 not selected");
        const Problem p = problem(4);
        const auto sol = bounded_solution(p, first_zero_m4());
        const auto rep = derivative_sequence(p, sol, accept::k_max);
        const auto verdict = nonanalyticity_certificate(rep, 10);
        const double worst = *std::max_element(rep.oracle_dev.begin(), rep.oracle_dev.end());
        r.payload = {{"report", to_json(rep)}, {"verdict", to_json(verdict)}};
        finish(r, verdict.pass && worst < accept::oracle && rep.delta_hat > 0 && rep.delta_bound > 0,
               "oracle dev " + detail::sci(worst) + ", delta fitted " + detail::sci(rep.delta_hat) + ", bound " +
                   detail::sci(rep.delta_bound));
    }

    void pde(CriterionResult& r) {
        r.title = "LF = 0 by finite differences";
        if (!wants(4)) return skip(r, "m=4 not selected");
        const Problem p = problem(4);
        const auto sol = bounded_solution(p, first_zero_m4());
        const EvalPoint pt{0.1, 1.0, 0.0};
        std::vector<PdeResidual> res;
        json list = json::array();
        for (double h : {1e-2, 5e-3, 2.5e-3}) {
            res.push_back(pde_residual_detail(p, sol, pt, h));
            list.push_back({{"h", h}, {"residual", res.back().residual}, {"floor", res.back().floor}});
        }
        bool ok = res[0].residual < accept::pde;
        std::string ratios;
        for (std::size_t i = 1; i < res.size(); ++i) {
            const double ratio = res[i - 1].residual / res[i].residual;
            const bool at_floor = std::abs(res[i].LF) <= res[i].floor * std::abs(res[i].F);
            ok = ok && (ratio >= accept::pde_ratio || at_floor);
            ratios += detail::sci(ratio) + (ratio < accept::pde_ratio && at_floor ? " (floor) " : " ");
        }
        r.payload = list;
        finish(r, ok, "residual " + detail::sci(res[0].residual) + " at h=1e-2, ratios " + ratios);
    }

    void determinism(CriterionResult& r) {
        r.title = "determinism and cache round trip";
        // Rerun every criterion except the growth fits in a fresh verifier and compare payloads.
        Verifier fresh(opt_);
        bool identical = true;
        json compared = json::array();
        for (int id : {1, 2, 3, 4, 5, 6, 8, 9}) {
            const auto a = done_.count(id) ? done_.at(id) : run(id);
            const auto b = fresh.run(id);
            if (a.status == Status::skip) continue;
            const bool same = a.payload.dump() == b.payload.dump();
            identical = identical && same;
            compared.push_back({{"criterion", id}, {"identical", same}});
        }

        // Cache: put evaluations, reopen from disk, compare bit for bit.
        std::filesystem::path dir = opt_.scratch_dir;
        const bool temporary = dir.empty();
        if (temporary)
            dir = std::filesystem::temp_directory_path() / ("hypo-verify-" + std::to_string(::getpid()));
        std::filesystem::remove_all(dir);
        bool cache_ok = true;
        std::size_t entries = 0;
        {
            WronskianCache cache(dir);
            std::vector<std::pair<Problem, WronskianEval>> stored;
            for (int m : {2, 3, 4}) {
                if (!wants(m)) continue;
                const Problem p = problem(m);
                for (const auto& z : detail::random_points(10000 + m, 50, 3.0)) {
                    const auto w = eval_W(p, z);
                    cache.put(p, w);
                    stored.emplace_back(p, w);
                }
            }
            WronskianCache reopened(dir);
            for (const auto& [p, w] : stored) {
                const auto hit = reopened.get(p, w.zeta);
                cache_ok = cache_ok && hit && detail::same_bits(*hit, w) && detail::same_bits(*hit, eval_W(p, w.zeta));
            }
            if (!stored.empty()) {
                Problem other = stored.front().first;
                other.tol.ode_rel_tol *= 0.5;
                cache_ok = cache_ok && !reopened.get(other, stored.front().second.zeta);
            }
            entries = reopened.size();
            cache_ok = cache_ok && entries == stored.size() && reopened.corrupt_lines() == 0;
        }
        if (temporary) std::filesystem::remove_all(dir);
        r.payload = {{"reruns", compared}, {"cache_entries", entries}, {"cache_exact", cache_ok}};
        finish(r, identical && cache_ok,
               std::string(identical ? "payloads identical" : "payloads differ") + ", cache " +
                   (cache_ok ? "exact" : "mismatch") + " over " + std::to_string(entries) + " entries");
    }

    VerifyOptions opt_;
    std::map<int, ZeroSearchReport> zeros_;
    std::map<int, CriterionResult> done_;
};

inline json to_json(const CriterionResult& r) {
    return {{"id", r.id}, {"title", r.title}, {"status", to_string(r.status)}, {"summary", r.summary},
            {"payload", r.payload}};
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
    return std::none_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.status == Status::fail; });
}

inline std::string format_line(const CriterionResult& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%s] %2d ", to_string(r.status), r.id);
    return std::string(buf) + r.title + ": " + r.summary;
}

}  // namespace hypo
