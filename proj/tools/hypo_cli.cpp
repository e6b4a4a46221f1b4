// hypo: command-line front end.
//
// Exit status: 0 success, 1 computation failure, 2 bad arguments, 3 verify FAIL.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypo/hypo.hpp"

namespace {

using namespace hypo;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;
constexpr int exit_verify_failed = 3;

std::vector<double> split_numbers(const std::string& text, char sep, std::size_t expected, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw error(errc::invalid_argument, std::string("cannot parse ") + what + " '" + text + "'");
        }
    }
    if (expected && out.size() != expected)
        throw error(errc::invalid_argument, std::string(what) + " needs " + std::to_string(expected) + " values");
    return out;
}

Region parse_box(const std::string& text) {
    const auto v = split_numbers(text, ':', 4, "--box");
    return {v[0], v[1], v[2], v[3]};
}

std::complex<double> parse_complex(const std::string& text) {
    const auto v = split_numbers(text, ':', 2, "complex value");
    return {v[0], v[1]};
}

// Options shared by the computing subcommands. Explicit flags override --config.
struct Common {
    std::string config_path;
    std::optional<int> m;
    std::optional<double> alpha, ode_rel_tol, match_tol, zero_tol, quad_tol, x_min, x_cap;
    std::optional<int> series_order;
    std::string precision;
    std::string out;
    std::string cache_dir;
    bool no_cache = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "JSON run configuration");
        app->add_option("--m", m, "degree m >= 2");
        app->add_option("--alpha", alpha, "commutator coefficient");
        app->add_option("--series-order", series_order, "asymptotic series depth K");
        app->add_option("--ode-rel-tol", ode_rel_tol);
        app->add_option("--match-tol", match_tol);
        app->add_option("--zero-tol", zero_tol);
        app->add_option("--quad-tol", quad_tol);
        app->add_option("--x-min", x_min, "smallest cutoff X");
        app->add_option("--x-cap", x_cap, "largest cutoff X");
        app->add_option("--precision", precision, "standard or extended")->check(CLI::IsMember({"standard", "extended"}));
        app->add_option("--out", out, "output file (default stdout)");
        app->add_option("--cache-dir", cache_dir, "Wronskian cache directory (default $HYPO_CACHE_DIR)");
        app->add_flag("--no-cache", no_cache, "do not read or write the cache");
    }

    RunConfig config() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        Problem& p = c.problem;
        if (m) p.m = *m;
        if (alpha) p.alpha = *alpha;
        if (series_order) p.series_order = *series_order;
        if (ode_rel_tol) p.tol.ode_rel_tol = *ode_rel_tol;
        if (match_tol) p.tol.match_tol = *match_tol;
        if (zero_tol) p.tol.zero_tol = *zero_tol;
        if (quad_tol) p.tol.quad_tol = *quad_tol;
        if (x_min) p.cutoff.x_min = *x_min;
        if (x_cap) p.cutoff.x_cap = *x_cap;
        if (precision == "extended") p.precision = Precision::extended;
        if (precision == "standard") p.precision = Precision::standard;
        if (!out.empty()) c.output = out;
        if (!cache_dir.empty()) c.cache_dir = cache_dir;
        c.validate();
        return c;
    }

    std::unique_ptr<WronskianCache> open_cache(const RunConfig& c) const {
        if (no_cache) return nullptr;
        return std::make_unique<WronskianCache>(c.cache_dir.empty() ? default_cache_dir()
                                                                    : std::filesystem::path(c.cache_dir));
    }
};

json metadata(double seconds) {
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return {{"generated_at", stamp}, {"seconds", seconds}};
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw error(errc::invalid_argument, "cannot write " + path);
    f << text << '\n';
}

template <class Fn>
void write_csv(const std::string& path, Fn&& fn) {
    if (path.empty()) return;
    if (path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f) throw error(errc::invalid_argument, "cannot write " + path);
    fn(f);
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// A certified zero with Im > 0: refined from --seed, or the index-th zero found in the box.
CertifiedZero select_zero(const RunConfig& c, const std::string& seed, std::size_t index) {
    if (!seed.empty()) {
        auto z = parse_complex(seed);
        if (z.imag() < 0) z = std::conj(z);
        return refine_zero(c.problem, z);
    }
    Region box = c.box;
    box.im_min = std::max(box.im_min, 0.0);
    if (box.degenerate()) throw error(errc::invalid_argument, "box has no part in the upper half plane");
    const auto zeros = find_zeros(c.problem, box, index + 1);
    std::vector<CertifiedZero> upper;
    for (const auto& z : zeros)
        if (z.zeta_star.imag() > 0) upper.push_back(z);
    if (index >= upper.size())
        throw error(errc::certification_failed, "fewer than " + std::to_string(index + 1) + " zeros in the box");
    return upper[index];
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wronskian zeros, singular solutions and growth checks for X^2 + Y^2 with Y = d/dy - m x^{m-1} d/dt"};
    app.require_subcommand(1);

    // scan
    Common scan_c;
    std::string scan_box, scan_res, scan_csv;
    auto* scan_cmd = app.add_subcommand("scan", "evaluate W on a grid");
    scan_c.attach(scan_cmd);
    scan_cmd->add_option("--box", scan_box, "re_min:re_max:im_min:im_max");
    scan_cmd->add_option("--res", scan_res, "n_re:n_im");
    scan_cmd->add_option("--csv", scan_csv, "also write re,im,log_abs_W,arg_W,defect");

    // zeros
    Common zeros_c;
    std::string zeros_box, zeros_csv, zeros_method = "muller";
    std::optional<std::size_t> zeros_max;
    auto* zeros_cmd = app.add_subcommand("zeros", "certified zeros of W in a box");
    zeros_c.attach(zeros_cmd);
    zeros_cmd->add_option("--box", zeros_box, "re_min:re_max:im_min:im_max");
    zeros_cmd->add_option("--max-zeros", zeros_max);
    zeros_cmd->add_option("--method", zeros_method)->check(CLI::IsMember({"muller", "newton"}));
    zeros_cmd->add_option("--csv", zeros_csv);

    // eigenfunction
    Common ef_c;
    std::string ef_box, ef_seed, ef_csv;
    std::size_t ef_index = 0, ef_points = 801;
    auto* ef_cmd = app.add_subcommand("eigenfunction", "bounded null solution at a zero, as CSV");
    ef_c.attach(ef_cmd);
    ef_cmd->add_option("--box", ef_box, "search box for the zero");
    ef_cmd->add_option("--seed", ef_seed, "re:im starting point instead of a box search");
    ef_cmd->add_option("--index", ef_index, "which zero of the box (by |Im|)");
    ef_cmd->add_option("--points", ef_points)->check(CLI::Range(2, 1000000));
    ef_cmd->add_option("--csv", ef_csv, "CSV path (default: --out, else stdout)");

    // singular
    Common sg_c;
    std::string sg_box, sg_seed, sg_point = "0.1:1:0";
    std::size_t sg_index = 0;
    std::optional<int> sg_kmax;
    double sg_h = 1e-2;
    auto* sg_cmd = app.add_subcommand("singular", "derivative growth certificate at a zero");
    sg_c.attach(sg_cmd);
    sg_cmd->add_option("--box", sg_box);
    sg_cmd->add_option("--seed", sg_seed);
    sg_cmd->add_option("--index", sg_index);
    sg_cmd->add_option("--k-max", sg_kmax);
    sg_cmd->add_option("--pde-point", sg_point, "x:y:t for the residual of LF");
    sg_cmd->add_option("--fd-step", sg_h, "finite-difference step h");

    // growth
    Common gr_c;
    std::vector<double> gr_radii = {6, 8, 12, 16, 20, 25, 30};
    std::size_t gr_angles = 64;
    auto* gr_cmd = app.add_subcommand("growth", "order of growth of W and integrality gap");
    gr_c.attach(gr_cmd);
    gr_cmd->add_option("--radii", gr_radii)->delimiter(',');
    gr_cmd->add_option("--angles", gr_angles);

    // eig
    Common eig_c;
    std::string eig_range = "-5:5:1";
    double eig_xd = 0.0;
    std::size_t eig_n = 4000;
    auto* eig_cmd = app.add_subcommand("eig", "lowest eigenvalue for real zeta");
    eig_c.attach(eig_cmd);
    eig_cmd->add_option("--zeta-range", eig_range, "start:stop:step");
    eig_cmd->add_option("--xd", eig_xd, "half-width of the domain (0 = automatic)");
    eig_cmd->add_option("--n", eig_n, "interior grid points");

    // verify
    std::vector<int> verify_m;
    std::vector<int> verify_criteria;
    std::string verify_out;
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
    verify_cmd->add_option("--m", verify_m, "restrict to these m")->check(CLI::Range(2, 4));
    verify_cmd->add_option("--criteria", verify_criteria, "run only these criteria")->check(CLI::Range(1, 10));
    verify_cmd->add_option("--out", verify_out, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (*scan_cmd) {
            RunConfig c = scan_c.config();
            if (!scan_box.empty()) c.box = parse_box(scan_box);
            if (!scan_res.empty()) {
                const auto r = split_numbers(scan_res, ':', 2, "--res");
                if (r[0] < 2 || r[1] < 2 || r[0] != std::floor(r[0]) || r[1] != std::floor(r[1]))
                    throw error(errc::invalid_argument, "--res needs integers >= 2");
                c.n_re = static_cast<std::size_t>(r[0]);
                c.n_im = static_cast<std::size_t>(r[1]);
            }
            c.validate();
            auto cache = scan_c.open_cache(c);
            const auto grid = scan_with(c.problem, c.box, c.n_re, c.n_im,
                                        [&](std::complex<double> z) { return eval_W_cached(cache.get(), c.problem, z); });
            write_csv(scan_csv, [&](std::ostream& o) { write_scan_csv(o, grid); });
            emit(c.output, make_document("scan", to_json(c), to_json(grid), metadata(elapsed(t0))).dump(2));
            return exit_ok;
        }
        if (*zeros_cmd) {
            RunConfig c = zeros_c.config();
            if (!zeros_box.empty()) c.box = parse_box(zeros_box);
            if (zeros_max) c.max_zeros = *zeros_max;
            c.validate();
            ZeroSearchOptions opt;
            opt.method = zeros_method == "newton" ? RefineMethod::newton_fd : RefineMethod::muller;
            const auto rep = find_zeros_report(c.problem, c.box, c.max_zeros, opt);
            write_csv(zeros_csv, [&](std::ostream& o) { write_zeros_csv(o, rep.zeros); });
            json cfg = to_json(c);
            cfg["method"] = zeros_method;
            emit(c.output, make_document("zeros", cfg, to_json(rep), metadata(elapsed(t0))).dump(2));
            return exit_ok;
        }
        if (*ef_cmd) {
            RunConfig c = ef_c.config();
            if (!ef_box.empty()) c.box = parse_box(ef_box);
            const auto zero = select_zero(c, ef_seed, ef_index);
            const auto sol = bounded_solution(c.problem, zero);
            const std::string path = !ef_csv.empty() ? ef_csv : (c.output.empty() ? "-" : c.output);
            write_csv(path, [&](std::ostream& o) { write_eigenfunction_csv(o, sol, ef_points); });
            return exit_ok;
        }
        if (*sg_cmd) {
            RunConfig c = sg_c.config();
            if (!sg_box.empty()) c.box = parse_box(sg_box);
            if (sg_kmax) c.k_max = *sg_kmax;
            c.validate();
            const auto pt = split_numbers(sg_point, ':', 3, "--pde-point");
            const auto zero = select_zero(c, sg_seed, sg_index);
            const auto sol = bounded_solution(c.problem, zero);
            auto rep = derivative_sequence(c.problem, sol, c.k_max);
            const auto pde = pde_residual_detail(c.problem, sol, {pt[0], pt[1], pt[2]}, sg_h);
            rep.pde_residual = pde.residual;
            const auto verdict = nonanalyticity_certificate(rep);
            json result = {{"zero", to_json(zero)},
                           {"report", to_json(rep)},
                           {"verdict", to_json(verdict)},
                           {"pde", {{"point", pt}, {"h", sg_h}, {"residual", pde.residual}, {"floor", pde.floor}}},
                           {"bounded_solution",
                            {{"cutoff", sol.cutoff},
                             {"spread", sol.proportionality_defect},
                             {"f0", complex_json(sol.f0)},
                             {"f0_prime", complex_json(sol.f0_prime)},
                             {"c", log_complex_json(sol.c)}}}};
            emit(c.output, make_document("singular", to_json(c), result, metadata(elapsed(t0))).dump(2));
            return verdict.pass ? exit_ok : exit_failure;
        }
        if (*gr_cmd) {
            RunConfig c = gr_c.config();
            const auto g = fit_growth(c.problem, gr_radii, gr_angles);
            const auto gap = integrality_gap(g);
            std::cerr << "m = " << g.m << "\n"
                      << "  order estimate      " << g.exponent_est << "  (m/(m-1) = "
                      << static_cast<double>(g.m) / (g.m - 1) << ", stderr " << g.order_fit.slope_stderr << ")\n"
                      << "  real-axis slope     " << g.slope_real_axis << "  (max residual "
                      << g.real_fit.max_residual << " over range " << g.real_range << ")\n"
                      << "  integrality gap     " << gap.gap << (gap.applicable ? "" : "  (not applicable for m = 2)")
                      << "\n";
            json cfg = to_json(c);
            cfg["radii"] = gr_radii;
            cfg["angles"] = gr_angles;
            emit(c.output, make_document("growth", cfg, {{"fit", to_json(g)}, {"integrality", to_json(gap)}},
                                         metadata(elapsed(t0)))
                               .dump(2));
            return exit_ok;
        }
        if (*eig_cmd) {
            RunConfig c = eig_c.config();
            const auto r = split_numbers(eig_range, ':', 3, "--zeta-range");
            if (!(r[2] > 0) || r[1] < r[0]) throw error(errc::invalid_argument, "--zeta-range needs start <= stop, step > 0");
            json list = json::array();
            std::cerr << "      zeta      lambda_min    defect\n";
            for (int i = 0;; ++i) {
                const double z = r[0] + i * r[2];
                if (z > r[1] + 1e-12 * std::abs(r[2])) break;
                const auto e = lowest_eigenvalue(c.problem, z, eig_xd, eig_n);
                char line[96];
                std::snprintf(line, sizeof line, "%10.4f  %14.8f  %9.2e\n", z, e.lambda_min, e.refinement_defect);
                std::cerr << line;
                list.push_back(to_json(e));
            }
            json cfg = to_json(c);
            cfg["zeta_range"] = r;
            cfg["xd"] = eig_xd;
            cfg["n"] = eig_n;
            emit(c.output, make_document("eig", cfg, list, metadata(elapsed(t0))).dump(2));
            return exit_ok;
        }
        if (*verify_cmd) {
            VerifyOptions opt;
            if (!verify_m.empty()) opt.ms = verify_m;
            if (!verify_criteria.empty()) opt.criteria = verify_criteria;
            Verifier v(opt);
            const auto results = v.run_all([](const CriterionResult& r) { std::cout << format_line(r) << std::endl; });
            const bool ok = all_passed(results);
            std::cout << (ok ? "verify: all criteria passed" : "verify: FAILED") << std::endl;
            if (!verify_out.empty()) {
                json list = json::array(), times = json::object();
                for (const auto& r : results) {
                    list.push_back(to_json(r));
                    times[std::to_string(r.id)] = r.seconds;
                }
                json meta = metadata(elapsed(t0));
                meta["criterion_seconds"] = times;
                emit(verify_out, make_document("verify", {{"m", opt.ms}, {"criteria", opt.criteria}}, list, meta).dump(2));
            }
            return ok ? exit_ok : exit_verify_failed;
        }
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == errc::invalid_argument ? exit_usage : exit_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_usage;
}
