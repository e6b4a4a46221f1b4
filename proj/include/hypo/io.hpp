#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypo/error.hpp"
#include "hypo/growth.hpp"
#include "hypo/log_complex.hpp"
#include "hypo/problem.hpp"
#include "hypo/singular.hpp"
#include "hypo/wronskian.hpp"
#include "hypo/zeros.hpp"

namespace hypo {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

// ---- scalars ---------------------------------------------------------------

inline json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

inline std::complex<double> complex_from(const json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

inline json log_complex_json(const LogComplex& w) {
    if (w.is_zero()) return {{"log_mag", nullptr}, {"arg", 0.0}};
    return {{"log_mag", w.log_mag()}, {"arg", w.arg()}};
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- run configuration -----------------------------------------------------

struct RunConfig {
    Problem problem;
    Region box{-6.0, 6.0, 0.0, 8.0};
    std::size_t n_re = 64;
    std::size_t n_im = 64;
    std::size_t max_zeros = 32;
    int k_max = 30;
    std::string output;
    std::string cache_dir;

    void validate() const {
        problem.validate();
        if (box.degenerate()) throw error(errc::invalid_argument, "config: box has zero area");
        if (n_re < 2 || n_im < 2) throw error(errc::invalid_argument, "config: scan resolution must be at least 2x2");
        if (k_max < 1) throw error(errc::invalid_argument, "config: k_max must be >= 1");
        if (max_zeros < 1) throw error(errc::invalid_argument, "config: max_zeros must be >= 1");
    }
};

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw error(errc::invalid_argument, "config: " + where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw error(errc::invalid_argument, "config: unknown key '" + where + key + "'");
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw error(errc::invalid_argument, std::string("config: bad value for '") + key + "'");
    }
}

}  // namespace detail

inline json to_json(const Problem& p) {
    return {{"m", p.m},
            {"alpha", p.alpha},
            {"tolerances",
             {{"ode_rel_tol", p.tol.ode_rel_tol},
              {"match_tol", p.tol.match_tol},
              {"zero_tol", p.tol.zero_tol},
              {"quad_tol", p.tol.quad_tol}}},
            {"series_order", p.series_order},
            {"cutoff", {{"x_min", p.cutoff.x_min}, {"x_cap", p.cutoff.x_cap}}},
            {"matching", {{"primary", p.matching.primary}, {"secondary", p.matching.secondary}}},
            {"precision", p.precision == Precision::extended ? "extended" : "standard"}};
}

inline json to_json(const RunConfig& c) {
    json j = to_json(c.problem);
    j["box"] = {c.box.re_min, c.box.re_max, c.box.im_min, c.box.im_max};
    j["scan_resolution"] = {c.n_re, c.n_im};
    j["max_zeros"] = c.max_zeros;
    j["k_max"] = c.k_max;
    j["output"] = c.output;
    j["cache_dir"] = c.cache_dir;
    return j;
}

// Unknown keys are rejected at every level; missing keys keep their defaults.
inline RunConfig run_config_from_json(const json& j) {
    using detail::read_if;
    detail::reject_unknown(j,
                           {"m", "alpha", "tolerances", "series_order", "cutoff", "matching", "precision", "box",
                            "scan_resolution", "max_zeros", "k_max", "output", "cache_dir"},
                           "");
    RunConfig c;
    Problem& p = c.problem;
    read_if(j, "m", p.m);
    read_if(j, "alpha", p.alpha);
    read_if(j, "series_order", p.series_order);
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        detail::reject_unknown(t, {"ode_rel_tol", "match_tol", "zero_tol", "quad_tol"}, "tolerances.");
        read_if(t, "ode_rel_tol", p.tol.ode_rel_tol);
        read_if(t, "match_tol", p.tol.match_tol);
        read_if(t, "zero_tol", p.tol.zero_tol);
        read_if(t, "quad_tol", p.tol.quad_tol);
    }
    if (j.contains("cutoff")) {
        const auto& t = j.at("cutoff");
        detail::reject_unknown(t, {"x_min", "x_cap"}, "cutoff.");
        read_if(t, "x_min", p.cutoff.x_min);
        read_if(t, "x_cap", p.cutoff.x_cap);
    }
    if (j.contains("matching")) {
        const auto& t = j.at("matching");
        detail::reject_unknown(t, {"primary", "secondary"}, "matching.");
        read_if(t, "primary", p.matching.primary);
        read_if(t, "secondary", p.matching.secondary);
    }
    if (j.contains("precision")) {
        std::string s;
        read_if(j, "precision", s);
        if (s == "standard") p.precision = Precision::standard;
        else if (s == "extended") p.precision = Precision::extended;
        else throw error(errc::invalid_argument, "config: precision must be 'standard' or 'extended'");
    }
    if (j.contains("box")) {
        std::vector<double> b;
        read_if(j, "box", b);
        if (b.size() != 4) throw error(errc::invalid_argument, "config: box needs [re_min, re_max, im_min, im_max]");
        c.box = {b[0], b[1], b[2], b[3]};
    }
    if (j.contains("scan_resolution")) {
        std::vector<std::size_t> r;
        read_if(j, "scan_resolution", r);
        if (r.size() != 2) throw error(errc::invalid_argument, "config: scan_resolution needs [n_re, n_im]");
        c.n_re = r[0];
        c.n_im = r[1];
    }
    read_if(j, "max_zeros", c.max_zeros);
    read_if(j, "k_max", c.k_max);
    read_if(j, "output", c.output);
    read_if(j, "cache_dir", c.cache_dir);
    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::invalid_argument, "config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw error(errc::invalid_argument, std::string("config: ") + e.what());
    }
    return run_config_from_json(j);
}

// ---- results ---------------------------------------------------------------

inline json to_json(const WronskianEval& w) {
    return {{"zeta", complex_json(w.zeta)},
            {"W", log_complex_json(w.W)},
            {"constancy_defect", w.constancy_defect},
            {"cutoff_used", w.cutoff_used},
            {"series_order_used", w.series_order_used}};
}

inline json to_json(const ScanGrid& g) {
    json cells = json::array();
    for (const auto& c : g.cells) {
        json e = {{"zeta", complex_json(c.zeta)}, {"ok", c.ok}};
        e["log_abs_W"] = std::isfinite(c.log_abs_W) ? json(c.log_abs_W) : json(nullptr);
        e["arg_W"] = std::isfinite(c.arg_W) ? json(c.arg_W) : json(nullptr);
        e["defect"] = std::isfinite(c.defect) ? json(c.defect) : json(nullptr);
        if (!c.failure.empty()) e["failure"] = c.failure;
        cells.push_back(std::move(e));
    }
    return {{"region", {g.region.re_min, g.region.re_max, g.region.im_min, g.region.im_max}},
            {"n_re", g.n_re},
            {"n_im", g.n_im},
            {"cells", std::move(cells)}};
}

inline json to_json(const CertifiedZero& z) {
    json j = {{"zeta_star", complex_json(z.zeta_star)},
              {"residual_log", z.residual_log},
              {"local_scale", z.local_scale},
              {"winding", z.winding},
              {"cert_radius", z.cert_radius},
              {"iterations", z.iterations}};
    j["conjugate_of"] = z.conjugate_of ? json(*z.conjugate_of) : json(nullptr);
    return j;
}

inline json to_json(const ZeroSearchReport& r) {
    json zeros = json::array();
    for (const auto& z : r.zeros) zeros.push_back(to_json(z));
    return {{"zeros", std::move(zeros)},
            {"boundary_winding", r.boundary_winding},
            {"cells_examined", r.cells_examined},
            {"failures", r.failures}};
}

inline json to_json(const SingularReport& r) {
    json d = json::array(), o = json::array();
    for (const auto& v : r.D) d.push_back(log_complex_json(v));
    for (const auto& v : r.D_oracle) o.push_back(log_complex_json(v));
    json j = {{"zeta_star", complex_json(r.zeta_star)},
              {"m", r.m},
              {"k_max", r.k_max},
              {"variant", r.variant == MomentVariant::value ? "value" : "x_derivative"},
              {"D", std::move(d)},
              {"D_oracle", std::move(o)},
              {"oracle_dev", r.oracle_dev},
              {"delta_hat", r.delta_hat},
              {"fit_intercept", r.fit_intercept},
              {"delta_bound", r.delta_bound},
              {"fit_k_min", r.fit_k_min}};
    j["pde_residual"] = r.pde_residual ? json(*r.pde_residual) : json(nullptr);
    return j;
}

inline json to_json(const Verdict& v) { return {{"pass", v.pass}, {"diagnostics", v.diagnostics}}; }

inline json to_json(const LineFit& f) {
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"rms", f.rms},
            {"max_residual", f.max_residual},
            {"slope_stderr", f.slope_stderr}};
}

inline json to_json(const GrowthFit& g) {
    return {{"m", g.m},
            {"radii", g.radii},
            {"angles", g.angles},
            {"excluded_samples", g.excluded_samples},
            {"log_abs_W0", g.log_abs_W0},
            {"log_max", g.log_max},
            {"exponent_est", g.exponent_est},
            {"order_fit", to_json(g.order_fit)},
            {"real_zeta", g.real_zeta},
            {"real_log_abs", g.real_log_abs},
            {"slope_real_axis", g.slope_real_axis},
            {"real_fit", to_json(g.real_fit)},
            {"real_range", g.real_range}};
}

inline json to_json(const IntegralityReport& r) {
    return {{"m", r.m},
            {"exponent_est", r.exponent_est},
            {"nearest_integer", r.nearest_integer},
            {"gap", r.gap},
            {"fit_residual", r.fit_residual},
            {"applicable", r.applicable},
            {"separated", r.separated}};
}

inline json to_json(const EigenEstimate& e) {
    return {{"zeta", e.zeta},
            {"lambda_min", e.lambda_min},
            {"lambda_coarse", e.lambda_coarse},
            {"lambda_fine", e.lambda_fine},
            {"cutoff", e.cutoff},
            {"points", e.points},
            {"refinement_defect", e.refinement_defect}};
}

// One artifact: deterministic content plus a separate metadata block.
inline json make_document(const std::string& kind, const json& config, const json& result, const json& metadata = {}) {
    json doc = {{"schema_version", schema_version}, {"kind", kind}, {"config", config}, {"result", result}};
    doc["metadata"] = metadata.is_null() ? json::object() : metadata;
    return doc;
}

// The document without its metadata block, serialized; equal strings mean equal payloads.
inline std::string payload_text(const json& doc) {
    json copy = doc;
    copy.erase("metadata");
    return copy.dump();
}

// ---- CSV -------------------------------------------------------------------

inline void write_scan_csv(std::ostream& out, const ScanGrid& g) {
    out << "re,im,log_abs_W,arg_W,defect\n";
    for (const auto& c : g.cells) {
        out << format_double(c.zeta.real()) << ',' << format_double(c.zeta.imag()) << ','
            << (std::isfinite(c.log_abs_W) ? format_double(c.log_abs_W) : "nan") << ','
            << (std::isfinite(c.arg_W) ? format_double(c.arg_W) : "nan") << ','
            << (std::isfinite(c.defect) ? format_double(c.defect) : "nan") << '\n';
    }
}

inline void write_zeros_csv(std::ostream& out, const std::vector<CertifiedZero>& zeros) {
    out << "re,im,residual_log,local_scale,winding,cert_radius\n";
    for (const auto& z : zeros)
        out << format_double(z.zeta_star.real()) << ',' << format_double(z.zeta_star.imag()) << ','
            << format_double(z.residual_log) << ',' << format_double(z.local_scale) << ',' << z.winding << ','
            << format_double(z.cert_radius) << '\n';
}

// Samples f on a uniform grid of `points` over [-X, X].
inline void write_eigenfunction_csv(std::ostream& out, const BoundedSolution& sol, std::size_t points = 801) {
    if (points < 2) throw error(errc::invalid_argument, "eigenfunction: need at least two points");
    out << "x,re_f,im_f\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double x = -sol.cutoff + 2.0 * sol.cutoff * static_cast<double>(i) / static_cast<double>(points - 1);
        const auto f = sol.value(x);
        out << format_double(x) << ',' << format_double(f.real()) << ',' << format_double(f.imag()) << '\n';
    }
}

// ---- cache -----------------------------------------------------------------

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

// Everything besides (m, alpha, zeta) that changes the value of eval_W.
inline std::string tolerance_hash(const Problem& p) {
    std::ostringstream s;
    s << format_double(p.tol.ode_rel_tol) << ';' << format_double(p.tol.match_tol) << ';' << p.series_order << ';'
      << format_double(p.cutoff.x_min) << ';' << format_double(p.cutoff.x_cap) << ';'
      << format_double(p.matching.primary) << ';' << format_double(p.matching.secondary) << ';'
      << (p.precision == Precision::extended ? "ext" : "std");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(s.str())));
    return buf;
}

inline std::string cache_key(const Problem& p, std::complex<double> zeta) {
    return "m=" + std::to_string(p.m) + ";alpha=" + format_double(p.alpha) + ";zeta=" + format_double(zeta.real()) +
           "," + format_double(zeta.imag()) + ";tol=" + tolerance_hash(p);
}

// $HYPO_CACHE_DIR, else $XDG_CACHE_HOME/hypo, else ~/.cache/hypo.
inline std::filesystem::path default_cache_dir() {
    if (const char* d = std::getenv("HYPO_CACHE_DIR"); d && *d) return d;
    if (const char* d = std::getenv("XDG_CACHE_HOME"); d && *d) return std::filesystem::path(d) / "hypo";
    if (const char* d = std::getenv("HOME"); d && *d) return std::filesystem::path(d) / ".cache" / "hypo";
    return ".hypo-cache";
}

// Append-only store of Wronskian evaluations, one JSON object per line.
// Values are kept bit for bit (the unit is stored in Cartesian form). Appends
// take an exclusive flock so several processes may share a directory.
class WronskianCache {
public:
    explicit WronskianCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        reload();
    }

    const std::filesystem::path& file() const { return file_; }
    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }
    std::size_t corrupt_lines() const { return corrupt_; }

    void reload() {
        std::lock_guard lock(mutex_);
        entries_.clear();
        corrupt_ = 0;
        file_ = dir_ / "wronskian.jsonl";
        std::ifstream in(file_);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                const json j = json::parse(line);
                entries_[j.at("key").get<std::string>()] = decode(j);
            } catch (const std::exception&) {
                ++corrupt_;
                std::cerr << "warning: ignoring corrupt cache entry at " << file_.string() << ':' << lineno << '\n';
            }
        }
    }

    std::optional<WronskianEval> get(const Problem& p, std::complex<double> zeta) const {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(cache_key(p, zeta));
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void put(const Problem& p, const WronskianEval& w) {
        const std::string key = cache_key(p, w.zeta);
        const std::string line = encode(key, w).dump() + "\n";
        std::lock_guard lock(mutex_);
        const int fd = ::open(file_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
        if (fd < 0) throw error(errc::invalid_argument, "cache: cannot open " + file_.string());
        ::flock(fd, LOCK_EX);
        const ssize_t written = ::write(fd, line.data(), line.size());
        ::flock(fd, LOCK_UN);
        ::close(fd);
        if (written != static_cast<ssize_t>(line.size()))
            throw error(errc::invalid_argument, "cache: short write to " + file_.string());
        entries_[key] = w;
    }

private:
    static json encode(const std::string& key, const WronskianEval& w) {
        return {{"key", key},
                {"zeta", {w.zeta.real(), w.zeta.imag()}},
                {"log_mag", w.W.is_zero() ? json(nullptr) : json(w.W.log_mag())},
                {"unit", {w.W.unit().real(), w.W.unit().imag()}},
                {"constancy_defect", std::isfinite(w.constancy_defect) ? json(w.constancy_defect) : json(nullptr)},
                {"cutoff_used", w.cutoff_used},
                {"series_order_used", w.series_order_used}};
    }

    static WronskianEval decode(const json& j) {
        WronskianEval w;
        w.zeta = {j.at("zeta").at(0).get<double>(), j.at("zeta").at(1).get<double>()};
        const std::complex<double> unit(j.at("unit").at(0).get<double>(), j.at("unit").at(1).get<double>());
        w.W = j.at("log_mag").is_null() ? LogComplex::zero() : LogComplex::from_raw(j.at("log_mag").get<double>(), unit);
        w.constancy_defect = j.at("constancy_defect").is_null() ? std::numeric_limits<double>::infinity()
                                                                : j.at("constancy_defect").get<double>();
        w.cutoff_used = j.at("cutoff_used").get<double>();
        w.series_order_used = j.at("series_order_used").get<int>();
        return w;
    }

    std::filesystem::path dir_;
    std::filesystem::path file_;
    std::map<std::string, WronskianEval> entries_;
    std::size_t corrupt_ = 0;
    mutable std::mutex mutex_;
};

inline WronskianEval eval_W_cached(WronskianCache* cache, const Problem& p, std::complex<double> zeta) {
    if (cache) {
        if (auto hit = cache->get(p, zeta)) return *hit;
    }
    auto w = eval_W(p, zeta);
    if (cache) cache->put(p, w);
    return w;
}

}  // namespace hypo
