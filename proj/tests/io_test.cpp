#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "hypo/io.hpp"

using namespace hypo;
using cd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("hypo_io_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    return d;
}

WronskianEval synthetic(cd zeta, double log_mag) {
    WronskianEval w;
    w.zeta = zeta;
    w.W = LogComplex::from_polar(log_mag, std::atan2(zeta.imag(), 1.0 + zeta.real()) + 0.1);
    w.constancy_defect = 1e-13 * (1.0 + std::abs(zeta));
    w.cutoff_used = 3.5;
    w.series_order_used = 8;
    return w;
}

bool same_bits(const WronskianEval& a, const WronskianEval& b) {
    return a.zeta == b.zeta && a.W.log_mag() == b.W.log_mag() && a.W.unit() == b.W.unit() &&
           a.constancy_defect == b.constancy_defect && a.cutoff_used == b.cutoff_used &&
           a.series_order_used == b.series_order_used;
}

}  // namespace

TEST(Json, ScalarFormats) {
    const json c = complex_json(cd(1.5, -2.0));
    EXPECT_EQ(c.at("re").get<double>(), 1.5);
    EXPECT_EQ(complex_from(c), cd(1.5, -2.0));
    const json l = log_complex_json(LogComplex::from_polar(900.0, 0.25));
    EXPECT_EQ(l.at("log_mag").get<double>(), 900.0);
    EXPECT_NEAR(l.at("arg").get<double>(), 0.25, 1e-15);
    EXPECT_TRUE(log_complex_json(LogComplex::zero()).at("log_mag").is_null());
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Config, RoundTripAndUnknownKeys) {
    RunConfig c;
    c.problem.m = 3;
    c.problem.alpha = 0.25;
    c.problem.tol.zero_tol = 1e-9;
    c.box = {-2, 2, 0.5, 3};
    c.k_max = 12;
    const RunConfig back = run_config_from_json(to_json(c));
    EXPECT_EQ(back.problem.m, 3);
    EXPECT_EQ(back.problem.alpha, 0.25);
    EXPECT_EQ(back.problem.tol.zero_tol, 1e-9);
    EXPECT_EQ(back.box.im_min, 0.5);
    EXPECT_EQ(back.k_max, 12);
    EXPECT_EQ(to_json(back), to_json(c));

    EXPECT_THROW(run_config_from_json(json{{"m", 4}, {"bogus", 1}}), error);
    EXPECT_THROW(run_config_from_json(json{{"tolerances", {{"zero_tol", 1e-8}, {"typo", 1}}}}), error);
    EXPECT_THROW(run_config_from_json(json{{"m", "four"}}), error);
    EXPECT_THROW(run_config_from_json(json{{"box", {0, 0, 0, 1}}}), error);
    EXPECT_THROW(run_config_from_json(json{{"precision", "quad"}}), error);
}

TEST(Config, LoadFromFile) {
    const fs::path d = fresh_dir("config");
    fs::create_directories(d);
    std::ofstream(d / "c.json") << R"({"m": 5, "cutoff": {"x_cap": 80}})";
    const RunConfig c = load_run_config(d / "c.json");
    EXPECT_EQ(c.problem.m, 5);
    EXPECT_EQ(c.problem.cutoff.x_cap, 80.0);
    std::ofstream(d / "bad.json") << "{ not json";
    EXPECT_THROW(load_run_config(d / "bad.json"), error);
    EXPECT_THROW(load_run_config(d / "missing.json"), error);
    fs::remove_all(d);
}

TEST(Document, PayloadIgnoresMetadata) {
    const json a = make_document("zeros", json{{"m", 4}}, json::array(), json{{"elapsed", 1.0}});
    const json b = make_document("zeros", json{{"m", 4}}, json::array(), json{{"elapsed", 2.0}});
    EXPECT_EQ(a.at("schema_version").get<int>(), schema_version);
    EXPECT_EQ(payload_text(a), payload_text(b));
    EXPECT_NE(a.dump(), b.dump());
}

TEST(Csv, Headers) {
    ScanGrid g;
    g.cells.resize(1);
    g.cells[0].zeta = cd(1, 2);
    std::ostringstream s;
    write_scan_csv(s, g);
    EXPECT_EQ(s.str(), "re,im,log_abs_W,arg_W,defect\n1,2,nan,nan,nan\n");
    std::ostringstream z;
    write_zeros_csv(z, {});
    EXPECT_EQ(z.str(), "re,im,residual_log,local_scale,winding,cert_radius\n");
}

TEST(Cache, PutGetReopen) {
    const fs::path d = fresh_dir("reopen");
    Problem p;
    {
        WronskianCache cache(d);
        EXPECT_EQ(cache.size(), 0u);
        for (int i = 0; i < 1000; ++i) cache.put(p, synthetic(cd(0.01 * i, 0.37 * (i % 7)), 0.3 * i));
        EXPECT_EQ(cache.size(), 1000u);
    }
    WronskianCache again(d);
    EXPECT_EQ(again.size(), 1000u);
    EXPECT_EQ(again.corrupt_lines(), 0u);
    for (int i = 0; i < 1000; i += 37) {
        const auto w = synthetic(cd(0.01 * i, 0.37 * (i % 7)), 0.3 * i);
        const auto hit = again.get(p, w.zeta);
        ASSERT_TRUE(hit.has_value());
        EXPECT_TRUE(same_bits(*hit, w)) << i;
    }
    Problem other = p;
    other.tol.ode_rel_tol = 1e-12;
    EXPECT_FALSE(again.get(other, cd(0, 0)).has_value());
    Problem other_m = p;
    other_m.m = 3;
    EXPECT_FALSE(again.get(other_m, cd(0, 0)).has_value());
    fs::remove_all(d);
}

TEST(Cache, CorruptLinesAreSkipped) {
    const fs::path d = fresh_dir("corrupt");
    Problem p;
    {
        WronskianCache cache(d);
        cache.put(p, synthetic(cd(1, 1), 2.0));
    }
    std::ofstream(d / "wronskian.jsonl", std::ios::app) << "{\"key\": truncated\n";
    {
        WronskianCache cache(d);
        cache.put(p, synthetic(cd(2, 1), 3.0));
    }
    WronskianCache cache(d);
    EXPECT_EQ(cache.corrupt_lines(), 1u);
    EXPECT_EQ(cache.size(), 2u);
    fs::remove_all(d);
}

TEST(Cache, ConcurrentPuts) {
    const fs::path d = fresh_dir("threads");
    Problem p;
    {
        WronskianCache cache(d);
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t)
            threads.emplace_back([&, t] {
                for (int i = 0; i < 100; ++i) cache.put(p, synthetic(cd(t, 0.01 * i), i));
            });
        for (auto& th : threads) th.join();
    }
    WronskianCache cache(d);
    EXPECT_EQ(cache.size(), 400u);
    EXPECT_EQ(cache.corrupt_lines(), 0u);
    fs::remove_all(d);
}

TEST(Cache, CachedEvaluationMatchesDirect) {
    const fs::path d = fresh_dir("eval");
    Problem p;
    p.m = 2;
    WronskianCache cache(d);
    const auto a = eval_W_cached(&cache, p, cd(0.5, 0.5));
    const auto b = eval_W_cached(&cache, p, cd(0.5, 0.5));
    EXPECT_EQ(cache.size(), 1u);
    EXPECT_TRUE(same_bits(a, b));
    EXPECT_TRUE(same_bits(a, eval_W(p, cd(0.5, 0.5))));
    fs::remove_all(d);
}

TEST(Cache, DirectoryFromEnvironment) {
    ::setenv("HYPO_CACHE_DIR", "/tmp/hypo_env_dir", 1);
    EXPECT_EQ(default_cache_dir(), fs::path("/tmp/hypo_env_dir"));
    ::unsetenv("HYPO_CACHE_DIR");
    ::setenv("XDG_CACHE_HOME", "/tmp/xdg", 1);
    EXPECT_EQ(default_cache_dir(), fs::path("/tmp/xdg/hypo"));
    ::unsetenv("XDG_CACHE_HOME");
}
