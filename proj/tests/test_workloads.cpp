#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dls/workloads.hpp"

using namespace dls;

TEST_CASE("mandelbrot kernel") {
    MandelbrotConfig cfg;
    cfg.width = 64;
    cfg.threshold = 500;
    // x = W/2 maps to c_r = 0, y = W/2 to c_i = 0.
    const auto origin = mandelbrot_iterations(32 * 64 + 32, cfg);
    CHECK(origin.escape_count == 500);
    CHECK(origin.black);
    // Index 0 is the corner (-1.5, -1.5), |c| > 2.
    const auto corner = mandelbrot_iterations(0, cfg);
    CHECK(corner.escape_count == 1);
    CHECK_FALSE(corner.black);
    CHECK(mandelbrot_escape_map(cfg) == mandelbrot_escape_map(cfg));

    MandelbrotConfig bad = cfg;
    bad.width = 0;
    CHECK_THROWS_AS(mandelbrot_escape_map(bad), ConfigError);
    bad = cfg;
    bad.x_max = bad.x_min;
    CHECK_THROWS_AS(mandelbrot_escape_map(bad), ConfigError);
    CHECK_THROWS_AS(mandelbrot_costs(cfg, 0.0), ConfigError);
}

TEST_CASE("mandelbrot costs hit the target mean") {
    MandelbrotConfig cfg;
    cfg.width = 64;
    cfg.threshold = 1000;
    const auto costs = mandelbrot_costs(cfg, 0.01025);
    const auto s = summarize_costs(costs);
    CHECK(s.mean == doctest::Approx(0.01025).epsilon(1e-12));
    CHECK(s.cov > 1.0);

    std::ostringstream pgm;
    write_pgm(pgm, cfg, mandelbrot_escape_map(cfg));
    CHECK(pgm.str().rfind("P5\n64 64\n255\n", 0) == 0);
    CHECK(pgm.str().size() == 13 + 64 * 64);
}

TEST_CASE("synthetic generators") {
    SyntheticConfig c;
    c.distribution = Distribution::Constant;
    c.mean = 0.07298;
    c.cov = 0.0;
    const auto constant = synthetic_costs(c, 1000);
    CHECK(std::all_of(constant.begin(), constant.end(), [](double x) { return x == 0.07298; }));
    CHECK(summarize_costs(constant).cov < 1e-12);

    struct Case {
        Distribution d;
        double mean, cov;
    };
    for (const auto& k : {Case{Distribution::Lognormal, 0.01025, 1.824}, Case{Distribution::Lognormal, 0.07298, 0.256},
                          Case{Distribution::Uniform, 1.0, 0.5}, Case{Distribution::Exponential, 2.0, 1.0},
                          Case{Distribution::Exponential, 2.0, 0.3}}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            SyntheticConfig s{k.d, k.mean, k.cov, seed};
            const auto xs = synthetic_costs(s, 20000);
            const auto st = summarize_costs(xs);
            CAPTURE(to_string(k.d));
            CAPTURE(k.cov);
            CHECK(std::abs(st.mean / k.mean - 1.0) <= 0.02);
            CHECK(std::abs(st.cov / k.cov - 1.0) <= 0.05);
            CHECK(st.min >= 0.0);
            CHECK(xs == synthetic_costs(s, 20000));
        }
    }
    SyntheticConfig a{Distribution::Lognormal, 1.0, 0.5, 1};
    SyntheticConfig b{Distribution::Lognormal, 1.0, 0.5, 2};
    CHECK(synthetic_costs(a, 100) != synthetic_costs(b, 100));
}

TEST_CASE("synthetic errors") {
    CHECK_THROWS_AS(synthetic_costs({Distribution::Constant, 1.0, 0.1, 0}, 10), ConfigError);
    CHECK_THROWS_AS(synthetic_costs({Distribution::Uniform, 1.0, 0.7, 0}, 10), ConfigError);
    CHECK_THROWS_AS(synthetic_costs({Distribution::Exponential, 1.0, 1.5, 0}, 10), ConfigError);
    CHECK_THROWS_AS(synthetic_costs({Distribution::Lognormal, 0.0, 0.5, 0}, 10), ConfigError);
    CHECK_THROWS_AS(synthetic_costs({Distribution::Lognormal, 1.0, -0.5, 0}, 10), ConfigError);
    CHECK_THROWS_AS(synthetic_costs({Distribution::Lognormal, 1.0, 0.5, 0}, 0), ConfigError);
    CHECK(parse_distribution("LogNormal") == Distribution::Lognormal);
    CHECK_THROWS_AS(parse_distribution("pareto"), ConfigError);
}

TEST_CASE("trace files") {
    const auto dir = std::filesystem::temp_directory_path() / "dls_trace_test";
    std::filesystem::create_directories(dir);
    const auto p = dir / "t.txt";
    {
        std::ofstream(p) << "1.0\n2.0\n";
    }
    CHECK(load_trace(p) == std::vector<double>{1.0, 2.0});
    {
        std::ofstream out(p);
    }
    CHECK_THROWS_AS(load_trace(p), ConfigError);
    {
        std::ofstream(p) << "1.0\nabc\n3\n";
    }
    try {
        load_trace(p);
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    {
        std::ofstream(p) << "1.0\n-2\n";
    }
    CHECK_THROWS_AS(load_trace(p), ConfigError);
    CHECK_THROWS_AS(load_trace(dir / "missing.txt"), ConfigError);

    const auto xs = synthetic_costs({Distribution::Lognormal, 0.01025, 1.824, 5}, 5000);
    save_trace(p, xs);
    CHECK(load_trace(p) == xs);
    std::filesystem::remove_all(dir);
}
