#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dls/experiment.hpp"

using namespace dls;

namespace {

const char* kDeskPlan = R"({
  "loop": {"num_pes": 16},
  "technique": {"h": 1e-4, "mu": 1e-3, "sigma": 5e-4, "alpha": 0.0605},
  "workload": {"syn": {"kind": "synthetic", "distribution": "lognormal", "mean": 1e-3, "cov": 0.5, "iterations": 16384}},
  "plan": {"delays_us": [0, 10, 100], "repetitions": 20}
})";

ExperimentConfig small_plan() { return load_config(std::filesystem::path(DLS_TEST_DATA) / "small_plan.json"); }

std::string csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    write_results_csv(out, rows);
    return out.str();
}

}  // namespace

TEST_CASE("plan cardinality") {
    const auto cfg = parse_config(kDeskPlan);
    const auto cells = expand_plan(cfg);
    CHECK(cells.size() == 72);
    CHECK(cells.size() * static_cast<std::size_t>(cfg.plan.repetitions) == 1440);
    CHECK(cfg.workload("syn").total_iterations() == 16384);
}

TEST_CASE("one cell, one repetition") {
    auto cfg = parse_config(R"({
      "workload": {"c": {"kind": "synthetic", "distribution": "constant", "mean": 0.001, "cov": 0, "iterations": 1000}},
      "loop": {"num_pes": 4},
      "sim": {"msg_latency_us": 0},
      "plan": {"techniques": ["STATIC"], "modes": ["DCA"], "delays_us": [0], "repetitions": 1}
    })");
    const auto rows = run_plan(cfg, 7);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].technique == "STATIC");
    CHECK(rows[0].mode == "DCA");
    CHECK(rows[0].backend == "sim");
    CHECK(rows[0].makespan_s == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rows[0].num_chunks == 4);
    CHECK(rows[0].seed == derive_seed(7, "c", 0));
}

TEST_CASE("determinism and golden output") {
    const auto cfg = small_plan();
    const auto a = csv(run_plan(cfg, 12345, 1));
    const auto b = csv(run_plan(cfg, 12345, 1));
    const auto c = csv(run_plan(cfg, 12345, 3));
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a != csv(run_plan(cfg, 12346, 1)));

    std::ifstream golden(std::filesystem::path(DLS_TEST_DATA) / "golden_results.csv");
    REQUIRE(golden);
    std::stringstream want;
    want << golden.rdbuf();
    CHECK(a == want.str());
    CHECK(a.substr(0, a.find('\n')) == "app,technique,mode,backend,delay_us,rep,seed,makespan_s,cov,imbalance,num_chunks");
}

TEST_CASE("seeds depend on (global seed, app, repetition) only") {
    CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
    CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
    const auto rows = run_plan(small_plan(), 5);
    for (const auto& r : rows) CHECK(r.seed == derive_seed(5, r.app, r.rep));
}

TEST_CASE("results CSV round trip") {
    const auto rows = run_plan(small_plan(), 9);
    std::istringstream in(csv(rows));
    const auto back = read_results_csv(in);
    CHECK(csv(back) == csv(rows));
    std::istringstream bad("nope\n");
    CHECK_THROWS_AS(read_results_csv(bad), ConfigError);
    std::istringstream short_row(std::string(kResultsHeader) + "\na,b,c\n");
    CHECK_THROWS_AS(read_results_csv(short_row), ConfigError);
}

TEST_CASE("configuration errors name the field") {
    auto message = [](const char* text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message(R"({"sim": {"calc_delay": 1}})").find("sim.calc_delay") != std::string::npos);
    CHECK(message(R"({"lop": {}})").find("config.lop") != std::string::npos);
    CHECK(message(R"({"plan": {"techniques": ["GSS", "XYZ"]}})").find("plan.techniques") != std::string::npos);
    CHECK(message(R"({"plan": {"modes": ["SOMETIMES"]}})").find("plan.modes") != std::string::npos);
    CHECK(message(R"({"plan": {"backends": ["gpu"]}})").find("plan.backends") != std::string::npos);
    CHECK(message(R"({"plan": {"apps": ["ghost"]}})").find("plan.apps") != std::string::npos);
    CHECK(message(R"({"plan": {"repetitions": 0}})").find("plan.repetitions") != std::string::npos);
    CHECK(message(R"({"loop": {"num_pes": "four"}})").find("loop.num_pes") != std::string::npos);
    CHECK(message(R"({"workload": {"w": {"kind": "synthetic", "iterations": 10, "shape": 2}}})").find("workload.w.shape") !=
          std::string::npos);
    CHECK(message(R"({"workload": {"w": {"kind": "fractal"}}})").find("workload.w.kind") != std::string::npos);
    CHECK(message("{not json").find("invalid JSON") != std::string::npos);
    CHECK(message(R"({"technique": {"name": "GSS"}, "mode": "DCA"})") == "no error");
    CHECK_THROWS_AS(expand_plan(parse_config("{}")), ConfigError);
}

TEST_CASE("plot data") {
    auto row = [](std::string tech, double delay, std::int64_t rep, double makespan) {
        ResultRow r;
        r.app = "m";
        r.technique = std::move(tech);
        r.mode = "DCA";
        r.backend = "sim";
        r.delay_us = delay;
        r.rep = rep;
        r.makespan_s = makespan;
        return r;
    };
    // Five rows checked by hand: GSS {10, 12, 14} -> mean 12, sample std 2; SS {3, 5} -> 4, sqrt(2).
    std::vector<ResultRow> five{row("GSS", 0, 0, 10), row("GSS", 0, 1, 12), row("SS", 0, 0, 3), row("GSS", 0, 2, 14),
                                row("SS", 0, 1, 5)};
    const auto agg = aggregate_rows(five);
    REQUIRE(agg.size() == 2);
    CHECK(agg[0].technique == "GSS");
    CHECK(agg[0].count == 3);
    CHECK(agg[0].mean_makespan_s == doctest::Approx(12.0));
    CHECK(agg[0].std_makespan_s == doctest::Approx(2.0));
    CHECK(agg[1].mean_makespan_s == doctest::Approx(4.0));
    CHECK(agg[1].std_makespan_s == doctest::Approx(std::sqrt(2.0)));

    std::vector<ResultRow> twenty;
    double sum = 0;
    for (int d : {0, 10, 100})
        for (int rep = 0; rep < 20; ++rep) {
            twenty.push_back(row("FAC2", d, rep, 1.0 + rep * 0.25 + d));
            if (d == 0) sum += 1.0 + rep * 0.25;
        }
    const auto agg20 = aggregate_rows(twenty);
    REQUIRE(agg20.size() == 3);
    CHECK(agg20[0].count == 20);
    CHECK(agg20[0].mean_makespan_s == doctest::Approx(sum / 20));

    const auto dir = std::filesystem::temp_directory_path() / "dls_plot_test";
    std::filesystem::remove_all(dir);
    std::ostringstream warn;
    const auto files = emit_plot_data(twenty, Grouping::Delay, dir, warn);
    CHECK(files.size() == 3);
    CHECK(files[0].filename() == "delay_0.csv");
    CHECK(files[2].filename() == "delay_100.csv");
    CHECK(warn.str().empty());
    CHECK(emit_plot_data(twenty, Grouping::App, dir, warn).size() == 1);
    CHECK(emit_plot_data({}, Grouping::App, dir, warn).empty());
    CHECK(warn.str().find("warning") != std::string::npos);
    std::filesystem::remove_all(dir);
    CHECK(parse_grouping("app") == Grouping::App);
    CHECK_THROWS_AS(parse_grouping("mode"), ConfigError);
}

TEST_CASE("native backend cell") {
    auto cfg = parse_config(R"({
      "workload": {"c": {"kind": "synthetic", "distribution": "uniform", "mean": 2e-6, "cov": 0.3, "iterations": 2000}},
      "loop": {"num_pes": 3},
      "technique": {"probe_swr": true},
      "plan": {"techniques": ["FAC2", "PLS"], "modes": ["CCA", "DCA"], "backends": ["native"], "delays_us": [0], "repetitions": 1}
    })");
    const auto rows = run_plan(cfg, 1);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.backend == "native");
        CHECK(r.makespan_s > 0.0);
        CHECK(r.num_chunks > 0);
    }
}
