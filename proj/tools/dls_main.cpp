// dls: command-line front end for the scheduling library.
//
//   dls run      --config plan.json --out results.csv [--seed S] [--parallel N]
//   dls sim      --config cell.json [--app A] [--technique T] [--mode M] [--delay-us D] [--rep R]
//   dls exec     --config cell.json [...same as sim...]
//   dls verify
//   dls plotdata --in results.csv --group-by delay|app --out DIR
//
// Exit status: 0 ok, 1 verification failure, 2 configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dls/experiment.hpp"
#include "dls/reference_table.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kConfigError = 2;

struct CellArgs {
    std::string config;
    std::string out;
    std::string dump_trace;
    std::string app;
    std::string technique;
    std::string mode;
    std::optional<double> delay_us;
    std::int64_t rep = 0;
    std::uint64_t seed = 1;
};

// Opens `path` for writing, or returns stdout when path is empty or "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw dls::ConfigError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

int run_one(const CellArgs& a, dls::Backend backend) {
    const auto cfg = dls::load_config(a.config);
    dls::ExperimentCell cell;
    cell.app = a.app.empty() ? cfg.default_app() : a.app;
    cfg.workload(cell.app);
    cell.technique = a.technique.empty() ? cfg.technique.technique : dls::parse_technique(a.technique);
    cell.mode = a.mode.empty() ? cfg.mode : dls::parse_mode(a.mode);
    cell.backend = backend;
    cell.delay_us = a.delay_us.value_or(cfg.sim.calc_delay_us);
    if (cell.delay_us < 0) throw dls::ConfigError("--delay-us: must be >= 0");

    std::vector<dls::ChunkGrant> trace;
    const auto row = dls::run_cell(cfg, cell, a.rep, a.seed, a.dump_trace.empty() ? nullptr : &trace);
    Output out(a.out);
    dls::write_results_csv(out.stream(), {row});
    if (!a.dump_trace.empty()) {
        Output t(a.dump_trace);
        dls::write_trace_csv(t.stream(), trace);
    }
    return kOk;
}

void add_cell_options(CLI::App* cmd, CellArgs& a) {
    cmd->add_option("--config", a.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", a.out, "result CSV (default stdout)");
    cmd->add_option("--dump-trace", a.dump_trace, "write the chunk trace as CSV");
    cmd->add_option("--app", a.app, "workload name (default: the only workload)");
    cmd->add_option("--technique", a.technique, "overrides technique.name");
    cmd->add_option("--mode", a.mode, "CCA or DCA (overrides mode)");
    cmd->add_option("--delay-us", a.delay_us, "injected chunk-calculation delay in microseconds");
    cmd->add_option("--rep", a.rep, "repetition index used for seeding");
    cmd->add_option("--seed", a.seed, "global seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic loop self-scheduling: techniques, simulator, native executor"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 1;
    int parallel = 1;
    auto* run = app.add_subcommand("run", "run a factorial plan and write one CSV row per cell and repetition");
    run->add_option("--config", config_path, "JSON plan file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_path, "result CSV (default stdout)");
    run->add_option("--seed", seed, "global seed");
    run->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);

    CellArgs sim_args;
    auto* sim = app.add_subcommand("sim", "simulate one cell");
    add_cell_options(sim, sim_args);

    CellArgs exec_args;
    auto* exec = app.add_subcommand("exec", "execute one cell natively with threads");
    add_cell_options(exec, exec_args);

    auto* verify = app.add_subcommand("verify", "regenerate the reference chunk table (N=1000, P=4) and compare");

    std::string in_path;
    std::string group_by = "delay";
    std::string plot_dir = "plotdata";
    auto* plot = app.add_subcommand("plotdata", "aggregate a result CSV into per-group mean/std files");
    plot->add_option("--in", in_path, "result CSV")->required()->check(CLI::ExistingFile);
    plot->add_option("--group-by", group_by, "delay or app");
    plot->add_option("--out", plot_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) {
            const auto cfg = dls::load_config(config_path);
            const auto rows = dls::run_plan(cfg, seed, parallel);
            Output out(out_path);
            dls::write_results_csv(out.stream(), rows);
            return kOk;
        }
        if (*sim) return run_one(sim_args, dls::Backend::Sim);
        if (*exec) return run_one(exec_args, dls::Backend::Native);
        if (*verify) {
            const auto report = dls::verify_reference_table();
            dls::print_reference_report(std::cout, report);
            return report.passed() ? kOk : kVerifyFailed;
        }
        if (*plot) {
            std::ifstream in(in_path);
            const auto rows = dls::read_results_csv(in);
            const auto written = dls::emit_plot_data(rows, dls::parse_grouping(group_by), plot_dir, std::cerr);
            for (const auto& p : written) std::cout << p.string() << '\n';
            return kOk;
        }
    } catch (const dls::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kVerifyFailed;
    }
    return kOk;
}
