#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dls/config.hpp"
#include "dls/simulator.hpp"

namespace dls {

/// One factor-level combination of a factorial plan.
struct ExperimentCell {
    std::string app;
    Technique technique = Technique::Static;
    Mode mode = Mode::Decentralized;
    Backend backend = Backend::Sim;
    double delay_us = 0.0;
};

/// One CSV row: `app,technique,mode,backend,delay_us,rep,seed,makespan_s,cov,imbalance,num_chunks`.
struct ResultRow {
    std::string app;
    std::string technique;
    std::string mode;
    std::string backend;
    double delay_us = 0.0;
    std::int64_t rep = 0;
    std::uint64_t seed = 0;
    double makespan_s = 0.0;
    double cov = 0.0;
    double imbalance = 0.0;
    std::int64_t num_chunks = 0;
};

inline constexpr const char* kResultsHeader =
    "app,technique,mode,backend,delay_us,rep,seed,makespan_s,cov,imbalance,num_chunks";

/// The twelve techniques of the factorial design: every technique but SS.
std::vector<Technique> experiment_techniques();

/// Cartesian product of the plan's factor levels. Empty factors default to
/// every workload, experiment_techniques(), both modes, the sim calc delay
/// and the sim backend.
std::vector<ExperimentCell> expand_plan(const ExperimentConfig& config);

/// Repetition seed. Depends only on (global seed, app, rep), so every cell of
/// one repetition sees the same workload realization.
std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& app, std::int64_t rep);

SimConfig make_sim_config(const ExperimentConfig& config,
                          const ExperimentCell& cell,
                          std::uint64_t seed,
                          std::shared_ptr<const std::vector<double>> costs);

/// Runs one (cell, repetition). When `trace` is given it receives the grants.
ResultRow run_cell(const ExperimentConfig& config,
                   const ExperimentCell& cell,
                   std::int64_t rep,
                   std::uint64_t global_seed,
                   std::vector<ChunkGrant>* trace = nullptr);

/// Every cell x repetition, executed on `parallel` threads. Rows come back in
/// plan order (cells as expanded, then repetition) whatever the parallelism.
std::vector<ResultRow> run_plan(const ExperimentConfig& config, std::uint64_t global_seed, int parallel = 1);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

/// Mean and sample standard deviation of makespan per (app, technique, mode, backend, delay).
struct AggregateRow {
    std::string app;
    std::string technique;
    std::string mode;
    std::string backend;
    double delay_us = 0.0;
    std::int64_t count = 0;
    double mean_makespan_s = 0.0;
    double std_makespan_s = 0.0;
};

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows);

enum class Grouping { Delay, App };
Grouping parse_grouping(std::string_view name);

/// Writes one `<grouping>_<level>.csv` per level of the grouping factor into
/// `out_dir` and returns the paths. Groups without rows are skipped with a
/// warning on `warn`.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<ResultRow>& rows,
                                                  Grouping grouping,
                                                  const std::filesystem::path& out_dir,
                                                  std::ostream& warn);

}  // namespace dls
