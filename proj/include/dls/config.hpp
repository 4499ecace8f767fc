#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dls/assignment.hpp"
#include "dls/executor.hpp"
#include "dls/technique.hpp"
#include "dls/workloads.hpp"

namespace dls {

enum class Backend { Sim, Native };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view name);

/// A named per-iteration workload from the `workload` section.
struct WorkloadDef {
    enum class Kind { Mandelbrot, Synthetic, Trace };
    Kind kind = Kind::Synthetic;
    MandelbrotConfig mandelbrot;
    double target_mean = 0.01025;  ///< simulated mean cost for Mandelbrot
    SyntheticConfig synthetic;
    std::int64_t iterations = 0;   ///< synthetic N
    std::filesystem::path trace_path;

    /// Per-iteration costs in seconds. `seed` replaces the synthetic seed.
    std::shared_ptr<const std::vector<double>> costs(std::uint64_t seed) const;
    std::int64_t total_iterations() const;
    /// Native loop body: runs the Mandelbrot kernel, or busy-waits each
    /// iteration's cost scaled by `time_scale`.
    IterationFn native_body(std::uint64_t seed, double time_scale) const;
};

struct SimSettings {
    double msg_latency_us = 1.0;
    double assign_cost_us = 0.0;
    double calc_delay_us = 0.0;  ///< used by single-cell commands; plans use delays_us
    bool dedicated_master = false;
    double cost_jitter = 0.0;
    std::vector<double> pe_speed_factors;
    double native_time_scale = 1.0;
    bool pin_threads = false;
};

struct PlanSettings {
    std::vector<std::string> apps;
    std::vector<Technique> techniques;
    std::vector<Mode> modes;
    std::vector<double> delays_us;
    std::vector<Backend> backends;
    std::int64_t repetitions = 20;
};

/// Whole configuration document: sections loop, technique, mode, workload,
/// sim, plan. Unknown keys are rejected.
struct ExperimentConfig {
    LoopDescriptor loop;  ///< total_iterations is taken from the workload
    TechniqueSpec technique;
    bool technique_named = false;
    bool probe_swr = false;
    Mode mode = Mode::Decentralized;
    std::map<std::string, WorkloadDef> workloads;
    SimSettings sim;
    PlanSettings plan;

    const WorkloadDef& workload(const std::string& app) const;
    /// The only workload, or ConfigError if there are several.
    std::string default_app() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace dls
