#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dls/assignment.hpp"
#include "dls/technique.hpp"

namespace dls {

/// One simulated cell: P workers executing a scheduled loop in virtual time.
struct SimConfig {
    LoopDescriptor loop;
    TechniqueSpec spec;
    Mode mode = Mode::Decentralized;
    /// Seconds per iteration; size must equal loop.total_iterations.
    std::shared_ptr<const std::vector<double>> iteration_costs;
    double msg_latency = 1e-6;  ///< per direction, seconds
    double calc_delay = 0.0;    ///< injected into every chunk calculation, seconds
    double assign_cost = 0.0;   ///< serialized service time per grant, seconds
    /// Multipliers on iteration cost per PE; empty means all 1.
    std::vector<double> pe_speed_factors;
    /// When false, PE 0 hosts the coordinator and also computes; service
    /// time it spends on others' requests pauses its own chunk.
    bool dedicated_master = false;
    /// c.o.v. of a mean-1 lognormal factor applied to each iteration cost
    /// (run-to-run noise); 0 disables it.
    double cost_jitter = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PeBreakdown {
    double busy = 0.0;         ///< computing iterations
    double wait = 0.0;         ///< from becoming free to receiving a reply
    double coordinator = 0.0;  ///< serving other PEs' requests (PE 0 only)
    double idle = 0.0;         ///< makespan minus own finish time
    std::int64_t iterations = 0;
    std::int64_t chunks = 0;
};

struct SimMetrics {
    double cov = 0.0;        ///< std / mean of PE finish times
    double imbalance = 0.0;  ///< max / mean - 1 of PE finish times
    std::int64_t total_grants = 0;
};

struct SimReport {
    double makespan = 0.0;
    std::vector<double> finish_times;
    std::vector<PeBreakdown> pes;
    std::vector<ChunkGrant> trace;  ///< ordered by step
    SimMetrics metrics;
};

SimMetrics compute_metrics(std::span<const ChunkGrant> trace, std::span<const double> finish_times);

SimReport run_sim(const SimConfig& config);

}  // namespace dls
