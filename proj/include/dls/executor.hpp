#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dls/assignment.hpp"
#include "dls/technique.hpp"

namespace dls {

/// Loop body: executes one iteration. Must only write state owned by that
/// iteration.
using IterationFn = std::function<void(std::int64_t)>;

/// A loop body threw; carries the offending iteration index.
class WorkloadError : public std::runtime_error {
public:
    WorkloadError(std::int64_t iteration, const std::string& what);
    std::int64_t iteration() const { return iteration_; }

private:
    std::int64_t iteration_;
};

struct ExecOptions {
    std::chrono::nanoseconds calc_delay{0};
    /// Record the duration of every iteration. Always on for AF.
    bool time_iterations = false;
    /// Pin worker t to CPU (t mod hardware threads).
    bool pin_threads = false;
};

struct ExecReport {
    double makespan = 0.0;  ///< wall-clock seconds
    std::vector<std::int64_t> iterations_per_thread;
    std::vector<double> busy_per_thread;  ///< thread CPU seconds spent inside the loop body
    std::vector<ChunkGrant> trace;        ///< ordered by step
    /// Per-iteration seconds indexed by iteration; empty unless timed.
    std::vector<double> iteration_times;

    /// max / mean - 1 over per-thread busy time.
    double busy_imbalance() const;
};

/// Runs `body` for every index of `loop` on `num_threads` OS threads, which
/// replace loop.num_pes as the PE count. Every iteration executes exactly
/// once; this is checked after the run.
ExecReport run_native(const LoopDescriptor& loop,
                      const TechniqueSpec& spec,
                      Mode mode,
                      const IterationFn& body,
                      std::int64_t num_threads,
                      const ExecOptions& options = {});

/// SWR used when probing is disabled.
inline constexpr double kDefaultSwr = 0.7;

/// Times five distinct randomly chosen iterations once each and returns
/// min / max, clamped into (0, 1]. Requires N >= 5.
double probe_swr(const IterationFn& body, const LoopDescriptor& loop, std::uint64_t seed);

}  // namespace dls
