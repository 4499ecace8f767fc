#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "dls/af_stats.hpp"
#include "dls/chunk_calculator.hpp"
#include "dls/technique.hpp"

namespace dls {

/// Calling the loop API out of order (e.g. ending a loop that has not terminated).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Mode {
    Centralized,    ///< CCA: a coordinator computes sizes and assigns ranges
    Decentralized,  ///< DCA: workers compute sizes and self-assign
};

std::string_view to_string(Mode m);
/// Accepts "CCA"/"centralized" and "DCA"/"decentralized", any case.
Mode parse_mode(std::string_view name);

/// One assignment of the contiguous range [start, start + size) to `pe`.
struct ChunkGrant {
    std::int64_t step = 0;
    std::int64_t start = 0;
    std::int64_t size = 0;
    std::int64_t pe = 0;
    /// Unscheduled iterations observed by the update that produced this grant.
    std::int64_t remaining_before = 0;
    /// Seconds since loop start (wall clock for native runs, virtual time in
    /// the simulator).
    double grant_time = 0.0;
};

/// The shared coordination record. Invariant: next_start + remaining == N.
struct SchedulerState {
    std::int64_t next_step = 0;
    std::int64_t next_start = 0;
    std::int64_t remaining = 0;
};

/// Sequential scheduling state machine shared by every protocol: applies one
/// chunk calculation and advances (i, lp_start, R). Not thread-safe.
class ScheduleCore {
public:
    ScheduleCore(const LoopDescriptor& loop, const TechniqueSpec& spec);

    /// Grants the next chunk to `pe`, or nullopt once nothing remains.
    std::optional<ChunkGrant> next(std::int64_t pe);

    /// Feeds per-iteration timings from `pe` (AF only; ignored otherwise).
    void record_samples(std::int64_t pe, std::span<const double> seconds);

    const SchedulerState& state() const { return state_; }
    const LoopDescriptor& loop() const { return loop_; }
    const TechniqueSpec& spec() const { return calc_.spec(); }
    const ChunkCalculator& calculator() const { return calc_; }
    const AfStats& af_stats() const { return af_; }
    bool adaptive() const { return spec().technique == Technique::AF; }

private:
    LoopDescriptor loop_;
    ChunkCalculator calc_;
    SchedulerState state_;
    AfStats af_;
};

/// Shared scheduling state for DCA. Each self-assignment is one indivisible
/// read-modify-write of (i, lp_start, R): the worker reads the pair, evaluates
/// the closed form locally, and publishes (i + 1, lp_start + k) with a
/// compare-and-swap that fails if any other worker moved first. AF, whose
/// size depends on R and on everyone's statistics, is served under a lock.
class DcaSharedState {
public:
    DcaSharedState(const LoopDescriptor& loop,
                   const TechniqueSpec& spec,
                   bool force_locked = false);

    std::optional<ChunkGrant> self_assign(std::int64_t pe);
    std::optional<ChunkGrant> self_assign_af(std::int64_t pe, std::span<const double> last_samples);

    SchedulerState snapshot() const;
    /// True when R must be synchronized for the chunk calculation itself (AF).
    bool partially_synchronized() const { return locked_; }
    bool lock_free() const { return !locked_; }

private:
    LoopDescriptor loop_;
    ChunkCalculator calc_;
    bool locked_;
    // Lock-free path: step in the high 32 bits, next start in the low 32.
    std::atomic<std::uint64_t> packed_{0};
    // Locked path.
    mutable std::mutex mutex_;
    ScheduleCore core_;
};

/// CCA coordinator: a single owner of the scheduling state behind a FIFO
/// mailbox. Requests are messages; replies are grants. The service thread
/// performs both the chunk calculation and the assignment.
class CcaCoordinator {
public:
    CcaCoordinator(const LoopDescriptor& loop,
                   const TechniqueSpec& spec,
                   std::chrono::nanoseconds calc_delay = {});
    ~CcaCoordinator();

    CcaCoordinator(const CcaCoordinator&) = delete;
    CcaCoordinator& operator=(const CcaCoordinator&) = delete;

    /// Blocks until the coordinator replies. `samples` carries the PE's
    /// per-iteration timings for AF.
    std::optional<ChunkGrant> request(std::int64_t pe, std::vector<double> samples = {});

    SchedulerState snapshot() const;

private:
    struct Message {
        std::int64_t pe;
        std::vector<double> samples;
        std::promise<std::optional<ChunkGrant>> reply;
    };

    void serve();

    ScheduleCore core_;
    std::chrono::nanoseconds calc_delay_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Message> mailbox_;
    bool stopping_ = false;
    std::thread service_;
};

struct SessionOptions {
    Mode mode = Mode::Decentralized;
    /// Busy-wait injected into every chunk calculation.
    std::chrono::nanoseconds calc_delay{0};
};

/// Per-PE totals returned when a loop ends.
struct LoopSummary {
    std::vector<std::int64_t> iterations_per_pe;
    std::vector<std::int64_t> chunks_per_pe;
    double elapsed_seconds = 0.0;
};

/// A scheduling session with the loop API shape: start the loop, then each
/// worker repeats start_chunk / (execute) / end_chunk until no chunk is
/// returned, and finally end_loop collects totals. Safe to call from one
/// thread per PE concurrently.
class LoopSession {
public:
    LoopSession(const LoopDescriptor& loop, const TechniqueSpec& spec, SessionOptions options);

    Mode mode() const { return options_.mode; }
    const LoopDescriptor& loop() const { return loop_; }
    const TechniqueSpec& spec() const { return spec_; }
    bool partially_synchronized() const;

    /// True once every iteration is assigned and every assigned chunk ended.
    bool terminated() const;

    /// Next chunk for `pe`, or nullopt when the loop is exhausted.
    /// `last_samples` are per-iteration timings of the PE's previous chunk
    /// (used by AF, ignored otherwise).
    std::optional<ChunkGrant> start_chunk(std::int64_t pe, std::span<const double> last_samples = {});

    void end_chunk(const ChunkGrant& grant);

    /// Throws UsageError unless terminated().
    LoopSummary end_loop();

    /// Grants issued so far, ordered by step.
    std::vector<ChunkGrant> trace() const;

private:
    LoopDescriptor loop_;
    TechniqueSpec spec_;
    SessionOptions options_;
    std::chrono::steady_clock::time_point started_;
    std::unique_ptr<CcaCoordinator> coordinator_;
    std::unique_ptr<DcaSharedState> shared_;

    mutable std::mutex book_mutex_;
    std::vector<ChunkGrant> trace_;
    std::vector<std::int64_t> iterations_per_pe_;
    std::vector<std::int64_t> chunks_per_pe_;
    std::int64_t assigned_ = 0;
    std::int64_t completed_ = 0;
};

std::unique_ptr<LoopSession> start_loop(const LoopDescriptor& loop,
                                        const TechniqueSpec& spec,
                                        Mode mode);

/// Busy-waits for `duration` on a monotonic clock.
void spin_for(std::chrono::nanoseconds duration);

/// Writes `step,pe_id,start,size,grant_time` rows.
void write_trace_csv(std::ostream& out, std::span<const ChunkGrant> trace);

}  // namespace dls
