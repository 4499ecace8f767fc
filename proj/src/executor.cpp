#include "dls/executor.hpp"

#include <pthread.h>
#include <sched.h>
#include <time.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace dls {

WorkloadError::WorkloadError(std::int64_t iteration, const std::string& what)
    : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

double ExecReport::busy_imbalance() const {
    if (busy_per_thread.empty()) return 0.0;
    const double mean = std::accumulate(busy_per_thread.begin(), busy_per_thread.end(), 0.0) /
                        static_cast<double>(busy_per_thread.size());
    if (mean <= 0.0) return 0.0;
    return *std::max_element(busy_per_thread.begin(), busy_per_thread.end()) / mean - 1.0;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// CPU time of the calling thread, so busy time excludes preemption.
double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

void pin_to_cpu(std::int64_t thread_index) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(static_cast<int>(static_cast<unsigned>(thread_index) % hw), &set);
    pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
}

}  // namespace

ExecReport run_native(const LoopDescriptor& loop_in,
                      const TechniqueSpec& spec,
                      Mode mode,
                      const IterationFn& body,
                      std::int64_t num_threads,
                      const ExecOptions& options) {
    if (num_threads < 1) throw ConfigError("exec: num_threads must be >= 1");
    LoopDescriptor loop = loop_in;
    loop.num_pes = num_threads;
    spec.validate(loop);

    const auto n = static_cast<std::size_t>(loop.total_iterations);
    const bool timed = options.time_iterations || spec.technique == Technique::AF;

    SessionOptions session_options;
    session_options.mode = mode;
    session_options.calc_delay = options.calc_delay;
    LoopSession session(loop, spec, session_options);

    std::vector<std::atomic<std::uint8_t>> executed(n);
    std::vector<double> iteration_times(timed ? n : 0, 0.0);
    std::vector<double> busy(static_cast<std::size_t>(num_threads), 0.0);
    std::atomic<bool> abort{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&](std::int64_t tid) {
        if (options.pin_threads) pin_to_cpu(tid);
        std::vector<double> samples;
        double my_busy = 0.0;
        std::int64_t current = -1;
        try {
            while (!abort.load(std::memory_order_relaxed)) {
                auto grant = session.start_chunk(tid, samples);
                samples.clear();
                if (!grant) break;
                const double chunk_start = thread_cpu_seconds();
                for (std::int64_t i = grant->start; i < grant->start + grant->size; ++i) {
                    current = i;
                    if (timed) {
                        const auto t0 = Clock::now();
                        body(i);
                        const double dt = seconds_since(t0);
                        iteration_times[static_cast<std::size_t>(i)] = dt;
                        samples.push_back(dt);
                    } else {
                        body(i);
                    }
                    executed[static_cast<std::size_t>(i)].fetch_add(1, std::memory_order_relaxed);
                }
                my_busy += thread_cpu_seconds() - chunk_start;
                session.end_chunk(*grant);
            }
        } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex);
            if (!first_error) {
                first_error = current >= 0
                                  ? std::make_exception_ptr(WorkloadError(current, e.what()))
                                  : std::current_exception();
            }
            abort = true;
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) {
                first_error = std::make_exception_ptr(WorkloadError(current, "unknown exception"));
            }
            abort = true;
        }
        busy[static_cast<std::size_t>(tid)] = my_busy;
    };

    const auto t0 = Clock::now();
    {
        std::vector<std::jthread> threads;
        threads.reserve(static_cast<std::size_t>(num_threads));
        try {
            for (std::int64_t t = 0; t < num_threads; ++t) threads.emplace_back(worker, t);
        } catch (const std::system_error& e) {
            abort = true;
            for (auto& th : threads) th.join();
            throw std::runtime_error(std::string("exec: failed to start worker threads: ") + e.what());
        }
    }
    const double makespan = seconds_since(t0);
    if (first_error) std::rethrow_exception(first_error);

    for (std::size_t i = 0; i < n; ++i) {
        if (executed[i].load() != 1) {
            throw InvariantViolation("iteration " + std::to_string(i) + " executed " +
                                     std::to_string(executed[i].load()) + " times");
        }
    }

    auto summary = session.end_loop();
    ExecReport report;
    report.makespan = makespan;
    report.iterations_per_thread = std::move(summary.iterations_per_pe);
    report.busy_per_thread = std::move(busy);
    report.trace = session.trace();
    report.iteration_times = std::move(iteration_times);
    return report;
}

double probe_swr(const IterationFn& body, const LoopDescriptor& loop, std::uint64_t seed) {
    loop.validate();
    constexpr std::int64_t kProbes = 5;
    if (loop.total_iterations < kProbes) throw ConfigError("probe_swr requires at least 5 iterations");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> pick(0, loop.total_iterations - 1);
    std::vector<std::int64_t> indices;
    while (static_cast<std::int64_t>(indices.size()) < kProbes) {
        const auto i = pick(rng);
        if (std::find(indices.begin(), indices.end(), i) == indices.end()) indices.push_back(i);
    }
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto t0 = Clock::now();
        body(indices[k]);
        const double dt = seconds_since(t0);
        lo = k == 0 ? dt : std::min(lo, dt);
        hi = k == 0 ? dt : std::max(hi, dt);
    }
    if (hi <= 0.0) return 1.0;
    return std::clamp(lo / hi, 1e-12, 1.0);
}

}  // namespace dls
