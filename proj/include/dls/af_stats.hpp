#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dls/technique.hpp"

namespace dls {

/// Running per-PE iteration-time statistics for adaptive factoring.
/// Welford's single-pass update with a Kahan-compensated running sum, so the
/// mean and sample variance stay close to a two-pass computation.
class AfStats {
public:
    /// Lower bound applied to a PE's mean before it is used as a divisor.
    static constexpr double kMinMean = 1e-9;

    explicit AfStats(std::int64_t num_pes = 1);

    void add_sample(std::int64_t pe, double seconds);
    void add_samples(std::int64_t pe, std::span<const double> seconds);

    std::int64_t num_pes() const { return static_cast<std::int64_t>(pes_.size()); }
    std::int64_t count(std::int64_t pe) const { return at(pe).count; }
    bool has_samples(std::int64_t pe) const { return at(pe).count > 0; }
    double mean(std::int64_t pe) const;
    /// Sample standard deviation (n - 1 denominator); 0 with fewer than two samples.
    double stddev(std::int64_t pe) const;

private:
    struct Accumulator {
        std::int64_t count = 0;
        double mean = 0.0;
        double m2 = 0.0;
        double sum = 0.0;
        double sum_compensation = 0.0;
    };
    std::vector<Accumulator> pes_;

    const Accumulator& at(std::int64_t pe) const;
};

/// Functional form of AfStats::add_sample.
AfStats af_update_stats(AfStats stats, std::int64_t pe, double sample_seconds);

/// Adaptive-factoring chunk size for `pe` with `remaining` iterations left:
/// (D + 2ER - sqrt(D^2 + 4DER)) / (2 mu_pe), rounded up and clamped to
/// [min_chunk, remaining], where D = sum sigma^2/mu and E = (sum 1/mu)^-1.
/// A PE without samples gets min_chunk. PEs without samples yet are
/// represented in D and E by the average mean/stddev of those that have them.
std::int64_t af_chunk(const AfStats& stats,
                      std::int64_t remaining,
                      std::int64_t pe,
                      const LoopDescriptor& loop);

}  // namespace dls
