#include "dls/af_stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dls/chunk_calculator.hpp"

namespace dls {

AfStats::AfStats(std::int64_t num_pes) {
    if (num_pes < 1) throw ConfigError("AfStats requires at least one PE");
    pes_.resize(static_cast<std::size_t>(num_pes));
}

const AfStats::Accumulator& AfStats::at(std::int64_t pe) const {
    if (pe < 0 || pe >= num_pes()) throw std::out_of_range("AF stats: PE " + std::to_string(pe));
    return pes_[static_cast<std::size_t>(pe)];
}

void AfStats::add_sample(std::int64_t pe, double seconds) {
    if (!(seconds >= 0.0)) throw ConfigError("AF sample time must be >= 0");
    at(pe);
    auto& a = pes_[static_cast<std::size_t>(pe)];
    a.count += 1;

    // Kahan summation of the raw samples for the mean.
    const double y = seconds - a.sum_compensation;
    const double t = a.sum + y;
    a.sum_compensation = (t - a.sum) - y;
    a.sum = t;

    const double delta = seconds - a.mean;
    a.mean = a.sum / static_cast<double>(a.count);
    a.m2 += delta * (seconds - a.mean);
}

void AfStats::add_samples(std::int64_t pe, std::span<const double> seconds) {
    for (double s : seconds) add_sample(pe, s);
}

double AfStats::mean(std::int64_t pe) const { return at(pe).mean; }

double AfStats::stddev(std::int64_t pe) const {
    const auto& a = at(pe);
    if (a.count < 2) return 0.0;
    return std::sqrt(std::max(0.0, a.m2 / static_cast<double>(a.count - 1)));
}

AfStats af_update_stats(AfStats stats, std::int64_t pe, double sample_seconds) {
    stats.add_sample(pe, sample_seconds);
    return stats;
}

std::int64_t af_chunk(const AfStats& stats,
                      std::int64_t remaining,
                      std::int64_t pe,
                      const LoopDescriptor& loop) {
    if (remaining < 0) throw InvariantViolation("AF: negative remaining count");
    if (remaining == 0) return 0;
    if (stats.num_pes() != loop.num_pes) throw ConfigError("AF stats sized for a different PE count");
    if (!stats.has_samples(pe)) return std::min(loop.min_chunk, remaining);

    double known_mean = 0.0;
    double known_sd = 0.0;
    std::int64_t known = 0;
    for (std::int64_t q = 0; q < stats.num_pes(); ++q) {
        if (!stats.has_samples(q)) continue;
        known_mean += stats.mean(q);
        known_sd += stats.stddev(q);
        ++known;
    }
    known_mean /= static_cast<double>(known);
    known_sd /= static_cast<double>(known);

    double d = 0.0;
    double inv_sum = 0.0;
    for (std::int64_t q = 0; q < stats.num_pes(); ++q) {
        const bool has = stats.has_samples(q);
        const double mu = std::max(has ? stats.mean(q) : known_mean, AfStats::kMinMean);
        const double sd = has ? stats.stddev(q) : known_sd;
        d += sd * sd / mu;
        inv_sum += 1.0 / mu;
    }
    const double e = 1.0 / inv_sum;
    const double r = static_cast<double>(remaining);
    const double mu_pe = std::max(stats.mean(pe), AfStats::kMinMean);
    const double k = (d + 2.0 * e * r - std::sqrt(d * d + 4.0 * d * e * r)) / (2.0 * mu_pe);

    const std::int64_t size = detail::ceil_snap(std::min(k, r));
    return std::min(std::max(loop.min_chunk, size), remaining);
}

}  // namespace dls
