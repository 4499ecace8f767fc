#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "dls/technique.hpp"

namespace dls {

/// Quartic Mandelbrot kernel (z <- z^4 + c) over a W x W grid.
struct MandelbrotConfig {
    std::int64_t width = 512;
    std::int64_t threshold = 1'000'000;  ///< conversion threshold CT
    double x_min = -1.5;
    double x_max = 1.5;
    double y_min = -1.5;
    double y_max = 1.5;

    void validate() const;
    std::int64_t iterations() const { return width * width; }
};

struct MandelbrotPixel {
    std::int64_t escape_count = 0;
    bool black = false;  ///< never escaped within the threshold
};

/// Loop body for one index: x = index / W, y = index mod W.
MandelbrotPixel mandelbrot_iterations(std::int64_t index, const MandelbrotConfig& config);

std::vector<std::int64_t> mandelbrot_escape_map(const MandelbrotConfig& config);

/// Per-iteration cost in seconds: escape counts scaled by one constant so the
/// mean equals `target_mean`.
std::vector<double> mandelbrot_costs(const MandelbrotConfig& config, double target_mean = 0.01025);

/// Binary PGM (P5), 255 for pixels that escaped immediately down to 0 for black.
void write_pgm(std::ostream& out, const MandelbrotConfig& config, std::span<const std::int64_t> escape_map);

enum class Distribution { Constant, Uniform, Lognormal, Exponential };

std::string_view to_string(Distribution d);
Distribution parse_distribution(std::string_view name);

struct SyntheticConfig {
    Distribution distribution = Distribution::Lognormal;
    double mean = 1.0;  ///< seconds
    double cov = 0.0;   ///< coefficient of variation (std / mean)
    std::uint64_t seed = 0;

    /// Throws ConfigError if the distribution cannot have this mean/c.o.v.
    void validate() const;
};

/// N independent per-iteration costs. Stratified inverse-CDF sampling (one
/// draw per 1/N quantile band, then a seeded shuffle), so sample moments sit
/// close to the targets. Uniform supports cov <= 1/sqrt(3) and the shifted
/// exponential cov <= 1, keeping every cost non-negative.
std::vector<double> synthetic_costs(const SyntheticConfig& config, std::int64_t n);

/// Newline-separated non-negative decimal seconds, one per iteration.
std::vector<double> load_trace(const std::filesystem::path& path);
void save_trace(const std::filesystem::path& path, std::span<const double> costs);

struct CostSummary {
    double mean = 0.0;
    double stddev = 0.0;  ///< population standard deviation
    double cov = 0.0;
    double min = 0.0;
    double max = 0.0;
};

CostSummary summarize_costs(std::span<const double> costs);

}  // namespace dls
