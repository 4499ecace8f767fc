#include "dls/workloads.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "dls/chunk_calculator.hpp"
#include "dls/format.hpp"
#include "dls/technique.hpp"

namespace dls {

void MandelbrotConfig::validate() const {
    if (width < 1) throw ConfigError("mandelbrot: width must be >= 1");
    if (threshold < 1) throw ConfigError("mandelbrot: threshold must be >= 1");
    if (!(x_min < x_max) || !(y_min < y_max)) throw ConfigError("mandelbrot: empty region");
}

MandelbrotPixel mandelbrot_iterations(std::int64_t index, const MandelbrotConfig& config) {
    const std::int64_t w = config.width;
    const double x = static_cast<double>(index / w);
    const double y = static_cast<double>(index % w);
    const double wd = static_cast<double>(w);
    const double cr = config.x_min + x / wd * (config.x_max - config.x_min);
    const double ci = config.y_min + y / wd * (config.y_max - config.y_min);

    double zr = 0.0;
    double zi = 0.0;
    std::int64_t k = 0;
    while (k < config.threshold && zr * zr + zi * zi < 4.0) {
        // z^2, then squared again.
        const double sr = zr * zr - zi * zi;
        const double si = 2.0 * zr * zi;
        zr = sr * sr - si * si + cr;
        zi = 2.0 * sr * si + ci;
        ++k;
    }
    return {k, k == config.threshold};
}

std::vector<std::int64_t> mandelbrot_escape_map(const MandelbrotConfig& config) {
    config.validate();
    std::vector<std::int64_t> out(static_cast<std::size_t>(config.iterations()));
    for (std::int64_t i = 0; i < config.iterations(); ++i) {
        out[static_cast<std::size_t>(i)] = mandelbrot_iterations(i, config).escape_count;
    }
    return out;
}

std::vector<double> mandelbrot_costs(const MandelbrotConfig& config, double target_mean) {
    if (!(target_mean > 0.0)) throw ConfigError("mandelbrot: target mean must be > 0");
    const auto counts = mandelbrot_escape_map(config);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                         [](double a, std::int64_t c) { return a + static_cast<double>(c); });
    const double per_count = target_mean * static_cast<double>(counts.size()) / total;
    std::vector<double> costs(counts.size());
    std::transform(counts.begin(), counts.end(), costs.begin(),
                   [per_count](std::int64_t c) { return static_cast<double>(c) * per_count; });
    return costs;
}

void write_pgm(std::ostream& out, const MandelbrotConfig& config, std::span<const std::int64_t> escape_map) {
    if (static_cast<std::int64_t>(escape_map.size()) != config.iterations()) {
        throw ConfigError("pgm: escape map size does not match the image");
    }
    out << "P5\n" << config.width << ' ' << config.width << "\n255\n";
    const double log_ct = std::log(static_cast<double>(config.threshold));
    // Row r of the image holds y = r, column c holds x = c.
    for (std::int64_t row = 0; row < config.width; ++row) {
        for (std::int64_t col = 0; col < config.width; ++col) {
            const auto k = escape_map[static_cast<std::size_t>(col * config.width + row)];
            const double shade = log_ct > 0.0 ? std::log(static_cast<double>(k)) / log_ct : 1.0;
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - shade)))));
        }
    }
}

std::string_view to_string(Distribution d) {
    switch (d) {
        case Distribution::Constant: return "constant";
        case Distribution::Uniform: return "uniform";
        case Distribution::Lognormal: return "lognormal";
        case Distribution::Exponential: return "exponential";
    }
    return "unknown";
}

Distribution parse_distribution(std::string_view name) {
    std::string lower(name);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto d : {Distribution::Constant, Distribution::Uniform, Distribution::Lognormal,
                   Distribution::Exponential}) {
        if (lower == to_string(d)) return d;
    }
    throw ConfigError("unknown distribution '" + std::string(name) + "'");
}

void SyntheticConfig::validate() const {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw ConfigError("synthetic: mean must be > 0");
    if (!(cov >= 0.0) || !std::isfinite(cov)) throw ConfigError("synthetic: cov must be >= 0");
    switch (distribution) {
        case Distribution::Constant:
            if (cov != 0.0) throw ConfigError("synthetic: a constant workload has cov 0");
            break;
        case Distribution::Uniform:
            if (cov > 1.0 / std::sqrt(3.0)) {
                throw ConfigError("synthetic: uniform costs cannot exceed cov 1/sqrt(3) without going negative");
            }
            break;
        case Distribution::Exponential:
            if (cov > 1.0) throw ConfigError("synthetic: shifted exponential supports cov <= 1");
            break;
        case Distribution::Lognormal:
            break;
    }
}

namespace {

double uniform01(std::mt19937_64& rng) {
    // 53 random mantissa bits, strictly inside (0, 1).
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double quantile(const SyntheticConfig& c, double u) {
    switch (c.distribution) {
        case Distribution::Constant:
            return c.mean;
        case Distribution::Uniform: {
            const double half = std::sqrt(3.0) * c.cov * c.mean;
            return c.mean - half + 2.0 * half * u;
        }
        case Distribution::Exponential: {
            const double scale = c.cov * c.mean;
            return c.mean - scale - scale * std::log1p(-u);
        }
        case Distribution::Lognormal: {
            const double s2 = std::log1p(c.cov * c.cov);
            const double m = std::log(c.mean) - s2 / 2.0;
            static const boost::math::normal_distribution<double> standard;
            return std::exp(m + std::sqrt(s2) * boost::math::quantile(standard, u));
        }
    }
    return c.mean;
}

}  // namespace

std::vector<double> synthetic_costs(const SyntheticConfig& config, std::int64_t n) {
    config.validate();
    if (n < 1) throw ConfigError("synthetic: N must be >= 1");
    std::mt19937_64 rng(config.seed);
    std::vector<double> costs(static_cast<std::size_t>(n));
    const double band = 1.0 / static_cast<double>(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(i) + uniform01(rng)) * band;
        costs[static_cast<std::size_t>(i)] = std::max(0.0, quantile(config, u));
    }
    // Fisher-Yates with the portable SplitMix-based range draw.
    std::uint64_t shuffle_seed = rng();
    for (std::int64_t i = n - 1; i > 0; --i) {
        const auto j = rnd_draw(shuffle_seed, i, i + 1) - 1;
        std::swap(costs[static_cast<std::size_t>(i)], costs[static_cast<std::size_t>(j)]);
    }
    return costs;
}

std::vector<double> load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("trace: cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        double v = 0.0;
        const char* first = line.data();
        const char* last = line.data() + line.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (line.empty() || ec != std::errc{} || ptr != last || !(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("trace: " + path.string() + ": line " + std::to_string(line_no) +
                              ": expected a non-negative number, got '" + line + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("trace: " + path.string() + " is empty");
    return out;
}

void save_trace(const std::filesystem::path& path, std::span<const double> costs) {
    std::ofstream out(path);
    if (!out) throw ConfigError("trace: cannot write " + path.string());
    for (double c : costs) out << format_double(c) << '\n';
}

CostSummary summarize_costs(std::span<const double> costs) {
    CostSummary s;
    if (costs.empty()) return s;
    const double n = static_cast<double>(costs.size());
    s.mean = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
    double ss = 0.0;
    for (double c : costs) ss += (c - s.mean) * (c - s.mean);
    s.stddev = std::sqrt(ss / n);
    s.cov = s.mean > 0.0 ? s.stddev / s.mean : 0.0;
    const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

}  // namespace dls
