#include "dls/chunk_calculator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dls {

namespace detail {

namespace {
constexpr double kSnapTolerance = 1e-9;

bool near_integer(double x, double& rounded) {
    rounded = std::round(x);
    return std::abs(x - rounded) <= kSnapTolerance * std::max(1.0, std::abs(x));
}

std::int64_t to_count(double x) {
    constexpr double kMax = static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2);
    if (std::isnan(x)) throw InvariantViolation("chunk formula produced NaN");
    return static_cast<std::int64_t>(std::clamp(x, -kMax, kMax));
}
}  // namespace

std::int64_t ceil_snap(double x) {
    double r;
    if (near_integer(x, r)) return to_count(r);
    return to_count(std::ceil(x));
}

std::int64_t floor_snap(double x) {
    double r;
    if (near_integer(x, r)) return to_count(r);
    return to_count(std::floor(x));
}

}  // namespace detail

using detail::ceil_snap;
using detail::floor_snap;

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::int64_t rnd_draw(std::uint64_t seed, std::int64_t step, std::int64_t upper) {
    if (upper <= 1) return 1;
    std::uint64_t state = seed + static_cast<std::uint64_t>(step + 1) * 0x9E3779B97F4A7C15ULL;
    const auto range = static_cast<std::uint64_t>(upper);
    // Largest multiple of range that fits; draws at or above it are rejected.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = splitmix64(state);
    while (x >= limit) x = splitmix64(state);
    return 1 + static_cast<std::int64_t>(x % range);
}

ChunkCalculator::ChunkCalculator(const TechniqueSpec& spec, const LoopDescriptor& loop)
    : spec_(spec), loop_(loop) {
    spec_.validate(loop_);
    const auto n = loop_.total_iterations;
    const auto p = loop_.num_pes;
    const double nd = static_cast<double>(n);
    const double pd = static_cast<double>(p);

    per_pe_ = nd / pd;
    gss_ratio_ = (pd - 1.0) / pd;
    static_chunk_ = (n + p - 1) / p;

    switch (spec_.technique) {
        case Technique::FSC: {
            if (p == 1) {
                fsc_chunk_ = n;
            } else {
                const double k = std::sqrt(2.0) * nd * spec_.h /
                                 (spec_.sigma * pd * std::sqrt(std::log(pd)));
                fsc_chunk_ = std::min<std::int64_t>(ceil_snap(std::min(k, nd)), n);
            }
            break;
        }
        case Technique::TAP:
            tap_v_ = spec_.alpha * spec_.sigma / spec_.mu;
            break;
        case Technique::TSS:
        case Technique::TFSS:
            tss_ = tss_params(loop_);
            break;
        case Technique::FISS:
        case Technique::VISS: {
            const double b = static_cast<double>(spec_.batches);
            fiss_first_ = ceil_snap(nd / ((2.0 + b) * pd));
            fiss_increment_ = ceil_snap(2.0 * nd * (1.0 - b / (2.0 + b)) / (pd * b * (b - 1.0)));
            viss_first_ = spec_.viss_first_chunk.value_or(fiss_first_);
            break;
        }
        case Technique::RND:
            rnd_upper_ = std::max<std::int64_t>(1, n / p);
            break;
        case Technique::PLS:
            pls_static_chunk_ = floor_snap(nd * spec_.swr / pd);
            pls_dynamic_per_pe_ =
                static_cast<double>(std::max<std::int64_t>(0, n - p * pls_static_chunk_)) / pd;
            break;
        default:
            break;
    }
}

std::int64_t ChunkCalculator::gss_value(std::int64_t step, double per_pe) const {
    return ceil_snap(std::pow(gss_ratio_, static_cast<double>(step)) * per_pe);
}

std::int64_t ChunkCalculator::tss_value(std::int64_t step) const {
    return tss_.first_chunk - step * tss_.decrement;
}

std::int64_t ChunkCalculator::unclamped(std::int64_t step) const {
    const auto p = loop_.num_pes;
    const auto batch = step / p;
    switch (spec_.technique) {
        case Technique::Static:
            return static_chunk_;
        case Technique::SS:
            return 1;
        case Technique::FSC:
            return fsc_chunk_;
        case Technique::GSS:
            return gss_value(step, per_pe_);
        case Technique::TAP: {
            const double g = static_cast<double>(gss_value(step, per_pe_));
            const double v = tap_v_;
            return ceil_snap(g + v * v / 2.0 - v * std::sqrt(2.0 * g + v * v / 4.0));
        }
        case Technique::TSS:
            return tss_value(step);
        case Technique::FAC2:
            return ceil_snap(std::pow(0.5, static_cast<double>(batch + 1)) * per_pe_);
        case Technique::TFSS: {
            // Mean of the P trapezoid chunks this batch replaces; trapezoid
            // terms past the trapezoid's end count as its last chunk.
            const std::int64_t first = batch * p;
            const std::int64_t last = first + p - 1;
            std::int64_t sum = 0;
            if (tss_.decrement == 0) {
                sum = p * std::max(tss_.first_chunk, tss_.last_chunk);
            } else {
                const std::int64_t positive_end =
                    std::min(last, (tss_.first_chunk - tss_.last_chunk) / tss_.decrement);
                if (positive_end >= first) {
                    const std::int64_t count = positive_end - first + 1;
                    sum += count * tss_.first_chunk -
                           tss_.decrement * (first + positive_end) * count / 2;
                    sum += (last - positive_end) * tss_.last_chunk;
                } else {
                    sum = p * tss_.last_chunk;
                }
            }
            return (sum + p - 1) / p;
        }
        case Technique::FISS:
            return fiss_first_ + batch * fiss_increment_;
        case Technique::VISS:
            return floor_snap(2.0 * static_cast<double>(viss_first_) *
                              (1.0 - std::pow(0.5, static_cast<double>(batch + 1))));
        case Technique::RND:
            return rnd_draw(spec_.rng_seed, step, rnd_upper_);
        case Technique::PLS:
            if (step < p) return pls_static_chunk_;
            return gss_value(step - p, pls_dynamic_per_pe_);
        case Technique::AF:
            throw ConfigError("AF has no closed-form chunk size; use af_chunk");
    }
    throw InvariantViolation("unhandled technique");
}

std::int64_t ChunkCalculator::chunk(std::int64_t step, std::int64_t remaining) const {
    if (step < 0) throw InvariantViolation("negative scheduling step");
    if (remaining < 0 || remaining > loop_.total_iterations) {
        throw InvariantViolation("remaining iterations out of range");
    }
    if (remaining == 0) return 0;
    if (spec_.technique == Technique::Static && step >= loop_.num_pes) {
        throw InvariantViolation("STATIC step " + std::to_string(step) +
                                 " issued with iterations remaining");
    }
    if (spec_.technique == Technique::TSS && step >= tss_.num_steps) {
        throw InvariantViolation("TSS step " + std::to_string(step) +
                                 " beyond its step count with iterations remaining");
    }
    const std::int64_t k = std::max(loop_.min_chunk, unclamped(step));
    return std::min(k, remaining);
}

std::int64_t compute_chunk_closed(const TechniqueSpec& spec,
                                  const LoopDescriptor& loop,
                                  std::int64_t step,
                                  std::int64_t remaining,
                                  std::int64_t /*pe_id*/) {
    return ChunkCalculator(spec, loop).chunk(step, remaining);
}

std::vector<std::int64_t> closed_sequence(const TechniqueSpec& spec, const LoopDescriptor& loop) {
    const ChunkCalculator calc(spec, loop);
    std::vector<std::int64_t> out;
    std::int64_t remaining = loop.total_iterations;
    for (std::int64_t step = 0; remaining > 0; ++step) {
        const auto k = calc.chunk(step, remaining);
        out.push_back(k);
        remaining -= k;
    }
    return out;
}

}  // namespace dls
