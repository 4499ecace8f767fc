// Recursive chunk formulas evaluated literally over the grant history. These
// carry state from one step to the next and exist to check the closed forms.
#include <algorithm>
#include <cmath>
#include <numeric>

#include "dls/chunk_calculator.hpp"

namespace dls {

using detail::ceil_snap;
using detail::floor_snap;

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t next_chunk(const TechniqueSpec& spec,
                        const LoopDescriptor& loop,
                        std::span<const std::int64_t> history,
                        std::int64_t remaining) {
    const auto n = loop.total_iterations;
    const auto p = loop.num_pes;
    const auto step = static_cast<std::int64_t>(history.size());
    if (remaining < 0) throw InvariantViolation("history exceeds the iteration space");
    if (remaining == 0) return 0;
    const std::int64_t previous = step > 0 ? history.back() : 0;
    const bool batch_start = step % p == 0;

    std::int64_t k = 0;
    switch (spec.technique) {
        case Technique::Static:
            k = ceil_div(n, p);
            break;
        case Technique::SS:
            k = 1;
            break;
        case Technique::FSC:
        case Technique::RND:
            k = ChunkCalculator(spec, loop).unclamped(step);
            break;
        case Technique::GSS:
            k = ceil_div(remaining, p);
            break;
        case Technique::TAP: {
            const double g = static_cast<double>(ceil_div(remaining, p));
            const double v = spec.alpha * spec.sigma / spec.mu;
            k = ceil_snap(g + v * v / 2.0 - v * std::sqrt(2.0 * g + v * v / 4.0));
            break;
        }
        case Technique::TSS: {
            const auto t = tss_params(loop);
            k = step == 0 ? t.first_chunk : previous - t.decrement;
            break;
        }
        case Technique::FAC2:
            k = batch_start ? ceil_div(remaining, 2 * p) : previous;
            break;
        case Technique::TFSS: {
            if (!batch_start) {
                k = previous;
                break;
            }
            const auto t = tss_params(loop);
            std::int64_t term = t.first_chunk;
            for (std::int64_t j = 1; j <= step; ++j) term -= t.decrement;
            std::int64_t sum = 0;
            for (std::int64_t j = 0; j < p; ++j) {
                sum += std::max(term, t.last_chunk);
                term -= t.decrement;
            }
            k = ceil_div(sum, p);
            break;
        }
        case Technique::FISS: {
            const double b = static_cast<double>(spec.batches);
            const double nd = static_cast<double>(n);
            const double pd = static_cast<double>(p);
            if (step == 0) {
                k = ceil_snap(nd / ((2.0 + b) * pd));
            } else if (batch_start) {
                k = previous +
                    ceil_snap(2.0 * nd * (1.0 - b / (2.0 + b)) / (pd * b * (b - 1.0)));
            } else {
                k = previous;
            }
            break;
        }
        case Technique::VISS: {
            const double b = static_cast<double>(spec.batches);
            if (step == 0) {
                k = spec.viss_first_chunk.value_or(
                    ceil_snap(static_cast<double>(n) / ((2.0 + b) * static_cast<double>(p))));
            } else if (batch_start) {
                k = previous + previous / 2;
            } else {
                k = previous;
            }
            break;
        }
        case Technique::PLS: {
            const double static_part = static_cast<double>(n) * spec.swr;
            if (static_cast<double>(remaining) > static_cast<double>(n) - static_part) {
                k = floor_snap(static_part / static_cast<double>(p));
            } else {
                k = ceil_div(remaining, p);
            }
            break;
        }
        case Technique::AF:
            throw ConfigError("AF chunk sizes depend on runtime statistics, not on history");
    }
    return std::min(std::max(loop.min_chunk, k), remaining);
}

}  // namespace

std::int64_t compute_chunk_recursive(const TechniqueSpec& spec,
                                     const LoopDescriptor& loop,
                                     std::span<const std::int64_t> history) {
    spec.validate(loop);
    const std::int64_t scheduled = std::accumulate(history.begin(), history.end(), std::int64_t{0});
    return next_chunk(spec, loop, history, loop.total_iterations - scheduled);
}

std::vector<std::int64_t> recursive_sequence(const TechniqueSpec& spec, const LoopDescriptor& loop) {
    spec.validate(loop);
    std::vector<std::int64_t> out;
    std::int64_t remaining = loop.total_iterations;
    while (remaining > 0) {
        const auto k = next_chunk(spec, loop, out, remaining);
        out.push_back(k);
        remaining -= k;
    }
    return out;
}

}  // namespace dls
