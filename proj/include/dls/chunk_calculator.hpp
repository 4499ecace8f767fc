#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dls/technique.hpp"

namespace dls {

/// Closed-form chunk sizes: the size granted at step i depends only on the
/// technique constants, i, and the remaining count used for clamping. Every
/// constant that does not depend on i is computed once at construction, so a
/// calculator can be copied to each worker and evaluated without coordination.
class ChunkCalculator {
public:
    ChunkCalculator(const TechniqueSpec& spec, const LoopDescriptor& loop);

    /// Granted size at `step` when `remaining` iterations are unscheduled:
    /// max(min_chunk, min(formula, remaining)), or 0 iff remaining == 0.
    /// Throws ConfigError for AF, which has no closed form.
    std::int64_t chunk(std::int64_t step, std::int64_t remaining) const;

    /// The formula value at `step` before any clamping. May be <= 0 past the
    /// technique's natural end (e.g. TSS beyond its last step).
    std::int64_t unclamped(std::int64_t step) const;

    bool has_closed_form() const { return spec_.technique != Technique::AF; }

    const TechniqueSpec& spec() const { return spec_; }
    const LoopDescriptor& loop() const { return loop_; }

private:
    TechniqueSpec spec_;
    LoopDescriptor loop_;

    // Precomputed per-technique constants.
    double per_pe_ = 0.0;            // N / P
    double gss_ratio_ = 0.0;         // (P - 1) / P
    double tap_v_ = 0.0;             // alpha * sigma / mu
    std::int64_t static_chunk_ = 0;
    std::int64_t fsc_chunk_ = 0;
    TssParams tss_;
    std::int64_t fiss_first_ = 0;
    std::int64_t fiss_increment_ = 0;
    std::int64_t viss_first_ = 0;
    std::int64_t rnd_upper_ = 1;
    std::int64_t pls_static_chunk_ = 0;
    double pls_dynamic_per_pe_ = 0.0;  // (N - P * static chunk) / P

    std::int64_t gss_value(std::int64_t step, double per_pe) const;
    std::int64_t tss_value(std::int64_t step) const;
};

/// Stateless convenience wrapper around ChunkCalculator. `pe_id` is accepted
/// for interface symmetry; no closed form depends on it.
std::int64_t compute_chunk_closed(const TechniqueSpec& spec,
                                  const LoopDescriptor& loop,
                                  std::int64_t step,
                                  std::int64_t remaining,
                                  std::int64_t pe_id = 0);

/// The full canonical sequence obtained by granting closed-form chunks until
/// nothing remains.
std::vector<std::int64_t> closed_sequence(const TechniqueSpec& spec,
                                          const LoopDescriptor& loop);

/// Literal recursive evaluation: the next size given the ordered history of
/// every previously granted size. Kept as an oracle for the closed forms.
std::int64_t compute_chunk_recursive(const TechniqueSpec& spec,
                                     const LoopDescriptor& loop,
                                     std::span<const std::int64_t> history);

std::vector<std::int64_t> recursive_sequence(const TechniqueSpec& spec,
                                             const LoopDescriptor& loop);

/// RND chunk draw. SplitMix64 (Steele, Lea, Flood 2014; increment
/// 0x9E3779B97F4A7C15, finalizer multipliers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB) seeded with seed + (step + 1) * increment, followed by
/// rejection sampling for an unbiased value in [1, upper].
std::int64_t rnd_draw(std::uint64_t seed, std::int64_t step, std::int64_t upper);

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

namespace detail {
/// ceil/floor that first snap values within a relative 1e-9 of an integer,
/// so formulas whose exact value is integral do not drift up or down by one
/// because of binary rounding.
std::int64_t ceil_snap(double x);
std::int64_t floor_snap(double x);
}  // namespace detail

}  // namespace dls
