#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dls {

/// Raised for any invalid loop/technique/experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an internal scheduling invariant is broken (a bug, not bad input).
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Technique {
    Static,
    SS,
    FSC,
    GSS,
    TAP,
    TSS,
    FAC2,
    TFSS,
    FISS,
    VISS,
    AF,
    RND,
    PLS,
};

/// All techniques in the canonical reporting order.
const std::vector<Technique>& all_techniques();

std::string_view to_string(Technique t);

/// Accepts the upper-case names used in reports ("STATIC", "FAC2", ...).
/// "FAC" is accepted as an alias for FAC2.
Technique parse_technique(std::string_view name);

/// The iteration space being scheduled.
struct LoopDescriptor {
    std::int64_t total_iterations = 1;
    std::int64_t num_pes = 1;
    std::int64_t min_chunk = 1;

    void validate() const;
};

/// Technique identifier plus every tuning parameter any technique may need.
/// Parameters a technique does not use are ignored.
struct TechniqueSpec {
    Technique technique = Technique::Static;
    double h = 0.0;      ///< scheduling overhead per assignment (s), FSC
    double sigma = 0.0;  ///< iteration-time standard deviation (s), FSC and TAP
    double mu = 0.0;     ///< iteration-time mean (s), TAP
    double alpha = 0.0;  ///< TAP confidence factor
    std::int64_t batches = 3;  ///< B for FISS/VISS
    double swr = 0.7;          ///< static workload ratio, PLS
    std::uint64_t rng_seed = 0;
    /// Overrides the VISS first chunk (defaults to the FISS first chunk).
    std::optional<std::int64_t> viss_first_chunk;

    void validate(const LoopDescriptor& loop) const;

    static TechniqueSpec of(Technique t) {
        TechniqueSpec s;
        s.technique = t;
        return s;
    }
};

/// Trapezoid self-scheduling constants, all integers.
struct TssParams {
    std::int64_t first_chunk = 0;
    std::int64_t last_chunk = 1;
    std::int64_t num_steps = 0;
    std::int64_t decrement = 0;
};

TssParams tss_params(const LoopDescriptor& loop);

}  // namespace dls
