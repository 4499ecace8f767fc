#include "dls/technique.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <string>

namespace dls {

namespace {

struct NamedTechnique {
    Technique technique;
    std::string_view name;
};

constexpr std::array<NamedTechnique, 13> kNames{{
    {Technique::Static, "STATIC"},
    {Technique::SS, "SS"},
    {Technique::FSC, "FSC"},
    {Technique::GSS, "GSS"},
    {Technique::TAP, "TAP"},
    {Technique::TSS, "TSS"},
    {Technique::FAC2, "FAC2"},
    {Technique::TFSS, "TFSS"},
    {Technique::FISS, "FISS"},
    {Technique::VISS, "VISS"},
    {Technique::AF, "AF"},
    {Technique::RND, "RND"},
    {Technique::PLS, "PLS"},
}};

void require_positive(double value, const char* what, Technique t) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string(to_string(t)) + " requires " + what + " > 0");
    }
}

}  // namespace

const std::vector<Technique>& all_techniques() {
    static const std::vector<Technique> all = [] {
        std::vector<Technique> v;
        for (const auto& n : kNames) v.push_back(n.technique);
        return v;
    }();
    return all;
}

std::string_view to_string(Technique t) {
    for (const auto& n : kNames) {
        if (n.technique == t) return n.name;
    }
    return "UNKNOWN";
}

Technique parse_technique(std::string_view name) {
    std::string upper(name);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "FAC") return Technique::FAC2;
    for (const auto& n : kNames) {
        if (n.name == upper) return n.technique;
    }
    throw ConfigError("unknown technique '" + std::string(name) + "'");
}

void LoopDescriptor::validate() const {
    if (total_iterations < 1) throw ConfigError("loop: total_iterations must be >= 1");
    if (num_pes < 1) throw ConfigError("loop: num_pes must be >= 1");
    if (min_chunk < 1 || min_chunk > total_iterations) {
        throw ConfigError("loop: min_chunk must be in [1, total_iterations]");
    }
}

void TechniqueSpec::validate(const LoopDescriptor& loop) const {
    loop.validate();
    switch (technique) {
        case Technique::FSC:
            require_positive(h, "h", technique);
            require_positive(sigma, "sigma", technique);
            break;
        case Technique::TAP:
            require_positive(mu, "mu", technique);
            require_positive(sigma, "sigma", technique);
            require_positive(alpha, "alpha", technique);
            break;
        case Technique::FISS:
        case Technique::VISS:
            if (batches < 2) {
                throw ConfigError(std::string(to_string(technique)) + " requires batches >= 2");
            }
            if (viss_first_chunk && *viss_first_chunk < 1) {
                throw ConfigError("VISS first chunk must be >= 1");
            }
            break;
        case Technique::PLS:
            if (!(swr > 0.0 && swr <= 1.0)) throw ConfigError("PLS requires 0 < swr <= 1");
            break;
        default:
            break;
    }
}

TssParams tss_params(const LoopDescriptor& loop) {
    loop.validate();
    const std::int64_t n = loop.total_iterations;
    const std::int64_t p = loop.num_pes;
    TssParams t;
    t.first_chunk = (n + 2 * p - 1) / (2 * p);
    t.last_chunk = 1;
    const std::int64_t denom = t.first_chunk + t.last_chunk;
    t.num_steps = (2 * n + denom - 1) / denom;
    // A single step (N = 1) has no decrement.
    t.decrement = t.num_steps > 1 ? (t.first_chunk - t.last_chunk) / (t.num_steps - 1) : 0;
    return t;
}

}  // namespace dls
