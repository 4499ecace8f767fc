#include <algorithm>
#include <cctype>
#include <string>

#include "dls/assignment.hpp"

namespace dls {

std::string_view to_string(Mode m) { return m == Mode::Centralized ? "CCA" : "DCA"; }

Mode parse_mode(std::string_view name) {
    std::string lower(name);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "cca" || lower == "centralized") return Mode::Centralized;
    if (lower == "dca" || lower == "decentralized") return Mode::Decentralized;
    throw ConfigError("unknown mode '" + std::string(name) + "'");
}

void spin_for(std::chrono::nanoseconds duration) {
    if (duration <= std::chrono::nanoseconds::zero()) return;
    const auto until = std::chrono::steady_clock::now() + duration;
    while (std::chrono::steady_clock::now() < until) {
    }
}

LoopSession::LoopSession(const LoopDescriptor& loop, const TechniqueSpec& spec, SessionOptions options)
    : loop_(loop), spec_(spec), options_(options) {
    spec_.validate(loop_);
    if (options_.mode == Mode::Centralized) {
        coordinator_ = std::make_unique<CcaCoordinator>(loop_, spec_, options_.calc_delay);
    } else {
        shared_ = std::make_unique<DcaSharedState>(loop_, spec_);
    }
    iterations_per_pe_.assign(static_cast<std::size_t>(loop_.num_pes), 0);
    chunks_per_pe_.assign(static_cast<std::size_t>(loop_.num_pes), 0);
    started_ = std::chrono::steady_clock::now();
}

bool LoopSession::partially_synchronized() const {
    return options_.mode == Mode::Decentralized && spec_.technique == Technique::AF;
}

bool LoopSession::terminated() const {
    std::lock_guard lock(book_mutex_);
    return completed_ == loop_.total_iterations;
}

std::optional<ChunkGrant> LoopSession::start_chunk(std::int64_t pe, std::span<const double> last_samples) {
    std::optional<ChunkGrant> grant;
    if (coordinator_) {
        grant = coordinator_->request(pe, std::vector<double>(last_samples.begin(), last_samples.end()));
    } else {
        spin_for(options_.calc_delay);
        grant = spec_.technique == Technique::AF ? shared_->self_assign_af(pe, last_samples)
                                                 : shared_->self_assign(pe);
    }
    if (!grant) return grant;
    grant->grant_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    std::lock_guard lock(book_mutex_);
    trace_.push_back(*grant);
    assigned_ += grant->size;
    return grant;
}

void LoopSession::end_chunk(const ChunkGrant& grant) {
    std::lock_guard lock(book_mutex_);
    if (grant.pe < 0 || grant.pe >= loop_.num_pes) throw UsageError("end_chunk: PE out of range");
    if (completed_ + grant.size > assigned_) throw UsageError("end_chunk without a matching start_chunk");
    completed_ += grant.size;
    iterations_per_pe_[static_cast<std::size_t>(grant.pe)] += grant.size;
    chunks_per_pe_[static_cast<std::size_t>(grant.pe)] += 1;
}

LoopSummary LoopSession::end_loop() {
    if (!terminated()) throw UsageError("end_loop called before the loop terminated");
    std::lock_guard lock(book_mutex_);
    LoopSummary s;
    s.iterations_per_pe = iterations_per_pe_;
    s.chunks_per_pe = chunks_per_pe_;
    s.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    return s;
}

std::vector<ChunkGrant> LoopSession::trace() const {
    std::lock_guard lock(book_mutex_);
    auto out = trace_;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
    return out;
}

std::unique_ptr<LoopSession> start_loop(const LoopDescriptor& loop, const TechniqueSpec& spec, Mode mode) {
    SessionOptions options;
    options.mode = mode;
    return std::make_unique<LoopSession>(loop, spec, options);
}

}  // namespace dls
