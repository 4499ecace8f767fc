#include <limits>
#include <string>

#include "dls/assignment.hpp"

namespace dls {

ScheduleCore::ScheduleCore(const LoopDescriptor& loop, const TechniqueSpec& spec)
    : loop_(loop), calc_(spec, loop), af_(loop.num_pes) {
    state_.remaining = loop_.total_iterations;
}

std::optional<ChunkGrant> ScheduleCore::next(std::int64_t pe) {
    if (pe < 0 || pe >= loop_.num_pes) throw UsageError("PE " + std::to_string(pe) + " out of range");
    if (state_.remaining == 0) return std::nullopt;
    const std::int64_t k = adaptive() ? af_chunk(af_, state_.remaining, pe, loop_)
                                      : calc_.chunk(state_.next_step, state_.remaining);
    if (k < 1 || k > state_.remaining) throw InvariantViolation("chunk size out of range");
    ChunkGrant g;
    g.step = state_.next_step;
    g.start = state_.next_start;
    g.size = k;
    g.pe = pe;
    g.remaining_before = state_.remaining;
    state_.next_step += 1;
    state_.next_start += k;
    state_.remaining -= k;
    return g;
}

void ScheduleCore::record_samples(std::int64_t pe, std::span<const double> seconds) {
    if (adaptive()) af_.add_samples(pe, seconds);
}

namespace {

constexpr std::uint64_t kLowMask = 0xFFFFFFFFULL;

std::uint64_t pack(std::int64_t step, std::int64_t start) {
    return (static_cast<std::uint64_t>(step) << 32) | static_cast<std::uint64_t>(start);
}

}  // namespace

DcaSharedState::DcaSharedState(const LoopDescriptor& loop, const TechniqueSpec& spec, bool force_locked)
    : loop_(loop),
      calc_(spec, loop),
      locked_(force_locked || spec.technique == Technique::AF ||
              loop.total_iterations > static_cast<std::int64_t>(kLowMask)),
      core_(loop, spec) {}

std::optional<ChunkGrant> DcaSharedState::self_assign(std::int64_t pe) {
    if (locked_) {
        std::lock_guard lock(mutex_);
        return core_.next(pe);
    }
    if (pe < 0 || pe >= loop_.num_pes) throw UsageError("PE " + std::to_string(pe) + " out of range");
    std::uint64_t current = packed_.load(std::memory_order_seq_cst);
    for (;;) {
        const auto step = static_cast<std::int64_t>(current >> 32);
        const auto start = static_cast<std::int64_t>(current & kLowMask);
        const std::int64_t remaining = loop_.total_iterations - start;
        if (remaining == 0) return std::nullopt;
        // Evaluated by the worker from (i, R) alone; the CAS below only
        // publishes it if nobody else advanced the state in between.
        const std::int64_t k = calc_.chunk(step, remaining);
        if (packed_.compare_exchange_weak(current, pack(step + 1, start + k),
                                          std::memory_order_seq_cst)) {
            ChunkGrant g;
            g.step = step;
            g.start = start;
            g.size = k;
            g.pe = pe;
            g.remaining_before = remaining;
            return g;
        }
    }
}

std::optional<ChunkGrant> DcaSharedState::self_assign_af(std::int64_t pe,
                                                         std::span<const double> last_samples) {
    std::lock_guard lock(mutex_);
    core_.record_samples(pe, last_samples);
    return core_.next(pe);
}

SchedulerState DcaSharedState::snapshot() const {
    if (locked_) {
        std::lock_guard lock(mutex_);
        return core_.state();
    }
    const std::uint64_t v = packed_.load();
    SchedulerState s;
    s.next_step = static_cast<std::int64_t>(v >> 32);
    s.next_start = static_cast<std::int64_t>(v & kLowMask);
    s.remaining = loop_.total_iterations - s.next_start;
    return s;
}

CcaCoordinator::CcaCoordinator(const LoopDescriptor& loop,
                               const TechniqueSpec& spec,
                               std::chrono::nanoseconds calc_delay)
    : core_(loop, spec), calc_delay_(calc_delay) {
    service_ = std::thread([this] { serve(); });
}

CcaCoordinator::~CcaCoordinator() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    cv_.notify_all();
    service_.join();
}

std::optional<ChunkGrant> CcaCoordinator::request(std::int64_t pe, std::vector<double> samples) {
    std::future<std::optional<ChunkGrant>> reply;
    {
        std::lock_guard lock(mutex_);
        if (stopping_) throw UsageError("coordinator stopped");
        mailbox_.push_back(Message{pe, std::move(samples), {}});
        reply = mailbox_.back().reply.get_future();
    }
    cv_.notify_one();
    return reply.get();
}

SchedulerState CcaCoordinator::snapshot() const {
    std::lock_guard lock(mutex_);
    return core_.state();
}

void CcaCoordinator::serve() {
    for (;;) {
        Message msg;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [this] { return stopping_ || !mailbox_.empty(); });
            if (mailbox_.empty()) return;
            msg = std::move(mailbox_.front());
            mailbox_.pop_front();
        }
        try {
            // The state is only touched by this thread and by snapshot().
            bool has_work;
            {
                std::lock_guard lock(mutex_);
                core_.record_samples(msg.pe, msg.samples);
                has_work = core_.state().remaining > 0;
            }
            if (has_work) spin_for(calc_delay_);
            std::optional<ChunkGrant> grant;
            {
                std::lock_guard lock(mutex_);
                grant = core_.next(msg.pe);
            }
            msg.reply.set_value(grant);
        } catch (...) {
            msg.reply.set_exception(std::current_exception());
        }
    }
}

}  // namespace dls
