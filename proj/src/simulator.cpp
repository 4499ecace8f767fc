#include "dls/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <random>

namespace dls {

void SimConfig::validate() const {
    spec.validate(loop);
    if (!iteration_costs) throw ConfigError("sim: iteration costs missing");
    if (static_cast<std::int64_t>(iteration_costs->size()) != loop.total_iterations) {
        throw ConfigError("sim: iteration cost count differs from total_iterations");
    }
    for (double c : *iteration_costs) {
        if (!(c >= 0.0)) throw ConfigError("sim: iteration costs must be >= 0");
    }
    if (!(msg_latency >= 0.0) || !(calc_delay >= 0.0) || !(assign_cost >= 0.0)) {
        throw ConfigError("sim: times must be >= 0");
    }
    if (!pe_speed_factors.empty()) {
        if (static_cast<std::int64_t>(pe_speed_factors.size()) != loop.num_pes) {
            throw ConfigError("sim: pe_speed_factors must have one entry per PE");
        }
        for (double f : pe_speed_factors) {
            if (!(f > 0.0)) throw ConfigError("sim: speed factors must be > 0");
        }
    }
    if (!(cost_jitter >= 0.0)) throw ConfigError("sim: cost_jitter must be >= 0");
}

SimMetrics compute_metrics(std::span<const ChunkGrant> trace, std::span<const double> finish_times) {
    SimMetrics m;
    m.total_grants = static_cast<std::int64_t>(trace.size());
    if (finish_times.empty()) return m;
    const double n = static_cast<double>(finish_times.size());
    const double mean = std::accumulate(finish_times.begin(), finish_times.end(), 0.0) / n;
    if (mean <= 0.0) return m;
    double ss = 0.0;
    for (double f : finish_times) ss += (f - mean) * (f - mean);
    m.cov = std::sqrt(ss / n) / mean;
    m.imbalance = std::max(0.0, *std::max_element(finish_times.begin(), finish_times.end()) / mean - 1.0);
    return m;
}

namespace {

enum class EventKind { WorkerReady, RequestArrive, ServiceDone, ReplyArrive, ComputeDone };

struct Event {
    double time;
    std::int64_t pe;
    std::uint64_t seq;
    EventKind kind;
    std::uint64_t version = 0;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.pe != b.pe) return a.pe > b.pe;
        return a.seq > b.seq;
    }
};

struct Worker {
    std::optional<ChunkGrant> pending;
    std::vector<double> samples;
    double request_time = 0.0;
    double compute_end = 0.0;
    std::uint64_t compute_version = 0;
    bool computing = false;
    bool finished = false;
};

class Engine {
public:
    explicit Engine(const SimConfig& c) : cfg_(c), core_(c.loop, c.spec) {
        const auto p = static_cast<std::size_t>(c.loop.num_pes);
        workers_.resize(p);
        report_.finish_times.assign(p, 0.0);
        report_.pes.resize(p);
        speed_ = c.pe_speed_factors.empty() ? std::vector<double>(p, 1.0) : c.pe_speed_factors;
        build_costs();
    }

    SimReport run() {
        for (std::int64_t pe = 0; pe < cfg_.loop.num_pes; ++pe) push(0.0, pe, EventKind::WorkerReady);
        while (!events_.empty()) {
            const Event ev = events_.top();
            events_.pop();
            dispatch(ev);
        }
        finalize();
        return std::move(report_);
    }

private:
    const SimConfig& cfg_;
    ScheduleCore core_;
    std::vector<Worker> workers_;
    std::vector<double> speed_;
    std::vector<double> costs_;
    std::vector<double> prefix_;
    std::priority_queue<Event, std::vector<Event>, Later> events_;
    std::uint64_t seq_ = 0;
    std::deque<std::int64_t> queue_;
    bool server_busy_ = false;
    SimReport report_;

    bool coordinator_local(std::int64_t pe) const { return !cfg_.dedicated_master && pe == 0; }
    double latency(std::int64_t pe) const { return coordinator_local(pe) ? 0.0 : cfg_.msg_latency; }

    void build_costs() {
        const auto& base = *cfg_.iteration_costs;
        costs_ = base;
        if (cfg_.cost_jitter > 0.0) {
            const double s2 = std::log1p(cfg_.cost_jitter * cfg_.cost_jitter);
            std::mt19937_64 rng(cfg_.seed);
            std::lognormal_distribution<double> noise(-s2 / 2.0, std::sqrt(s2));
            for (auto& c : costs_) c *= noise(rng);
        }
        prefix_.assign(costs_.size() + 1, 0.0);
        for (std::size_t i = 0; i < costs_.size(); ++i) prefix_[i + 1] = prefix_[i] + costs_[i];
    }

    void push(double t, std::int64_t pe, EventKind kind, std::uint64_t version = 0) {
        events_.push(Event{t, pe, seq_++, kind, version});
    }

    Worker& worker(std::int64_t pe) { return workers_[static_cast<std::size_t>(pe)]; }
    PeBreakdown& stats(std::int64_t pe) { return report_.pes[static_cast<std::size_t>(pe)]; }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::WorkerReady: on_ready(ev.pe, ev.time); break;
            case EventKind::RequestArrive: on_arrive(ev.pe, ev.time); break;
            case EventKind::ServiceDone: on_service_done(ev.pe, ev.time); break;
            case EventKind::ReplyArrive: on_reply(ev.pe, ev.time); break;
            case EventKind::ComputeDone: on_compute_done(ev.pe, ev.time, ev.version); break;
        }
    }

    void on_ready(std::int64_t pe, double t) {
        worker(pe).request_time = t;
        // Under DCA the worker calculates its own chunk before touching the
        // shared state, so the injected delay runs on the worker in parallel.
        const double calc = cfg_.mode == Mode::Decentralized ? cfg_.calc_delay : 0.0;
        push(t + calc + latency(pe), pe, EventKind::RequestArrive);
    }

    void on_arrive(std::int64_t pe, double t) {
        queue_.push_back(pe);
        if (!server_busy_) start_service(t);
    }

    void start_service(double t) {
        const std::int64_t pe = queue_.front();
        queue_.pop_front();
        server_busy_ = true;
        auto& w = worker(pe);
        core_.record_samples(pe, w.samples);
        w.samples.clear();

        const bool has_work = core_.state().remaining > 0;
        double duration = cfg_.assign_cost;
        if (cfg_.mode == Mode::Centralized && has_work) duration += cfg_.calc_delay;

        w.pending = core_.next(pe);
        if (w.pending) {
            w.pending->grant_time = t + duration;
            report_.trace.push_back(*w.pending);
        }
        steal_coordinator_time(t, duration);
        push(t + duration, pe, EventKind::ServiceDone);
    }

    // A non-dedicated coordinator serves requests on PE 0's CPU: any chunk
    // PE 0 is computing is pushed back by the service time.
    void steal_coordinator_time(double t, double duration) {
        if (cfg_.dedicated_master || duration <= 0.0) return;
        auto& host = worker(0);
        if (!host.computing || host.compute_end <= t) return;
        host.compute_end += duration;
        host.compute_version += 1;
        stats(0).coordinator += duration;
        push(host.compute_end, 0, EventKind::ComputeDone, host.compute_version);
    }

    void on_service_done(std::int64_t pe, double t) {
        server_busy_ = false;
        push(t + latency(pe), pe, EventKind::ReplyArrive);
        if (!queue_.empty()) start_service(t);
    }

    void on_reply(std::int64_t pe, double t) {
        auto& w = worker(pe);
        stats(pe).wait += t - w.request_time;
        if (!w.pending) {
            w.finished = true;
            report_.finish_times[static_cast<std::size_t>(pe)] = t;
            return;
        }
        const auto& g = *w.pending;
        const double speed = speed_[static_cast<std::size_t>(pe)];
        const auto begin = static_cast<std::size_t>(g.start);
        const auto end = static_cast<std::size_t>(g.start + g.size);
        const double duration = (prefix_[end] - prefix_[begin]) * speed;
        if (core_.adaptive()) {
            w.samples.reserve(end - begin);
            for (std::size_t j = begin; j < end; ++j) w.samples.push_back(costs_[j] * speed);
        }
        auto& s = stats(pe);
        s.busy += duration;
        s.iterations += g.size;
        s.chunks += 1;
        w.computing = true;
        w.compute_end = t + duration;
        w.compute_version += 1;
        push(w.compute_end, pe, EventKind::ComputeDone, w.compute_version);
    }

    void on_compute_done(std::int64_t pe, double t, std::uint64_t version) {
        auto& w = worker(pe);
        if (version != w.compute_version) return;  // superseded by a coordinator pause
        w.computing = false;
        w.pending.reset();
        on_ready(pe, t);
    }

    void finalize() {
        auto& r = report_;
        for (const auto& w : workers_) {
            if (!w.finished) throw InvariantViolation("simulation ended with a worker still active");
        }
        r.makespan = *std::max_element(r.finish_times.begin(), r.finish_times.end());
        for (std::size_t i = 0; i < r.pes.size(); ++i) r.pes[i].idle = r.makespan - r.finish_times[i];
        std::sort(r.trace.begin(), r.trace.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
        std::int64_t total = 0;
        for (const auto& g : r.trace) total += g.size;
        if (total != cfg_.loop.total_iterations) throw InvariantViolation("simulation did not cover the loop");
        r.metrics = compute_metrics(r.trace, r.finish_times);
    }
};

}  // namespace

SimReport run_sim(const SimConfig& config) {
    config.validate();
    return Engine(config).run();
}

}  // namespace dls
