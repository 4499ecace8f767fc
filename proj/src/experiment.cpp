#include "dls/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "dls/chunk_calculator.hpp"
#include "dls/executor.hpp"
#include "dls/format.hpp"

namespace dls {

std::vector<Technique> experiment_techniques() {
    std::vector<Technique> out;
    for (auto t : all_techniques())
        if (t != Technique::SS) out.push_back(t);
    return out;
}

std::vector<ExperimentCell> expand_plan(const ExperimentConfig& config) {
    const auto& plan = config.plan;
    std::vector<std::string> apps = plan.apps;
    if (apps.empty()) {
        for (const auto& [name, _] : config.workloads) apps.push_back(name);
    }
    if (apps.empty()) throw ConfigError("workload: no workloads defined");
    const auto techniques = plan.techniques.empty() ? experiment_techniques() : plan.techniques;
    const auto modes = plan.modes.empty() ? std::vector<Mode>{Mode::Centralized, Mode::Decentralized} : plan.modes;
    const auto delays = plan.delays_us.empty() ? std::vector<double>{config.sim.calc_delay_us} : plan.delays_us;
    const auto backends = plan.backends.empty() ? std::vector<Backend>{Backend::Sim} : plan.backends;

    std::vector<ExperimentCell> cells;
    cells.reserve(apps.size() * techniques.size() * modes.size() * delays.size() * backends.size());
    for (const auto& app : apps) {
        config.workload(app);
        for (auto t : techniques)
            for (auto m : modes)
                for (auto b : backends)
                    for (double d : delays) cells.push_back({app, t, m, b, d});
    }
    return cells;
}

std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& app, std::int64_t rep) {
    // FNV-1a over the app name, then SplitMix64 mixing.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : app) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = global_seed ^ h;
    splitmix64(state);
    state ^= static_cast<std::uint64_t>(rep);
    return splitmix64(state);
}

namespace {

TechniqueSpec spec_for(const ExperimentConfig& config, Technique t, std::uint64_t seed) {
    TechniqueSpec spec = config.technique;
    spec.technique = t;
    spec.rng_seed = seed;
    return spec;
}

LoopDescriptor loop_for(const ExperimentConfig& config, std::int64_t n) {
    LoopDescriptor loop = config.loop;
    loop.total_iterations = n;
    loop.min_chunk = std::min(loop.min_chunk, n);
    return loop;
}

class CostCache {
public:
    std::shared_ptr<const std::vector<double>> get(const ExperimentConfig& config,
                                                   const std::string& app,
                                                   std::uint64_t seed) {
        const auto& def = config.workload(app);
        const std::uint64_t key_seed = def.kind == WorkloadDef::Kind::Synthetic ? seed : 0;
        std::unique_lock lock(mutex_);
        auto& slot = entries_[{app, key_seed}];
        if (!slot) {
            lock.unlock();
            auto costs = def.costs(seed);
            lock.lock();
            if (!slot) slot = std::move(costs);
        }
        return slot;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::string, std::uint64_t>, std::shared_ptr<const std::vector<double>>> entries_;
};

ResultRow run_cell_with(const ExperimentConfig& config,
                        const ExperimentCell& cell,
                        std::int64_t rep,
                        std::uint64_t global_seed,
                        CostCache& cache,
                        std::vector<ChunkGrant>* trace) {
    const std::uint64_t seed = derive_seed(global_seed, cell.app, rep);
    ResultRow row;
    row.app = cell.app;
    row.technique = std::string(to_string(cell.technique));
    row.mode = std::string(to_string(cell.mode));
    row.backend = std::string(to_string(cell.backend));
    row.delay_us = cell.delay_us;
    row.rep = rep;
    row.seed = seed;

    if (cell.backend == Backend::Sim) {
        auto costs = cache.get(config, cell.app, seed);
        const auto report = run_sim(make_sim_config(config, cell, seed, std::move(costs)));
        row.makespan_s = report.makespan;
        row.cov = report.metrics.cov;
        row.imbalance = report.metrics.imbalance;
        row.num_chunks = report.metrics.total_grants;
        if (trace) *trace = report.trace;
        return row;
    }

    const auto& def = config.workload(cell.app);
    const auto body = def.native_body(seed, config.sim.native_time_scale);
    const LoopDescriptor loop = loop_for(config, def.total_iterations());
    TechniqueSpec spec = spec_for(config, cell.technique, seed);
    if (cell.technique == Technique::PLS && config.probe_swr) spec.swr = probe_swr(body, loop, seed);
    ExecOptions options;
    options.calc_delay = std::chrono::nanoseconds(static_cast<std::int64_t>(cell.delay_us * 1e3));
    options.pin_threads = config.sim.pin_threads;
    const auto report = run_native(loop, spec, cell.mode, body, loop.num_pes, options);
    const auto m = compute_metrics(report.trace, report.busy_per_thread);
    row.makespan_s = report.makespan;
    row.cov = m.cov;
    row.imbalance = m.imbalance;
    row.num_chunks = m.total_grants;
    if (trace) *trace = report.trace;
    return row;
}

}  // namespace

SimConfig make_sim_config(const ExperimentConfig& config,
                          const ExperimentCell& cell,
                          std::uint64_t seed,
                          std::shared_ptr<const std::vector<double>> costs) {
    SimConfig sim;
    sim.loop = loop_for(config, static_cast<std::int64_t>(costs->size()));
    sim.spec = spec_for(config, cell.technique, seed);
    sim.mode = cell.mode;
    sim.iteration_costs = std::move(costs);
    sim.msg_latency = config.sim.msg_latency_us * 1e-6;
    sim.assign_cost = config.sim.assign_cost_us * 1e-6;
    sim.calc_delay = cell.delay_us * 1e-6;
    sim.pe_speed_factors = config.sim.pe_speed_factors;
    sim.dedicated_master = config.sim.dedicated_master;
    sim.cost_jitter = config.sim.cost_jitter;
    sim.seed = seed;
    return sim;
}

ResultRow run_cell(const ExperimentConfig& config,
                   const ExperimentCell& cell,
                   std::int64_t rep,
                   std::uint64_t global_seed,
                   std::vector<ChunkGrant>* trace) {
    CostCache cache;
    return run_cell_with(config, cell, rep, global_seed, cache, trace);
}

std::vector<ResultRow> run_plan(const ExperimentConfig& config, std::uint64_t global_seed, int parallel) {
    const auto cells = expand_plan(config);
    const auto reps = config.plan.repetitions;
    const std::size_t total = cells.size() * static_cast<std::size_t>(reps);
    std::vector<ResultRow> rows(total);
    CostCache cache;
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto work = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total) return;
            try {
                const auto& cell = cells[task / static_cast<std::size_t>(reps)];
                const auto rep = static_cast<std::int64_t>(task % static_cast<std::size_t>(reps));
                rows[task] = run_cell_with(config, cell, rep, global_seed, cache, nullptr);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = total;
            }
        }
    };

    const int threads = std::max(1, parallel);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.app << ',' << r.technique << ',' << r.mode << ',' << r.backend << ','
            << format_double(r.delay_us) << ',' << r.rep << ',' << r.seed << ',' << format_double(r.makespan_s)
            << ',' << format_double(r.cov) << ',' << format_double(r.imbalance) << ',' << r.num_chunks << '\n';
    }
}

namespace {

template <typename T>
T parse_field(const std::string& text, std::int64_t line, const char* name) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("results CSV line " + std::to_string(line) + ": bad " + name + " '" + text + "'");
    }
    return value;
}

}  // namespace

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) {
        throw ConfigError("results CSV: missing or unexpected header");
    }
    std::vector<ResultRow> rows;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 11) throw ConfigError("results CSV line " + std::to_string(line_no) + ": expected 11 fields");
        ResultRow r;
        r.app = f[0];
        r.technique = f[1];
        r.mode = f[2];
        r.backend = f[3];
        r.delay_us = parse_field<double>(f[4], line_no, "delay_us");
        r.rep = parse_field<std::int64_t>(f[5], line_no, "rep");
        r.seed = parse_field<std::uint64_t>(f[6], line_no, "seed");
        r.makespan_s = parse_field<double>(f[7], line_no, "makespan_s");
        r.cov = parse_field<double>(f[8], line_no, "cov");
        r.imbalance = parse_field<double>(f[9], line_no, "imbalance");
        r.num_chunks = parse_field<std::int64_t>(f[10], line_no, "num_chunks");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<ResultRow>& rows) {
    using Key = std::tuple<std::string, std::string, std::string, std::string, double>;
    std::vector<Key> order;
    std::map<Key, std::vector<double>> groups;
    for (const auto& r : rows) {
        Key k{r.app, r.technique, r.mode, r.backend, r.delay_us};
        auto [it, inserted] = groups.try_emplace(k);
        if (inserted) order.push_back(k);
        it->second.push_back(r.makespan_s);
    }
    std::vector<AggregateRow> out;
    for (const auto& k : order) {
        const auto& v = groups[k];
        AggregateRow a;
        std::tie(a.app, a.technique, a.mode, a.backend, a.delay_us) = k;
        a.count = static_cast<std::int64_t>(v.size());
        double sum = 0.0;
        for (double x : v) sum += x;
        a.mean_makespan_s = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - a.mean_makespan_s) * (x - a.mean_makespan_s);
        a.std_makespan_s = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out.push_back(std::move(a));
    }
    return out;
}

Grouping parse_grouping(std::string_view name) {
    if (name == "delay") return Grouping::Delay;
    if (name == "app") return Grouping::App;
    throw ConfigError("unknown grouping '" + std::string(name) + "' (expected delay or app)");
}

std::vector<std::filesystem::path> emit_plot_data(const std::vector<ResultRow>& rows,
                                                  Grouping grouping,
                                                  const std::filesystem::path& out_dir,
                                                  std::ostream& warn) {
    std::vector<std::filesystem::path> written;
    if (rows.empty()) {
        warn << "warning: no result rows; nothing written\n";
        return written;
    }
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> levels;
    std::map<std::string, std::vector<AggregateRow>> by_level;
    for (auto& a : aggregate_rows(rows)) {
        const std::string level = grouping == Grouping::Delay ? format_double(a.delay_us) : a.app;
        if (!by_level.count(level)) levels.push_back(level);
        by_level[level].push_back(std::move(a));
    }
    for (const auto& level : levels) {
        const auto& group = by_level[level];
        if (group.empty()) {
            warn << "warning: empty group " << level << " omitted\n";
            continue;
        }
        const auto path = out_dir / ((grouping == Grouping::Delay ? "delay_" : "app_") + level + ".csv");
        std::ofstream out(path);
        if (!out) throw ConfigError("plotdata: cannot write " + path.string());
        out << "app,technique,mode,backend,delay_us,n,mean_makespan_s,std_makespan_s\n";
        for (const auto& a : group) {
            out << a.app << ',' << a.technique << ',' << a.mode << ',' << a.backend << ','
                << format_double(a.delay_us) << ',' << a.count << ',' << format_double(a.mean_makespan_s) << ','
                << format_double(a.std_makespan_s) << '\n';
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace dls
