#include "dls/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>
#include <string>

namespace dls {

using nlohmann::json;

std::string_view to_string(Backend b) { return b == Backend::Sim ? "sim" : "native"; }

Backend parse_backend(std::string_view name) {
    std::string lower(name);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "sim") return Backend::Sim;
    if (lower == "native") return Backend::Native;
    throw ConfigError("unknown backend '" + std::string(name) + "'");
}

std::shared_ptr<const std::vector<double>> WorkloadDef::costs(std::uint64_t seed) const {
    switch (kind) {
        case Kind::Mandelbrot:
            return std::make_shared<const std::vector<double>>(mandelbrot_costs(mandelbrot, target_mean));
        case Kind::Synthetic: {
            auto c = synthetic;
            c.seed = seed;
            return std::make_shared<const std::vector<double>>(synthetic_costs(c, iterations));
        }
        case Kind::Trace:
            return std::make_shared<const std::vector<double>>(load_trace(trace_path));
    }
    throw InvariantViolation("unhandled workload kind");
}

std::int64_t WorkloadDef::total_iterations() const {
    switch (kind) {
        case Kind::Mandelbrot: return mandelbrot.iterations();
        case Kind::Synthetic: return iterations;
        case Kind::Trace: return static_cast<std::int64_t>(load_trace(trace_path).size());
    }
    return 0;
}

IterationFn WorkloadDef::native_body(std::uint64_t seed, double time_scale) const {
    if (kind == Kind::Mandelbrot) {
        auto cfg = mandelbrot;
        // Results land in a per-iteration cell so the kernel is not optimized away.
        auto sink = std::make_shared<std::vector<std::int64_t>>(static_cast<std::size_t>(cfg.iterations()));
        return [cfg, sink](std::int64_t i) {
            (*sink)[static_cast<std::size_t>(i)] = mandelbrot_iterations(i, cfg).escape_count;
        };
    }
    auto c = costs(seed);
    return [c, time_scale](std::int64_t i) {
        spin_for(std::chrono::nanoseconds(
            static_cast<std::int64_t>((*c)[static_cast<std::size_t>(i)] * time_scale * 1e9)));
    };
}

const WorkloadDef& ExperimentConfig::workload(const std::string& app) const {
    const auto it = workloads.find(app);
    if (it == workloads.end()) throw ConfigError("plan.apps: unknown workload '" + app + "'");
    return it->second;
}

std::string ExperimentConfig::default_app() const {
    if (workloads.size() != 1) {
        throw ConfigError("workload: expected exactly one workload, found " + std::to_string(workloads.size()));
    }
    return workloads.begin()->first;
}

namespace {

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(section + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(section + "." + key + ": unknown key");
        }
    }
}

template <typename T>
T get(const json& obj, const std::string& section, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(section + "." + key + ": wrong type");
    }
}

template <typename T, typename Parse>
std::vector<T> get_list(const json& obj, const std::string& section, const char* key, Parse parse) {
    std::vector<T> out;
    if (!obj.contains(key)) return out;
    const auto& arr = obj.at(key);
    if (!arr.is_array()) throw ConfigError(section + "." + key + ": expected an array");
    for (const auto& v : arr) {
        try {
            out.push_back(parse(v));
        } catch (const ConfigError& e) {
            throw ConfigError(section + "." + key + ": " + e.what());
        } catch (const json::exception&) {
            throw ConfigError(section + "." + key + ": wrong element type");
        }
    }
    return out;
}

WorkloadDef parse_workload(const json& w, const std::string& section) {
    WorkloadDef def;
    if (!w.is_object() || !w.contains("kind")) throw ConfigError(section + ".kind: missing");
    const auto kind = get<std::string>(w, section, "kind", "");
    if (kind == "mandelbrot") {
        check_keys(w, section, {"kind", "width", "threshold", "x_min", "x_max", "y_min", "y_max", "target_mean"});
        def.kind = WorkloadDef::Kind::Mandelbrot;
        auto& m = def.mandelbrot;
        m.width = get<std::int64_t>(w, section, "width", m.width);
        m.threshold = get<std::int64_t>(w, section, "threshold", m.threshold);
        m.x_min = get<double>(w, section, "x_min", m.x_min);
        m.x_max = get<double>(w, section, "x_max", m.x_max);
        m.y_min = get<double>(w, section, "y_min", m.y_min);
        m.y_max = get<double>(w, section, "y_max", m.y_max);
        def.target_mean = get<double>(w, section, "target_mean", def.target_mean);
        m.validate();
    } else if (kind == "synthetic") {
        check_keys(w, section, {"kind", "distribution", "mean", "cov", "iterations", "seed"});
        def.kind = WorkloadDef::Kind::Synthetic;
        auto& s = def.synthetic;
        try {
            s.distribution = parse_distribution(get<std::string>(w, section, "distribution", "lognormal"));
        } catch (const ConfigError& e) {
            throw ConfigError(section + ".distribution: " + e.what());
        }
        s.mean = get<double>(w, section, "mean", s.mean);
        s.cov = get<double>(w, section, "cov", s.cov);
        s.seed = get<std::uint64_t>(w, section, "seed", s.seed);
        def.iterations = get<std::int64_t>(w, section, "iterations", 0);
        if (def.iterations < 1) throw ConfigError(section + ".iterations: must be >= 1");
        s.validate();
    } else if (kind == "trace") {
        check_keys(w, section, {"kind", "path"});
        def.kind = WorkloadDef::Kind::Trace;
        def.trace_path = get<std::string>(w, section, "path", "");
        if (def.trace_path.empty()) throw ConfigError(section + ".path: missing");
    } else {
        throw ConfigError(section + ".kind: unknown workload kind '" + kind + "'");
    }
    return def;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(doc, "config", {"loop", "technique", "mode", "workload", "sim", "plan"});
    ExperimentConfig cfg;

    if (doc.contains("loop")) {
        const auto& l = doc["loop"];
        check_keys(l, "loop", {"num_pes", "min_chunk"});
        cfg.loop.num_pes = get<std::int64_t>(l, "loop", "num_pes", cfg.loop.num_pes);
        cfg.loop.min_chunk = get<std::int64_t>(l, "loop", "min_chunk", cfg.loop.min_chunk);
        if (cfg.loop.num_pes < 1) throw ConfigError("loop.num_pes: must be >= 1");
        if (cfg.loop.min_chunk < 1) throw ConfigError("loop.min_chunk: must be >= 1");
    }

    if (doc.contains("technique")) {
        const auto& t = doc["technique"];
        const std::string s = "technique";
        check_keys(t, s, {"name", "h", "sigma", "mu", "alpha", "batches", "swr", "seed", "viss_first_chunk", "probe_swr"});
        auto& spec = cfg.technique;
        if (t.contains("name")) {
            try {
                spec.technique = parse_technique(get<std::string>(t, s, "name", ""));
            } catch (const ConfigError& e) {
                throw ConfigError("technique.name: " + std::string(e.what()));
            }
            cfg.technique_named = true;
        }
        spec.h = get<double>(t, s, "h", spec.h);
        spec.sigma = get<double>(t, s, "sigma", spec.sigma);
        spec.mu = get<double>(t, s, "mu", spec.mu);
        spec.alpha = get<double>(t, s, "alpha", spec.alpha);
        spec.batches = get<std::int64_t>(t, s, "batches", spec.batches);
        spec.swr = get<double>(t, s, "swr", spec.swr);
        spec.rng_seed = get<std::uint64_t>(t, s, "seed", spec.rng_seed);
        if (t.contains("viss_first_chunk")) spec.viss_first_chunk = get<std::int64_t>(t, s, "viss_first_chunk", 0);
        cfg.probe_swr = get<bool>(t, s, "probe_swr", false);
    }

    if (doc.contains("mode")) {
        try {
            cfg.mode = parse_mode(get<std::string>(doc, "config", "mode", ""));
        } catch (const ConfigError& e) {
            throw ConfigError("mode: " + std::string(e.what()));
        }
    }

    if (doc.contains("workload")) {
        const auto& w = doc["workload"];
        if (!w.is_object()) throw ConfigError("workload: expected an object of named workloads");
        for (const auto& [name, def] : w.items()) cfg.workloads[name] = parse_workload(def, "workload." + name);
    }

    if (doc.contains("sim")) {
        const auto& m = doc["sim"];
        const std::string s = "sim";
        check_keys(m, s, {"msg_latency_us", "assign_cost_us", "calc_delay_us", "dedicated_master", "cost_jitter",
                          "pe_speed_factors", "native_time_scale", "pin_threads"});
        auto& sim = cfg.sim;
        sim.msg_latency_us = get<double>(m, s, "msg_latency_us", sim.msg_latency_us);
        sim.assign_cost_us = get<double>(m, s, "assign_cost_us", sim.assign_cost_us);
        sim.calc_delay_us = get<double>(m, s, "calc_delay_us", sim.calc_delay_us);
        sim.dedicated_master = get<bool>(m, s, "dedicated_master", sim.dedicated_master);
        sim.cost_jitter = get<double>(m, s, "cost_jitter", sim.cost_jitter);
        sim.pe_speed_factors = get<std::vector<double>>(m, s, "pe_speed_factors", {});
        sim.native_time_scale = get<double>(m, s, "native_time_scale", sim.native_time_scale);
        sim.pin_threads = get<bool>(m, s, "pin_threads", sim.pin_threads);
        if (sim.msg_latency_us < 0 || sim.assign_cost_us < 0 || sim.calc_delay_us < 0 || sim.cost_jitter < 0 ||
            sim.native_time_scale < 0) {
            throw ConfigError("sim: times and scales must be >= 0");
        }
    }

    if (doc.contains("plan")) {
        const auto& p = doc["plan"];
        const std::string s = "plan";
        check_keys(p, s, {"apps", "techniques", "modes", "delays_us", "backends", "repetitions"});
        auto& plan = cfg.plan;
        plan.apps = get_list<std::string>(p, s, "apps", [](const json& v) { return v.get<std::string>(); });
        plan.techniques = get_list<Technique>(p, s, "techniques",
                                              [](const json& v) { return parse_technique(v.get<std::string>()); });
        plan.modes = get_list<Mode>(p, s, "modes", [](const json& v) { return parse_mode(v.get<std::string>()); });
        plan.delays_us = get_list<double>(p, s, "delays_us", [](const json& v) {
            const double d = v.get<double>();
            if (d < 0) throw ConfigError("delays must be >= 0");
            return d;
        });
        plan.backends = get_list<Backend>(p, s, "backends",
                                          [](const json& v) { return parse_backend(v.get<std::string>()); });
        plan.repetitions = get<std::int64_t>(p, s, "repetitions", plan.repetitions);
        if (plan.repetitions < 1) throw ConfigError("plan.repetitions: must be >= 1");
        for (const auto& app : plan.apps) {
            if (!cfg.workloads.count(app)) throw ConfigError("plan.apps: unknown workload '" + app + "'");
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace dls
