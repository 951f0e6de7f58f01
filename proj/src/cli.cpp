#include "dcsim/cli.hpp"

#include "dcsim/control.hpp"
#include "dcsim/env.hpp"
#include "dcsim/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dcsim::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct CommonOptions {
    std::string config;
    bool lenient = false;
};

struct RunOptions {
    std::string traces;
    std::string policy = "rbc";
    int episode_days = 7;
    std::string out_dir;
    std::string start;
    RewardWeights weights;
    double hotspot_limit = 30.0;
    std::uint64_t seed = 0;
    RbcParams rbc;
};

struct SweepOptions {
    std::string traces;
    std::vector<double> setpoints;
    int episode_days = 7;
    std::string out_file;
};

struct BenchOptions {
    std::vector<long long> cpus{100, 1000, 10000, 100000};
    int steps = 672;
    int repeat = 10;
    int servers_per_cabinet = 10;
    std::string out_file;
};

struct HeatmapOptions {
    double setpoint = 20.0;
    double load = 0.5;
    std::string out_file;
};

DataCenterConfig load(const CommonOptions& c) {
    return load_config(c.config, ParseOptions{c.lenient});
}

std::size_t episode_steps_for(int days, const DataCenterConfig& dc) {
    if (days < 1) {
        throw RangeError("--episode-days must be ≥ 1");
    }
    return static_cast<std::size_t>(days) * steps_per_day(dc.timestep_minutes);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    f << text;
    if (!f) {
        throw IoError("error writing '" + path.string() + "'");
    }
}

/// Writes to path, or to out when path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        write_text(path, text);
    }
}

EpisodeSummary summarize(const std::vector<KpiRow>& rows) {
    if (rows.empty()) {
        EpisodeSummary s;
        s.steps = 0;
        s.complete = false;
        return s;
    }
    std::vector<KpiRecord> records;
    records.reserve(rows.size());
    for (const auto& r : rows) {
        KpiRecord k;
        k.step_index = r.step;
        k.energy_kwh = r.energy_kwh;
        k.carbon_g = r.carbon_g;
        k.hotspot_c = r.hotspot_c;
        records.push_back(k);
    }
    return episode_kpis(records);
}

std::string summary_json(const EpisodeSummary& s) {
    nlohmann::ordered_json j;
    j["total_energy_kwh"] = s.total_energy_kwh;
    j["total_carbon_g"] = s.total_carbon_g;
    j["peak_hotspot_c"] = s.peak_hotspot_c;
    j["steps"] = s.steps;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

int cmd_validate(const CommonOptions& common, std::ostream& out, std::ostream& err) {
    std::ifstream f(common.config, std::ios::binary);
    if (!f) {
        err << "error: cannot open '" << common.config << "'\n";
        return kExitIo;
    }
    std::ostringstream text;
    text << f.rdbuf();
    const DataCenterConfig cfg = parse_config_unchecked(text.str(), ParseOptions{common.lenient});
    const auto violations = validate_config(cfg);
    for (const auto& v : violations) {
        out << v.code << ": " << v.message << '\n';
    }
    if (!violations.empty()) {
        return kExitFailure;
    }
    out << "ok: " << cfg.cabinets.size() << " cabinets, " << cfg.total_servers() << " servers\n";
    return kExitOk;
}

int cmd_run(const CommonOptions& common, const RunOptions& opt, std::istream& in, std::ostream& out,
            std::ostream& err) {
    EnvConfig ec;
    ec.dc = load(common);
    ec.traces = load_trace_dir(opt.traces, std::chrono::minutes{ec.dc.timestep_minutes});
    ec.episode_steps = episode_steps_for(opt.episode_days, ec.dc);
    ec.reward_weights = opt.weights;
    ec.hotspot_limit_c = opt.hotspot_limit;
    ec.seed = opt.seed;

    std::optional<Instant> start;
    if (!opt.start.empty()) {
        start = parse_rfc3339(opt.start);
    }

    const fs::path out_dir = opt.out_dir;
    ensure_dir(out_dir);

    Environment env(std::move(ec));
    std::vector<KpiRow> rows;
    rows.reserve(env.episode_steps());
    EpisodeSummary summary;
    if (opt.policy == "external") {
        if (start) {
            throw ValidationError("--start is not used with --policy external; send {\"type\":\"reset\",\"start\":...}");
        }
        serve_external_agent(env, in, out, &rows);
        summary = summarize(rows);
    } else if (opt.policy == "rbc") {
        RbcController rbc(opt.rbc, env.config().dc.hvac);
        summary = run_episode(env, rbc, &rows, start);
    } else if (opt.policy.rfind("fixed:", 0) == 0) {
        const std::string value = opt.policy.substr(6);
        double sp = 0.0;
        std::size_t used = 0;
        try {
            sp = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size()) {
            throw ValidationError("--policy fixed:<setpoint> needs a number, got '" + value + "'");
        }
        FixedPolicy policy = fixed_policy(sp, env.config().dc.hvac);
        summary = run_episode(env, policy, &rows, start);
    } else {
        throw ValidationError("--policy must be fixed:<c>, rbc or external");
    }

    std::ostringstream log;
    write_kpi_log(log, rows);
    write_text(out_dir / "kpi_log.csv", log.str());
    write_text(out_dir / "summary.json", summary_json(summary));
    err << "run: " << rows.size() << " steps, " << summary.total_energy_kwh << " kWh, " << summary.total_carbon_g
        << " gCO2";
    if (env.clamp_count() > 0) {
        err << ", " << env.clamp_count() << " setpoints clamped";
    }
    if (env.negative_cooling_count() > 0) {
        err << ", " << env.negative_cooling_count() << " negative cooling loads clamped";
    }
    err << '\n';
    return kExitOk;
}

int cmd_sweep(const CommonOptions& common, const SweepOptions& opt, std::ostream& out) {
    EnvConfig ec;
    ec.dc = load(common);
    ec.traces = load_trace_dir(opt.traces, std::chrono::minutes{ec.dc.timestep_minutes});
    ec.episode_steps = episode_steps_for(opt.episode_days, ec.dc);
    for (double sp : opt.setpoints) {
        fixed_policy(sp, ec.dc.hvac);
    }
    Environment env(std::move(ec));
    const auto rows = sweep_setpoints(env, opt.setpoints);

    std::string csv = "setpoint_c,total_energy_kwh,total_carbon_g,peak_hotspot_c\n";
    for (const auto& r : rows) {
        append_number(csv, r.setpoint_c);
        csv += ',';
        append_number(csv, r.summary.total_energy_kwh);
        csv += ',';
        append_number(csv, r.summary.total_carbon_g);
        csv += ',';
        append_number(csv, r.summary.peak_hotspot_c);
        csv += '\n';
    }
    emit(opt.out_file, csv, out);
    return kExitOk;
}

struct Stat {
    std::vector<double> samples;
    double mean() const {
        return samples.empty() ? 0.0 : std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
    }
    double stddev() const {
        if (samples.size() < 2) {
            return 0.0;
        }
        const double m = mean();
        double ss = 0.0;
        for (double x : samples) {
            ss += (x - m) * (x - m);
        }
        return std::sqrt(ss / static_cast<double>(samples.size() - 1));
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Constant exogenous inputs spanning the benchmark horizon.
TraceSet synthetic_traces(int timestep_minutes, std::size_t steps) {
    const Instant start = parse_rfc3339("2023-01-01T00:00:00Z");
    const Instant end = start + std::chrono::minutes{timestep_minutes} * static_cast<long long>(steps + 1);
    auto flat = [&](double v, TraceUnit u) {
        TimeSeries ts;
        ts.unit = u;
        ts.timestamps = {start, end};
        ts.values = {v, v};
        return ts;
    };
    return make_trace_set(flat(0.5, TraceUnit::Fraction), flat(25.0, TraceUnit::Celsius),
                          flat(400.0, TraceUnit::GramsPerKwh), std::chrono::minutes{timestep_minutes});
}

int cmd_bench(const CommonOptions& common, const BenchOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.steps < 1 || opt.repeat < 1) {
        throw RangeError("--steps and --repeat must be ≥ 1");
    }
    const DataCenterConfig tmpl = load(common);
    const auto steps = static_cast<std::size_t>(opt.steps);
    const TraceSet traces = synthetic_traces(tmpl.timestep_minutes, steps);
    const double mid = 0.5 * (tmpl.hvac.setpoint_min + tmpl.hvac.setpoint_max);
    const ItInputs it_in{mid, 0.5};

    std::string csv =
        "cpus,cabinets,repeats,init_mean_ms,init_std_ms,reset_mean_us,reset_std_us,step_mean_us,step_std_us,"
        "episode_mean_ms,episode_std_ms,it_kernel_mean_us,it_kernel_std_us,it_vectorized_mean_us,"
        "it_vectorized_std_us,it_naive_mean_us,it_naive_std_us\n";
    for (long long cpus : opt.cpus) {
        const DataCenterConfig dc = scale_config(tmpl, cpus, opt.servers_per_cabinet);
        Stat init, reset, step, episode, kern, vec, naive;
        double sink = 0.0;
        // Repeat 0 is warm-up and discarded.
        for (int r = 0; r <= opt.repeat; ++r) {
            EnvConfig ec;
            ec.dc = dc;
            ec.traces = traces;
            ec.episode_steps = steps;

            auto t0 = Clock::now();
            Environment env(std::move(ec));
            const double t_init = seconds_since(t0);

            const auto t1 = Clock::now();
            env.reset();
            const auto t2 = Clock::now();
            bool truncated = false;
            while (!truncated) {
                const StepOutcome o = env.step({mid});
                sink += o.reward;
                truncated = o.truncated;
            }
            const auto t3 = Clock::now();

            const ItKernel kernel(dc);
            ThermalState state(kernel.size());
            t0 = Clock::now();
            for (std::size_t s = 0; s < steps; ++s) {
                kernel.evaluate(it_in, state);
                sink += state.p_datacenter;
            }
            const double t_kern = seconds_since(t0) / static_cast<double>(steps);
            t0 = Clock::now();
            for (std::size_t s = 0; s < steps; ++s) {
                sink += step_it_room(dc, it_in).p_datacenter;
            }
            const double t_vec = seconds_since(t0) / static_cast<double>(steps);
            t0 = Clock::now();
            for (std::size_t s = 0; s < steps; ++s) {
                sink += step_it_room_naive(dc, it_in).p_datacenter;
            }
            const double t_naive = seconds_since(t0) / static_cast<double>(steps);

            if (r == 0) {
                continue;
            }
            using secs = std::chrono::duration<double>;
            init.samples.push_back(t_init * 1e3);
            reset.samples.push_back(secs(t2 - t1).count() * 1e6);
            step.samples.push_back(secs(t3 - t2).count() * 1e6 / static_cast<double>(steps));
            episode.samples.push_back(secs(t3 - t1).count() * 1e3);
            kern.samples.push_back(t_kern * 1e6);
            vec.samples.push_back(t_vec * 1e6);
            naive.samples.push_back(t_naive * 1e6);
        }
        csv += std::to_string(cpus) + ',' + std::to_string(dc.cabinets.size()) + ',' + std::to_string(opt.repeat);
        for (const Stat* s : {&init, &reset, &step, &episode, &kern, &vec, &naive}) {
            csv += ',';
            append_number(csv, s->mean());
            csv += ',';
            append_number(csv, s->stddev());
        }
        csv += '\n';
        err << "bench: " << cpus << " cpus, step " << step.mean() << " us (checksum " << sink << ")\n";
    }
    emit(opt.out_file, csv, out);
    return kExitOk;
}

int cmd_heatmap(const CommonOptions& common, const HeatmapOptions& opt, std::ostream& out) {
    const DataCenterConfig dc = load(common);
    const ThermalState thermal = step_it_room(dc, {opt.setpoint, opt.load});
    const TemperatureField field = temperature_field(dc, thermal);
    emit(opt.out_file, temperature_field_csv(field), out);
    if (!opt.out_file.empty() && opt.out_file != "-") {
        std::string line = "hotspot_c ";
        append_number(line, field.max());
        out << line << '\n';
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Data-center thermal and energy simulation engine"};
    app.name("dcsim");
    app.require_subcommand(1);

    CommonOptions common;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Data-center config JSON")->required();
        sub->add_flag("--lenient", common.lenient, "Ignore unknown config keys");
    };

    auto* validate = app.add_subcommand("validate", "Check a config and list every violated invariant");
    add_config(validate);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "Run one episode and write kpi_log.csv and summary.json");
    add_config(run_cmd);
    run_cmd->add_option("--traces", run_opt.traces, "Directory with workload, ambient and carbon CSVs")->required();
    run_cmd->add_option("--policy", run_opt.policy, "fixed:<degC> | rbc | external")->capture_default_str();
    run_cmd->add_option("--episode-days", run_opt.episode_days, "Episode length in days (7, 30 or any N)")
        ->capture_default_str();
    run_cmd->add_option("--out", run_opt.out_dir, "Output directory")->required();
    run_cmd->add_option("--start", run_opt.start, "Episode start, RFC 3339 (default: trace grid start)");
    run_cmd->add_option("--w-energy", run_opt.weights.energy, "Reward weight per kWh")->capture_default_str();
    run_cmd->add_option("--w-carbon", run_opt.weights.carbon, "Reward weight per kgCO2")->capture_default_str();
    run_cmd->add_option("--w-hotspot", run_opt.weights.hotspot_penalty, "Reward weight per K over the limit")
        ->capture_default_str();
    run_cmd->add_option("--hotspot-limit", run_opt.hotspot_limit, "Hotspot limit, degC")->capture_default_str();
    run_cmd->add_option("--seed", run_opt.seed, "Observation-noise seed")->capture_default_str();
    run_cmd->add_option("--rbc-target", run_opt.rbc.target_return_c, "RBC target return, degC")
        ->capture_default_str();
    run_cmd->add_option("--rbc-deadband", run_opt.rbc.deadband_c, "RBC deadband, K")->capture_default_str();
    run_cmd->add_option("--rbc-trim", run_opt.rbc.trim_step_c, "RBC trim step, K")->capture_default_str();
    run_cmd->add_option("--rbc-respond", run_opt.rbc.respond_step_c, "RBC respond step, K")->capture_default_str();
    run_cmd->add_option("--rbc-initial", run_opt.rbc.initial_setpoint_c, "RBC initial setpoint, degC")
        ->capture_default_str();

    SweepOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "One fixed-setpoint episode per listed setpoint");
    add_config(sweep);
    sweep->add_option("--traces", sweep_opt.traces, "Trace directory")->required();
    sweep->add_option("--setpoints", sweep_opt.setpoints, "Comma-separated setpoints, degC")
        ->required()
        ->delimiter(',');
    sweep->add_option("--episode-days", sweep_opt.episode_days, "Episode length in days")->capture_default_str();
    sweep->add_option("--out", sweep_opt.out_file, "Output CSV (default stdout)");

    BenchOptions bench_opt;
    auto* bench = app.add_subcommand("bench", "Time init/reset/step/episode while scaling the CPU count");
    add_config(bench);
    bench->add_option("--cpus", bench_opt.cpus, "Comma-separated CPU counts")->delimiter(',')->capture_default_str();
    bench->add_option("--steps", bench_opt.steps, "Steps per episode")->capture_default_str();
    bench->add_option("--repeat", bench_opt.repeat, "Timed repeats (one extra warm-up is discarded)")
        ->capture_default_str();
    bench->add_option("--servers-per-cabinet", bench_opt.servers_per_cabinet,
                      "Servers per cabinet when tiling the template")
        ->capture_default_str();
    bench->add_option("--out", bench_opt.out_file, "Output CSV (default stdout)");

    HeatmapOptions heat_opt;
    auto* heatmap = app.add_subcommand("heatmap", "Export the per-cabinet inlet/outlet temperature field");
    add_config(heatmap);
    heatmap->add_option("--setpoint", heat_opt.setpoint, "CRAC supply setpoint, degC")->required();
    heatmap->add_option("--load", heat_opt.load, "Workload fraction in [0, 1]")->required();
    heatmap->add_option("--out", heat_opt.out_file, "Output CSV (default stdout)");

    std::vector<const char*> argv;
    argv.push_back("dcsim");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitFailure;
    }

    try {
        if (validate->parsed()) {
            return cmd_validate(common, out, err);
        }
        if (run_cmd->parsed()) {
            return cmd_run(common, run_opt, in, out, err);
        }
        if (sweep->parsed()) {
            return cmd_sweep(common, sweep_opt, out);
        }
        if (bench->parsed()) {
            return cmd_bench(common, bench_opt, out, err);
        }
        if (heatmap->parsed()) {
            return cmd_heatmap(common, heat_opt, out);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

} // namespace dcsim::cli
