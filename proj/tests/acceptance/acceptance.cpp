// Acceptance suite: one PASS/FAIL line per primary criterion.

#include "dcsim/cli.hpp"
#include "dcsim/control.hpp"
#include "dcsim/errors.hpp"
#include "dcsim/hvac.hpp"
#include "dcsim/itmodel.hpp"
#include "dcsim/metrics.hpp"

#include "test_support.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace dcsim;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

int g_failures = 0;

void report(const char* name, const std::function<Verdict()>& body) {
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass) {
        ++g_failures;
    }
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << name << ": " << v.detail << std::endl;
}

std::string fmt(double x, const char* spec = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

double max_rel(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        m = std::max(m, test::rel_diff(a[i], b[i]));
    }
    return m;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

EnvConfig reference_env(std::size_t steps) {
    EnvConfig c;
    c.dc = test::reference_config();
    c.traces = test::reference_traces();
    c.episode_steps = steps;
    return c;
}

// Splits CSV text into rows of cells (no quoting needed for our outputs).
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

class Replay final : public Controller {
public:
    explicit Replay(std::vector<double> a) : actions_(std::move(a)) {}
    Action decide(const Observation&) override { return {actions_.at(i_++)}; }

private:
    std::vector<double> actions_;
    std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------

Verdict oracle_equivalence() {
    Verdict v;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    long long max_cpus = 0;
    const int cases = 250;
    for (int i = 0; i < cases; ++i) {
        const DataCenterConfig cfg = test::random_config(rng, 100, 200);
        max_cpus = std::max(max_cpus, cfg.total_servers());
        const ItInputs in{15.0 + 15.0 * u(rng), u(rng)};
        const ThermalState a = step_it_room(cfg, in);
        const ThermalState b = step_it_room_naive(cfg, in);
        worst = std::max({worst, max_rel(a.t_inlet, b.t_inlet), max_rel(a.t_outlet, b.t_outlet),
                          max_rel(a.p_cpu, b.p_cpu), max_rel(a.p_itfan, b.p_itfan), max_rel(a.p_rack, b.p_rack),
                          test::rel_diff(a.p_datacenter, b.p_datacenter)});
        v.require(cfg.cabinets.size() <= 100 && cfg.total_servers() <= 20000, "case within K<=100, CPUs<=20000");
    }
    v.require(worst < 1e-10, "max relative error < 1e-10");
    v.note(std::to_string(cases) + " cases, max CPUs " + std::to_string(max_cpus) + ", max rel err " + fmt(worst));
    return v;
}

Verdict equation_identities() {
    Verdict v;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double eq1 = 0.0, eq2 = 0.0, eq3 = 0.0, eq4 = 0.0, eq5 = 0.0; // worst error per identity
    for (int trial = 0; trial < 200; ++trial) {
        const DataCenterConfig cfg = test::random_config(rng, 60, 100);
        const double sp = 15.0 + 10.0 * u(rng);
        const double delta = 5.0 * u(rng);
        const double load = u(rng);

        // Inlets shift uniformly with the setpoint.
        const Eigen::ArrayXd a = compute_inlet_temps(cfg, sp);
        const Eigen::ArrayXd b = compute_inlet_temps(cfg, sp + delta);
        eq1 = std::max(eq1, ((b - a) - delta).abs().maxCoeff());

        // Outlet rise times heat capacity rate equals rack power.
        const ThermalState th = step_it_room(cfg, {sp, load});
        for (Eigen::Index i = 0; i < th.size(); ++i) {
            const auto& c = cfg.cabinets[static_cast<std::size_t>(i)];
            const double expect = th.t_inlet[i] + th.p_rack[i] / (cfg.hvac.c_air * cfg.hvac.rho_air * c.v_sfan);
            eq2 = std::max(eq2, test::rel_diff(th.t_outlet[i], expect));
        }

        // Return temperature is the plain mean of return-adjusted outlets.
        double sum = 0.0;
        for (Eigen::Index i = 0; i < th.size(); ++i) {
            sum += cfg.cabinets[static_cast<std::size_t>(i)].dt_return + th.t_outlet[i];
        }
        const HvacState hs = step_hvac(cfg, th, sp, 10.0 + 30.0 * u(rng));
        eq3 = std::max(eq3, test::rel_diff(hs.t_crac_return, sum / static_cast<double>(th.size())));

        // Cooling load is linear in the temperature difference.
        const double dt = 0.5 + 10.0 * u(rng);
        const double k = 0.5 + 3.0 * u(rng);
        eq4 = std::max(eq4, test::rel_diff(cooling_load(cfg.hvac, sp + k * dt, sp), k * cooling_load(cfg.hvac, sp + dt, sp)));

        // Chiller over cooling ratio.
        if (hs.p_cool > 0.0) {
            eq5 = std::max(eq5, std::abs(hs.p_chiller / hs.p_cool - (1.0 + 1.0 / cfg.hvac.cop)));
        }
    }
    // Cubic fan law as a log-log slope.
    const HvacParams h = test::reference_config().hvac;
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        const double vflow = 0.01 * std::pow(1.2, i);
        x.push_back(std::log(vflow));
        y.push_back(std::log(cooling_tower_power(h, vflow)));
    }
    const double s7 = slope(x, y);

    v.require(eq1 <= 1e-12, "inlet shift within 1e-12 K");
    v.require(eq2 <= 1e-12, "outlet identity within 1e-12 relative");
    v.require(eq3 <= 1e-12, "return mean within 1e-12 relative");
    v.require(eq4 <= 1e-12, "cooling linearity within 1e-12 relative");
    v.require(eq5 <= 1e-12, "chiller ratio within 1e-12");
    v.require(std::abs(s7 - 3.0) <= 1e-9, "fan law slope 3 +- 1e-9");
    v.note("inlet shift " + fmt(eq1) + ", outlet " + fmt(eq2) + ", return mean " + fmt(eq3) + ", cooling " +
           fmt(eq4) + ", chiller ratio " + fmt(eq5) + ", fan law slope " + fmt(s7, "%.12f"));
    return v;
}

Verdict step_latency() {
    Verdict v;
    const EnvConfig base = reference_env(kEpisodeSteps30Days);

    const int inits = 20;
    double init_total = 0.0;
    for (int i = 0; i <= inits; ++i) {
        EnvConfig c = base;
        const auto t0 = Clock::now();
        Environment env(std::move(c));
        const double t = std::chrono::duration<double>(Clock::now() - t0).count();
        if (i > 0) {
            init_total += t;
        }
    }
    const double init_mean = init_total / inits;

    Environment env(base);
    const int resets = 200;
    double reset_total = 0.0;
    env.reset();
    for (int i = 0; i < resets; ++i) {
        const auto t0 = Clock::now();
        env.reset();
        reset_total += std::chrono::duration<double>(Clock::now() - t0).count();
    }
    const double reset_mean = reset_total / resets;

    const std::size_t target = 10000;
    std::size_t done = 0;
    double step_total = 0.0;
    double sink = 0.0;
    env.reset();
    while (done < target) {
        const auto t0 = Clock::now();
        const StepOutcome o = env.step({20.0});
        step_total += std::chrono::duration<double>(Clock::now() - t0).count();
        sink += o.reward;
        ++done;
        if (o.truncated) {
            env.reset();
        }
    }
    const double step_mean = step_total / static_cast<double>(target);
    v.require(step_mean < 1e-3, "mean step < 1 ms");
    v.require(reset_mean < init_mean, "reset mean < init mean");
    v.note("step mean " + fmt(step_mean * 1e6) + " us over " + std::to_string(target) + " steps, reset mean " +
           fmt(reset_mean * 1e6) + " us, init mean " + fmt(init_mean * 1e6) + " us" +
           (std::isfinite(sink) ? "" : " (non-finite reward)"));
    return v;
}

Verdict scaling_shape() {
    Verdict v;
    const CliResult r = run_cli({"bench", "--config", test::reference_config_path().string(), "--cpus",
                                 "100,1000,10000,100000", "--steps", "672", "--repeat", "5"});
    v.require(r.code == 0, "bench exits 0");
    const auto rows = csv_rows(r.out);
    v.require(rows.size() == 5, "4 data rows");
    if (!v.pass) {
        return v;
    }
    const auto& header = rows[0];
    auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    const std::size_t c_cpus = col("cpus"), c_step = col("step_mean_us"), c_kern = col("it_kernel_mean_us"),
                      c_vec = col("it_vectorized_mean_us"), c_naive = col("it_naive_mean_us");
    std::vector<double> x, y;
    std::string speedups;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double cpus = std::stod(rows[i][c_cpus]);
        x.push_back(std::log10(cpus));
        y.push_back(std::log10(std::stod(rows[i][c_step])));
        if (cpus >= 1e4) {
            const double naive = std::stod(rows[i][c_naive]);
            const double kern = naive / std::stod(rows[i][c_kern]);
            const double cold = naive / std::stod(rows[i][c_vec]);
            v.require(kern > 2.0, "vectorized speedup > 2x at " + rows[i][c_cpus] + " CPUs");
            speedups += ", speedup at " + rows[i][c_cpus] + " CPUs " + fmt(kern, "%.2f") + "x (incl. setup " +
                        fmt(cold, "%.2f") + "x)";
        }
    }
    const double s = slope(x, y);
    v.require(s >= 0.7 && s <= 1.3, "step-time log-log slope in [0.7, 1.3]");
    v.note("slope " + fmt(s, "%.3f") + speedups);
    return v;
}

Verdict episode_accounting() {
    Verdict v;
    for (int days : {7, 30}) {
        test::TempDir d("acc_ep");
        const CliResult r = run_cli({"run", "--config", test::reference_config_path().string(), "--traces",
                                     test::reference_traces_dir().string(), "--policy", "fixed:20", "--episode-days",
                                     std::to_string(days), "--out", d.path().string()});
        v.require(r.code == 0, "run exits 0");
        const std::size_t rows = count_lines(test::read_text(d / "kpi_log.csv")) - 1;
        const auto summary = nlohmann::json::parse(test::read_text(d / "summary.json"));
        const std::size_t want = days == 7 ? 672 : 2880;
        v.require(rows == want, std::to_string(days) + "-day run has " + std::to_string(want) + " rows");
        v.require(summary["steps"].get<std::size_t>() == want, "summary step count");
        v.note(std::to_string(days) + " days -> " + std::to_string(rows) + " steps");
    }
    return v;
}

Verdict determinism() {
    Verdict v;
    test::TempDir a("acc_det_a"), b("acc_det_b");
    for (const auto* d : {&a, &b}) {
        const CliResult r = run_cli({"run", "--config", test::reference_config_path().string(), "--traces",
                                     test::reference_traces_dir().string(), "--policy", "rbc", "--episode-days", "7",
                                     "--out", d->path().string()});
        v.require(r.code == 0, "run exits 0");
    }
    const std::string la = test::read_text(a / "kpi_log.csv");
    v.require(!la.empty() && la == test::read_text(b / "kpi_log.csv"), "KPI CSVs byte-identical");

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> sp(14.0, 31.0);
    std::vector<double> actions(kEpisodeSteps7Days);
    std::string script;
    for (double& x : actions) {
        x = sp(rng);
        script += nlohmann::json{{"type", "act"}, {"v", {x}}}.dump() + "\n";
    }
    script += "{\"type\":\"close\"}\n";

    Environment e1(reference_env(kEpisodeSteps7Days));
    Replay replay(actions);
    const EpisodeSummary s1 = run_episode(e1, replay);

    Environment e2(reference_env(kEpisodeSteps7Days));
    std::istringstream in(script);
    std::ostringstream out;
    const auto s2 = serve_external_agent(e2, in, out);
    v.require(s2.size() == 1, "one wire episode");
    if (s2.size() == 1) {
        v.require(s1.total_energy_kwh == s2[0].total_energy_kwh && s1.total_carbon_g == s2[0].total_carbon_g &&
                      s1.peak_hotspot_c == s2[0].peak_hotspot_c,
                  "wire and in-process totals identical");
        v.note("CLI logs identical (" + std::to_string(count_lines(la)) + " lines), wire energy " +
               fmt(s2[0].total_energy_kwh, "%.17g") + " kWh = in-process " + fmt(s1.total_energy_kwh, "%.17g"));
    }
    return v;
}

Verdict controller_comparison() {
    Verdict v;
    Environment env(reference_env(kEpisodeSteps7Days));
    RbcController rbc(RbcParams{}, env.config().dc.hvac);
    const EpisodeSummary r = run_episode(env, rbc);
    v.require(r.steps == kEpisodeSteps7Days && r.complete, "RBC episode completes");

    const std::vector<double> sps{16, 18, 20, 22, 24, 26, 28};
    const auto rows = sweep_setpoints(env, sps);
    v.require(rows.size() == sps.size(), "sweep completes");
    double lo = 1e300, hi = 0.0;
    for (const auto& row : rows) {
        v.require(row.summary.steps == kEpisodeSteps7Days, "sweep episode length");
        lo = std::min(lo, row.summary.total_energy_kwh);
        hi = std::max(hi, row.summary.total_energy_kwh);
    }
    v.require(hi / lo > 1.0 + 1e-6, "sweep energy ratio > 1 + 1e-6");
    v.note("RBC " + fmt(r.total_energy_kwh, "%.1f") + " kWh; sweep " + fmt(lo, "%.1f") + ".." + fmt(hi, "%.1f") +
           " kWh, ratio " + fmt(hi / lo, "%.6f"));
    return v;
}

Verdict hotspot_export() {
    Verdict v;
    test::TempDir d("acc_heat");
    const std::string cfg = test::reference_config_path().string();
    const CliResult r = run_cli({"heatmap", "--config", cfg, "--setpoint", "20", "--load", "0.6", "--out",
                                 (d / "field.csv").string()});
    v.require(r.code == 0, "heatmap exits 0");
    const std::string text = test::read_text(d / "field.csv");
    const TemperatureField f = parse_temperature_field(text);
    v.require(f.points.size() == 10 && count_lines(text) == 11, "10 data rows");

    double m = -1e300;
    for (const auto& p : f.points) {
        m = std::max({m, p.t_inlet, p.t_outlet});
    }
    const DataCenterConfig dc = test::reference_config();
    const double hs = hotspot(step_it_room(dc, {20.0, 0.6}));
    v.require(hs == m, "hotspot equals max exported temperature");

    const double delta = 1.75;
    const auto lo = parse_temperature_field(run_cli({"heatmap", "--config", cfg, "--setpoint", "20", "--load", "0.6"}).out);
    const auto hi =
        parse_temperature_field(run_cli({"heatmap", "--config", cfg, "--setpoint", "21.75", "--load", "0.6"}).out);
    double worst = 0.0;
    bool strictly = lo.points.size() == hi.points.size() && !lo.points.empty();
    for (std::size_t i = 0; strictly && i < lo.points.size(); ++i) {
        worst = std::max(worst, std::abs((hi.points[i].t_inlet - lo.points[i].t_inlet) - delta));
        strictly = strictly && hi.points[i].t_inlet > lo.points[i].t_inlet;
    }
    v.require(strictly && worst <= 1e-12, "every inlet shifts by delta");
    v.note("10 rows, hotspot " + fmt(hs, "%.6f") + " C, inlet shift error " + fmt(worst));
    return v;
}

} // namespace

int main() {
    report("oracle equivalence", oracle_equivalence);
    report("equation identities", equation_identities);
    report("step latency", step_latency);
    report("scaling shape", scaling_shape);
    report("episode accounting", episode_accounting);
    report("determinism", determinism);
    report("controller comparison structure", controller_comparison);
    report("hotspot export", hotspot_export);
    std::cout << (g_failures == 0 ? "all primary criteria passed" : std::to_string(g_failures) + " criteria failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
