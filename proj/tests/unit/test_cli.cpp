#include "dcsim/cli.hpp"
#include "dcsim/metrics.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace dcsim;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string cfg_path() {
    return test::reference_config_path().string();
}

std::string traces_path() {
    return test::reference_traces_dir().string();
}

} // namespace

TEST_CASE("validate exit codes") {
    const Result ok = run_cli({"validate", "--config", cfg_path()});
    CHECK(ok.code == 0);

    test::TempDir dir("validate");
    nlohmann::json j = nlohmann::json::parse(test::read_text(cfg_path()));
    j["cabinets"][0]["v_sfan"] = 0;
    j["cabinets"][1]["n_servers"] = 0;
    {
        std::ofstream f(dir / "bad.json");
        f << j.dump(2);
    }
    const Result bad = run_cli({"validate", "--config", (dir / "bad.json").string()});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("v_sfan_positive: ") != std::string::npos);
    CHECK(bad.out.find("n_servers_positive: ") != std::string::npos);

    {
        std::ofstream f(dir / "garbled.json");
        f << "{ nope";
    }
    CHECK(run_cli({"validate", "--config", (dir / "garbled.json").string()}).code == 1);
    CHECK(run_cli({"validate", "--config", (dir / "missing.json").string()}).code == 2);
    CHECK(run_cli({"validate"}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("run writes a 672-row log and is byte-identical across invocations") {
    test::TempDir a("run_a"), b("run_b");
    for (const auto* d : {&a, &b}) {
        const Result r = run_cli({"run", "--config", cfg_path(), "--traces", traces_path(), "--policy", "fixed:20",
                                  "--episode-days", "7", "--out", d->path().string()});
        REQUIRE(r.code == 0);
    }
    const std::string log = test::read_text(a / "kpi_log.csv");
    CHECK(count_lines(log) == 673);
    CHECK(log.rfind(std::string(kKpiLogHeader) + "\n", 0) == 0);
    CHECK(log == test::read_text(b / "kpi_log.csv"));
    CHECK(test::read_text(a / "summary.json") == test::read_text(b / "summary.json"));

    const auto summary = nlohmann::json::parse(test::read_text(a / "summary.json"));
    CHECK(summary["steps"] == 672);
    CHECK(summary["total_energy_kwh"].get<double>() > 0.0);
}

TEST_CASE("run with an external constant agent matches the fixed run") {
    test::TempDir fixed("ext_fixed"), ext("ext_ext");
    REQUIRE(run_cli({"run", "--config", cfg_path(), "--traces", traces_path(), "--policy", "fixed:20",
                     "--episode-days", "1", "--out", fixed.path().string()})
                .code == 0);
    std::string script;
    for (int i = 0; i < 96; ++i) {
        script += "{\"type\":\"act\",\"v\":[20]}\n";
    }
    script += "{\"type\":\"close\"}\n";
    const Result r = run_cli({"run", "--config", cfg_path(), "--traces", traces_path(), "--policy", "external",
                              "--episode-days", "1", "--out", ext.path().string()},
                             script);
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 97);
    CHECK(test::read_text(ext / "kpi_log.csv") == test::read_text(fixed / "kpi_log.csv"));
    CHECK(test::read_text(ext / "summary.json") == test::read_text(fixed / "summary.json"));
}

TEST_CASE("run argument errors") {
    test::TempDir d("run_err");
    CHECK(run_cli({"run", "--config", cfg_path(), "--traces", traces_path(), "--policy", "fixed:45", "--out",
                   d.path().string()})
              .code == 1);
    CHECK(run_cli({"run", "--config", cfg_path(), "--traces", traces_path(), "--policy", "magic", "--out",
                   d.path().string()})
              .code == 1);
    CHECK(run_cli({"run", "--config", cfg_path(), "--traces", traces_path(), "--episode-days", "40", "--out",
                   d.path().string()})
              .code == 1);
    CHECK(run_cli({"run", "--config", cfg_path(), "--traces", "/nonexistent", "--out", d.path().string()}).code ==
          2);
}

TEST_CASE("rbc run") {
    test::TempDir d("rbc");
    const Result r = run_cli(
        {"run", "--config", cfg_path(), "--traces", traces_path(), "--policy", "rbc", "--out", d.path().string()});
    REQUIRE(r.code == 0);
    CHECK(count_lines(test::read_text(d / "kpi_log.csv")) == 673);
}

TEST_CASE("sweep emits one row per setpoint") {
    const Result r = run_cli({"sweep", "--config", cfg_path(), "--traces", traces_path(), "--setpoints",
                              "16,18,20,22,24,26,28", "--episode-days", "1"});
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 8);
    CHECK(r.out.rfind("setpoint_c,total_energy_kwh,total_carbon_g,peak_hotspot_c\n", 0) == 0);
    CHECK(r.out.find("\n16,") != std::string::npos);
    CHECK(r.out.find("\n28,") != std::string::npos);
}

TEST_CASE("bench report shape") {
    const Result r = run_cli({"bench", "--config", cfg_path(), "--cpus", "100,1000", "--steps", "4", "--repeat", "2"});
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 3);
    CHECK(r.out.rfind("cpus,cabinets,repeats,init_mean_ms,init_std_ms,", 0) == 0);
    CHECK(r.out.find("\n100,10,2,") != std::string::npos);
    CHECK(r.out.find("\n1000,100,2,") != std::string::npos);
}

TEST_CASE("heatmap export") {
    test::TempDir d("heat");
    const Result r = run_cli({"heatmap", "--config", cfg_path(), "--setpoint", "20", "--load", "0.5", "--out",
                              (d / "field.csv").string()});
    REQUIRE(r.code == 0);
    const TemperatureField f = parse_temperature_field(test::read_text(d / "field.csv"));
    REQUIRE(f.points.size() == 10);
    double m = -1e300;
    for (const auto& p : f.points) {
        m = std::max({m, p.t_inlet, p.t_outlet});
    }
    std::string num;
    append_number(num, m);
    CHECK(r.out == "hotspot_c " + num + "\n");

    const Result to_stdout = run_cli({"heatmap", "--config", cfg_path(), "--setpoint", "20", "--load", "0.5"});
    CHECK(to_stdout.out == test::read_text(d / "field.csv"));
    CHECK(run_cli({"heatmap", "--config", cfg_path(), "--setpoint", "20", "--load", "1.5"}).code == 1);
}

TEST_CASE("heatmap inlets shift exactly with the setpoint") {
    const double delta = 2.5;
    const auto lo = parse_temperature_field(
        run_cli({"heatmap", "--config", cfg_path(), "--setpoint", "18", "--load", "0.4"}).out);
    const auto hi = parse_temperature_field(
        run_cli({"heatmap", "--config", cfg_path(), "--setpoint", "20.5", "--load", "0.4"}).out);
    REQUIRE(lo.points.size() == hi.points.size());
    for (std::size_t i = 0; i < lo.points.size(); ++i) {
        CHECK(hi.points[i].t_inlet - lo.points[i].t_inlet == doctest::Approx(delta).epsilon(1e-13));
        CHECK(hi.points[i].t_inlet > lo.points[i].t_inlet);
    }
}

TEST_CASE("heatmap at zero load: outlet rise comes from idle power only") {
    const DataCenterConfig cfg = test::reference_config();
    const double sp = 19.0;
    const auto f = parse_temperature_field(
        run_cli({"heatmap", "--config", cfg_path(), "--setpoint", "19", "--load", "0"}).out);
    REQUIRE(f.points.size() == cfg.cabinets.size());
    for (const auto& c : cfg.cabinets) {
        const ServerModel* m = nullptr;
        for (const auto& sm : cfg.server_models) {
            if (sm.id == c.server_model_id) {
                m = &sm;
            }
        }
        REQUIRE(m != nullptr);
        const double t_in = sp + c.dt_supply;
        double cpu = m->cpu_curve.c0 + m->cpu_curve.c1 * t_in;
        cpu = cpu < m->p_cpu_min ? m->p_cpu_min : (cpu > m->p_cpu_max ? m->p_cpu_max : cpu);
        double fan = m->itfan_curve.c0 + m->itfan_curve.c1 * t_in;
        fan = fan < m->p_fan_min ? m->p_fan_min : (fan > m->p_fan_max ? m->p_fan_max : fan);
        const double rise = c.n_servers * (cpu + fan) / (cfg.hvac.c_air * cfg.hvac.rho_air * c.v_sfan);
        const auto it = std::find_if(f.points.begin(), f.points.end(), [&](const FieldPoint& p) {
            return p.row == c.row && p.position == c.position;
        });
        REQUIRE(it != f.points.end());
        CHECK(it->t_inlet == doctest::Approx(t_in).epsilon(1e-15));
        CHECK(it->t_outlet - it->t_inlet == doctest::Approx(rise).epsilon(1e-12));
    }
}
