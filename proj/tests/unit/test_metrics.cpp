#include "dcsim/errors.hpp"
#include "dcsim/metrics.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <sstream>

using namespace dcsim;

namespace {

ThermalState flat_state(std::initializer_list<double> temps, double p_cpu_each, double p_fan_each) {
    ThermalState s(static_cast<Eigen::Index>(temps.size()));
    Eigen::Index i = 0;
    for (double t : temps) {
        s.t_inlet[i] = t - 1.0;
        s.t_outlet[i] = t;
        ++i;
    }
    s.p_cpu.setConstant(p_cpu_each);
    s.p_itfan.setConstant(p_fan_each);
    s.p_rack = s.p_cpu + s.p_itfan;
    s.p_datacenter = s.p_rack.sum();
    return s;
}

} // namespace

TEST_CASE("step KPIs from power, step length and carbon intensity") {
    ThermalState th = flat_state({21.0, 23.5, 26.0}, 20000.0, 5000.0);
    HvacState hv;
    hv.p_hvac_elec_total = 25000.0; // 3 * 25 kW IT + 25 kW HVAC = 100 kW
    const KpiRecord r = kpis_for_step(th, hv, 400.0, 15.0, 7);
    CHECK(r.step_index == 7);
    CHECK(r.p_it == 60000.0);
    CHECK(r.p_fan == 15000.0);
    CHECK(r.energy_kwh == 25.0);
    CHECK(r.carbon_g == 10000.0);
    CHECK(r.hotspot_c == 26.0);

    ThermalState zero = flat_state({20.0}, 0.0, 0.0);
    const KpiRecord z = kpis_for_step(zero, HvacState{}, 400.0, 15.0);
    CHECK(z.energy_kwh == 0.0);
    CHECK(z.carbon_g == 0.0);

    CHECK_THROWS_AS(kpis_for_step(th, hv, -1.0, 15.0), DomainError);
}

TEST_CASE("hotspot covers inlets as well as outlets") {
    ThermalState th = flat_state({21.0, 23.5, 26.0}, 0.0, 0.0);
    CHECK(hotspot(th) == 26.0);
    th.t_inlet[0] = 27.5; // inlet hotter than any outlet
    CHECK(hotspot(th) == 27.5);
}

TEST_CASE("episode summaries") {
    KpiRecord a, b, c;
    a.energy_kwh = 25.0;
    b.energy_kwh = 25.0;
    a.hotspot_c = 26.0;
    b.hotspot_c = 31.0;
    c.hotspot_c = 28.0;
    a.carbon_g = 1.5;
    const std::vector<KpiRecord> two{a, b};
    CHECK(episode_kpis(two).total_energy_kwh == 50.0);

    const std::vector<KpiRecord> three{a, b, c};
    const EpisodeSummary s = episode_kpis(three);
    CHECK(s.peak_hotspot_c == 31.0);
    CHECK(s.mean_hotspot_c == doctest::Approx(85.0 / 3.0).epsilon(1e-15));
    CHECK(s.steps == 3);

    const std::vector<KpiRecord> one{a};
    const EpisodeSummary s1 = episode_kpis(one);
    CHECK(s1.total_energy_kwh == a.energy_kwh);
    CHECK(s1.total_carbon_g == a.carbon_g);
    CHECK(s1.peak_hotspot_c == a.hotspot_c);
    CHECK(s1.mean_hotspot_c == a.hotspot_c);

    CHECK_THROWS_AS(episode_kpis({}), DomainError);
}

TEST_CASE("compensated sum absorbs small terms after a large one") {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) {
        s.add(1.0);
    }
    s.add(-1e16);
    CHECK(s.value() == 1000.0);
}

TEST_CASE("temperature field of the reference room") {
    const DataCenterConfig cfg = test::reference_config();
    const ThermalState th = step_it_room(cfg, {20.0, 0.5});
    const TemperatureField f = temperature_field(cfg, th);
    REQUIRE(f.points.size() == 10);
    for (std::size_t i = 1; i < f.points.size(); ++i) {
        const auto& p = f.points[i - 1];
        const auto& q = f.points[i];
        CHECK((p.row < q.row || (p.row == q.row && p.position < q.position)));
    }
    double m = -1e300;
    for (const auto& p : f.points) {
        m = std::max({m, p.t_inlet, p.t_outlet});
    }
    CHECK(f.max() == m);
    CHECK(f.max() == hotspot(th));
    CHECK_THROWS_AS(TemperatureField{}.max(), DomainError);

    const std::string csv = temperature_field_csv(f);
    CHECK(csv.rfind("row,position,t_inlet_c,t_outlet_c\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    CHECK(parse_temperature_field(csv).points == f.points);

    test::TempDir dir("field");
    export_temperature_field(f, dir / "field.csv");
    CHECK(test::read_text(dir / "field.csv") == csv);
    CHECK_THROWS_AS(export_temperature_field(f, dir / "missing_dir" / "field.csv"), IoError);
}

TEST_CASE("temperature field CSV parse errors") {
    CHECK_THROWS_AS(parse_temperature_field("row,pos\n"), ParseError);
    CHECK_THROWS_AS(parse_temperature_field("row,position,t_inlet_c,t_outlet_c\n0,1,abc,2\n"), ParseError);
}

TEST_CASE("KPI log uses the fixed header and round-trip numbers") {
    KpiRow r;
    r.step = 3;
    r.timestamp = parse_rfc3339("2023-07-01T00:45:00Z");
    r.setpoint_c = 0.1 + 0.2;
    r.energy_kwh = 25.0;
    std::ostringstream os;
    write_kpi_log(os, std::span<const KpiRow>(&r, 1));
    const std::string s = os.str();
    CHECK(s.rfind(std::string(kKpiLogHeader) + "\n", 0) == 0);
    CHECK(s.find("\n3,2023-07-01T00:45:00Z,0.30000000000000004,") != std::string::npos);
    std::string n;
    append_number(n, 25.0);
    CHECK(n == "25");
}

TEST_CASE("property: carbon is bilinear in energy and intensity") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        ThermalState th = flat_state({20.0, 25.0}, 1e5 * u(rng), 1e4 * u(rng));
        HvacState hv;
        hv.p_hvac_elec_total = 1e5 * u(rng);
        const double ci = 800.0 * u(rng);
        const double k = 0.25 + 4.0 * u(rng);
        const KpiRecord base = kpis_for_step(th, hv, ci, 15.0);
        CHECK(base.carbon_g == base.energy_kwh * ci);

        const KpiRecord ci_scaled = kpis_for_step(th, hv, k * ci, 15.0);
        CHECK(test::rel_diff(ci_scaled.carbon_g, k * base.carbon_g) < 1e-14);

        ThermalState th2 = th;
        th2.p_cpu *= k;
        th2.p_itfan *= k;
        HvacState hv2 = hv;
        hv2.p_hvac_elec_total *= k;
        const KpiRecord p_scaled = kpis_for_step(th2, hv2, ci, 15.0);
        CHECK(test::rel_diff(p_scaled.energy_kwh, k * base.energy_kwh) < 1e-14);
        CHECK(test::rel_diff(p_scaled.carbon_g, k * base.carbon_g) < 1e-14);
        CHECK(base.energy_kwh >= 0.0);
    }
}
