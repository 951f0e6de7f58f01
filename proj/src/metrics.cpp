#include "dcsim/metrics.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

namespace dcsim {

void append_number(std::string& out, double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
}

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double TemperatureField::max() const {
    if (points.empty()) {
        throw DomainError("temperature field is empty");
    }
    double m = points.front().t_inlet;
    for (const auto& p : points) {
        m = std::max({m, p.t_inlet, p.t_outlet});
    }
    return m;
}

TemperatureField temperature_field(const DataCenterConfig& cfg, const ThermalState& thermal) {
    if (static_cast<std::size_t>(thermal.size()) != cfg.cabinets.size()) {
        throw DomainError("thermal state does not match the configured cabinets");
    }
    TemperatureField field;
    field.points.reserve(cfg.cabinets.size());
    for (std::size_t i = 0; i < cfg.cabinets.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        field.points.push_back({cfg.cabinets[i].row, cfg.cabinets[i].position, thermal.t_inlet[k], thermal.t_outlet[k]});
    }
    std::sort(field.points.begin(), field.points.end(), [](const FieldPoint& a, const FieldPoint& b) {
        return std::tie(a.row, a.position) < std::tie(b.row, b.position);
    });
    return field;
}

double hotspot(const ThermalState& thermal) {
    if (thermal.size() == 0) {
        throw DomainError("thermal state is empty");
    }
    return std::max(thermal.t_inlet.maxCoeff(), thermal.t_outlet.maxCoeff());
}

KpiRecord kpis_for_step(const ThermalState& thermal, const HvacState& hvac, double ci, double timestep_minutes,
                        std::size_t step_index) {
    if (!(ci >= 0.0)) {
        throw DomainError("carbon intensity must be >= 0");
    }
    KpiRecord r;
    r.step_index = step_index;
    r.p_it = thermal.p_cpu.sum();
    r.p_fan = thermal.p_itfan.sum();
    r.p_hvac_elec = hvac.p_hvac_elec_total;
    const double hours = timestep_minutes / 60.0;
    r.energy_kwh = (r.p_it + r.p_fan + r.p_hvac_elec) * hours / 1000.0;
    r.carbon_g = ci * r.energy_kwh;
    r.hotspot_c = hotspot(thermal);
    return r;
}

EpisodeSummary episode_kpis(std::span<const KpiRecord> records) {
    if (records.empty()) {
        throw DomainError("episode summary needs at least one step");
    }
    CompensatedSum energy, carbon, hot;
    double peak = records.front().hotspot_c;
    for (const auto& r : records) {
        energy.add(r.energy_kwh);
        carbon.add(r.carbon_g);
        hot.add(r.hotspot_c);
        peak = std::max(peak, r.hotspot_c);
    }
    EpisodeSummary s;
    s.total_energy_kwh = energy.value();
    s.total_carbon_g = carbon.value();
    s.peak_hotspot_c = peak;
    s.mean_hotspot_c = hot.value() / static_cast<double>(records.size());
    s.steps = records.size();
    return s;
}

std::string temperature_field_csv(const TemperatureField& field) {
    std::string out = "row,position,t_inlet_c,t_outlet_c\n";
    for (const auto& p : field.points) {
        out += std::to_string(p.row);
        out += ',';
        out += std::to_string(p.position);
        out += ',';
        append_number(out, p.t_inlet);
        out += ',';
        append_number(out, p.t_outlet);
        out += '\n';
    }
    return out;
}

void export_temperature_field(const TemperatureField& field, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << temperature_field_csv(field);
    if (!out) {
        throw IoError("error writing '" + path.string() + "'");
    }
}

namespace {

template <typename T>
T parse_field(std::string_view s, std::size_t line_no) {
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid number '" + std::string(s) + "'");
    }
    return v;
}

} // namespace

TemperatureField parse_temperature_field(std::string_view csv) {
    TemperatureField field;
    std::size_t line_no = 0;
    bool header = false;
    while (!csv.empty()) {
        const std::size_t nl = csv.find('\n');
        std::string_view line = csv.substr(0, nl);
        csv.remove_prefix(nl == std::string_view::npos ? csv.size() : nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!header) {
            if (line != "row,position,t_inlet_c,t_outlet_c") {
                throw ParseError("line 1: unexpected temperature field header");
            }
            header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::string_view cols[4];
        for (int c = 0; c < 4; ++c) {
            const std::size_t comma = line.find(',');
            if ((c < 3) == (comma == std::string_view::npos)) {
                throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns");
            }
            cols[c] = line.substr(0, comma);
            line.remove_prefix(comma == std::string_view::npos ? line.size() : comma + 1);
        }
        field.points.push_back({parse_field<int>(cols[0], line_no), parse_field<int>(cols[1], line_no),
                                parse_field<double>(cols[2], line_no), parse_field<double>(cols[3], line_no)});
    }
    if (!header) {
        throw ParseError("temperature field CSV is empty");
    }
    return field;
}

void write_kpi_log(std::ostream& out, std::span<const KpiRow> rows) {
    std::string buf;
    buf.reserve(256);
    out << kKpiLogHeader << '\n';
    for (const auto& r : rows) {
        buf.clear();
        buf += std::to_string(r.step);
        buf += ',';
        buf += format_rfc3339(r.timestamp);
        for (double v : {r.setpoint_c, r.workload, r.ambient_c, r.ci, r.p_it_w, r.p_fan_w, r.p_cool_w,
                         r.p_chiller_elec_w, r.p_ct_fan_w, r.p_hvac_elec_w, r.energy_kwh, r.carbon_g, r.t_return_c,
                         r.hotspot_c}) {
            buf += ',';
            append_number(buf, v);
        }
        buf += '\n';
        out << buf;
    }
}

} // namespace dcsim
