#pragma once

#include "dcsim/config.hpp"
#include "dcsim/hvac.hpp"
#include "dcsim/itmodel.hpp"
#include "dcsim/traces.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcsim {

/// Sustainability KPIs for one step.
struct KpiRecord {
    std::size_t step_index = 0;
    double p_it = 0.0;        ///< W, sum of CPU power
    double p_fan = 0.0;       ///< W, sum of IT fan power
    double p_hvac_elec = 0.0; ///< W, HVAC electrical total
    double energy_kwh = 0.0;  ///< over the step
    double carbon_g = 0.0;    ///< gCO2 over the step
    double hotspot_c = 0.0;   ///< max sensed inlet/outlet temperature
};

/// Sensed temperatures of one cabinet in the room grid.
struct FieldPoint {
    int row = 0;
    int position = 0;
    double t_inlet = 0.0;
    double t_outlet = 0.0;

    bool operator==(const FieldPoint&) const = default;
};

/// Per-cabinet inlet/outlet temperatures, sorted by (row, position).
struct TemperatureField {
    std::vector<FieldPoint> points;

    /// Highest inlet or outlet temperature. DomainError when empty.
    double max() const;
};

TemperatureField temperature_field(const DataCenterConfig& cfg, const ThermalState& thermal);

/// Max over every cabinet's inlet and outlet temperature.
double hotspot(const ThermalState& thermal);

/// KPIs for a step of length timestep_minutes at carbon intensity ci
/// (gCO2/kWh). DomainError on ci < 0.
KpiRecord kpis_for_step(const ThermalState& thermal, const HvacState& hvac, double ci, double timestep_minutes,
                        std::size_t step_index = 0);

struct EpisodeSummary {
    double total_energy_kwh = 0.0;
    double total_carbon_g = 0.0;
    double peak_hotspot_c = 0.0;
    double mean_hotspot_c = 0.0;
    std::size_t steps = 0;
    /// False when the episode was abandoned before truncation.
    bool complete = true;
};

/// Compensated sums and extrema over records. DomainError on an empty list.
EpisodeSummary episode_kpis(std::span<const KpiRecord> records);

/// Neumaier-compensated running sum; totals do not depend on how many
/// small terms preceded a large one.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Writes row,position,t_inlet_c,t_outlet_c CSV. IoError on failure.
void export_temperature_field(const TemperatureField& field, const std::filesystem::path& path);
std::string temperature_field_csv(const TemperatureField& field);
/// Inverse of temperature_field_csv. ParseError on malformed input.
TemperatureField parse_temperature_field(std::string_view csv);

/// One line of the KPI log.
struct KpiRow {
    std::size_t step = 0;
    Instant timestamp{};
    double setpoint_c = 0.0;
    double workload = 0.0;
    double ambient_c = 0.0;
    double ci = 0.0;
    double p_it_w = 0.0;
    double p_fan_w = 0.0;
    double p_cool_w = 0.0;
    double p_chiller_elec_w = 0.0;
    double p_ct_fan_w = 0.0;
    double p_hvac_elec_w = 0.0;
    double energy_kwh = 0.0;
    double carbon_g = 0.0;
    double t_return_c = 0.0;
    double hotspot_c = 0.0;
};

inline constexpr std::string_view kKpiLogHeader =
    "step,timestamp,setpoint_c,workload,ambient_c,ci,p_it_w,p_fan_w,p_cool_w,p_chiller_elec_w,"
    "p_ct_fan_w,p_hvac_elec_w,energy_kwh,carbon_g,t_return_c,hotspot_c";

/// Header plus one line per row; doubles in shortest round-trip form.
void write_kpi_log(std::ostream& out, std::span<const KpiRow> rows);

/// Appends the shortest round-trip text of v.
void append_number(std::string& out, double v);

} // namespace dcsim
