#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dcsim {

/// UTC instant at millisecond resolution.
using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

enum class TraceUnit {
    Fraction,     ///< workload, checked against [0, 1]
    Celsius,      ///< ambient dry-bulb
    GramsPerKwh,  ///< grid carbon intensity, gCO2/kWh
};

struct TimeSeries {
    std::vector<Instant> timestamps; ///< strictly increasing
    std::vector<double> values;
    TraceUnit unit = TraceUnit::Fraction;

    std::size_t size() const noexcept { return timestamps.size(); }
    bool empty() const noexcept { return timestamps.empty(); }
};

/// Parses an RFC 3339 timestamp ("2023-07-01T00:15:00Z", offsets and
/// fractional seconds accepted). Throws ParseError.
Instant parse_rfc3339(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ", with ".mmm" only when the milliseconds are non-zero.
std::string format_rfc3339(Instant t);

/// Parses `timestamp,value` CSV text. Rows are sorted by time and duplicate
/// timestamps resolved in favour of the later row. Fraction values more than
/// 1e-9 outside [0, 1] raise UnitError; those within the tolerance are clamped.
/// Negative carbon intensities raise UnitError.
TimeSeries parse_trace_csv(std::string_view text, TraceUnit unit);

TimeSeries load_trace_csv(const std::filesystem::path& path, TraceUnit unit);

std::string serialize_trace_csv(const TimeSeries& ts);

/// Values of ts at grid_start + k * grid_step for k in [0, n_steps), by
/// linear interpolation between neighbouring samples. Samples that fall on
/// the grid pass through unchanged. Throws CoverageError if any grid instant
/// lies outside the series (no extrapolation).
std::vector<double> align(const TimeSeries& ts, Instant grid_start, std::chrono::milliseconds grid_step,
                          std::size_t n_steps);

/// The three exogenous series driving an episode.
struct TraceSet {
    TimeSeries workload;
    TimeSeries ambient_drybulb;
    TimeSeries carbon_intensity;
    Instant grid_start{};
    std::chrono::minutes grid_step{15};

    /// Number of grid instants, starting at grid_start, covered by all three
    /// series.
    std::size_t grid_points() const;
};

/// Builds a TraceSet whose grid starts at the latest first sample of the
/// three series. CoverageError if the series do not overlap.
TraceSet make_trace_set(TimeSeries workload, TimeSeries ambient, TimeSeries carbon_intensity,
                        std::chrono::minutes grid_step);

/// Loads workload.csv, ambient_drybulb.csv and carbon_intensity.csv from dir.
TraceSet load_trace_dir(const std::filesystem::path& dir, std::chrono::minutes grid_step);

inline constexpr const char* kWorkloadFile = "workload.csv";
inline constexpr const char* kAmbientFile = "ambient_drybulb.csv";
inline constexpr const char* kCarbonFile = "carbon_intensity.csv";

/// Steps per day at the given timestep; 96 at 15 minutes.
constexpr std::size_t steps_per_day(int timestep_minutes) {
    return static_cast<std::size_t>(1440 / timestep_minutes);
}

} // namespace dcsim
