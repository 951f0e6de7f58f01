#pragma once

#include "dcsim/config.hpp"
#include "dcsim/hvac.hpp"
#include "dcsim/itmodel.hpp"
#include "dcsim/metrics.hpp"
#include "dcsim/traces.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>

namespace dcsim {

struct RewardWeights {
    double energy = 0.0;          ///< per kWh
    double carbon = 1.0;          ///< per kgCO2
    double hotspot_penalty = 0.0; ///< per K above hotspot_limit_c
};

inline constexpr std::size_t kEpisodeSteps7Days = 672;
inline constexpr std::size_t kEpisodeSteps30Days = 2880;

struct EnvConfig {
    DataCenterConfig dc;
    TraceSet traces;
    std::size_t episode_steps = kEpisodeSteps7Days;
    RewardWeights reward_weights;
    double hotspot_limit_c = 30.0;
    std::uint64_t seed = 0;
    /// Standard deviation of Gaussian noise added to the observed workload,
    /// ambient and carbon intensity. Zero disables it.
    double observation_noise_std = 0.0;
};

/// Flat layout: [sin_hour, cos_hour, day_of_year_frac, workload, ambient_c,
/// ci, prev_t_return_c, prev_hotspot_c].
struct Observation {
    double sin_hour = 0.0;
    double cos_hour = 0.0;
    double day_of_year_frac = 0.0;
    double workload = 0.0;
    double ambient_c = 0.0;
    double ci = 0.0;
    double prev_t_return_c = 0.0;
    double prev_hotspot_c = 0.0;

    static constexpr std::size_t kSize = 8;
    std::array<double, kSize> to_array() const noexcept {
        return {sin_hour, cos_hour, day_of_year_frac, workload, ambient_c, ci, prev_t_return_c, prev_hotspot_c};
    }

    bool operator==(const Observation&) const = default;
};

struct Action {
    double t_crac_supply = 20.0; ///< degC
};

/// Exogenous inputs and plant state behind a step's KPIs.
struct StepInfo {
    Instant timestamp{};
    double setpoint_c = 0.0; ///< after clamping
    bool action_clamped = false;
    double workload = 0.0;
    double ambient_c = 0.0;
    double ci = 0.0;
    HvacState hvac;
};

struct StepOutcome {
    Observation observation;
    double reward = 0.0;
    bool terminated = false; ///< always false, no absorbing failure state
    bool truncated = false;  ///< true on the episode's last step
    KpiRecord kpi;
    StepInfo info;
};

KpiRow make_kpi_row(const StepOutcome& outcome);

/// -(w_energy * kWh + w_carbon * kgCO2 + w_hotspot * max(0, hotspot - limit)).
double reward_for(const KpiRecord& kpi, const RewardWeights& w, double hotspot_limit_c) noexcept;

/// Episodic simulation kernel. Construction aligns every trace onto the step
/// grid once; reset and step only touch preallocated state.
///
/// Not thread-safe: serialize calls on one instance. Independent instances
/// may run in parallel.
class Environment {
public:
    /// Throws ValidationError for an invalid config and CoverageError when
    /// the traces cannot hold one episode.
    explicit Environment(EnvConfig cfg);

    /// Starts an episode at `start` (default: the trace grid start).
    /// RangeError if start is off-grid or leaves no room for a full episode.
    Observation reset(std::optional<Instant> start = std::nullopt);

    /// Advances one timestep. The setpoint is clamped into the configured
    /// bounds. EpisodeOverflowError before reset or after truncation;
    /// DomainError on a non-finite setpoint.
    StepOutcome step(Action action);

    const EnvConfig& config() const noexcept { return cfg_; }
    std::size_t episode_steps() const noexcept { return cfg_.episode_steps; }
    std::size_t steps_taken() const noexcept { return step_count_; }
    bool episode_active() const noexcept { return active_ && step_count_ < cfg_.episode_steps; }
    /// Aligned grid instants available from the trace grid start.
    std::size_t grid_points() const noexcept { return workload_.size(); }
    Instant grid_instant(std::size_t index) const noexcept;

    std::size_t clamp_count() const noexcept { return clamp_count_; }
    std::size_t negative_cooling_count() const noexcept { return negative_cooling_count_; }

    /// IT-room state of the most recent step (or the reset bootstrap).
    const ThermalState& thermal() const noexcept { return thermal_; }

private:
    Observation observe(std::size_t index);

    EnvConfig cfg_;
    ItKernel it_;
    HvacChain hvac_;
    std::vector<double> workload_;
    std::vector<double> ambient_;
    std::vector<double> ci_;
    std::vector<double> sin_hour_;
    std::vector<double> cos_hour_;
    std::vector<double> day_frac_;
    ThermalState thermal_;
    std::mt19937_64 rng_;
    std::size_t start_index_ = 0;
    std::size_t step_count_ = 0;
    bool active_ = false;
    double prev_t_return_ = 0.0;
    double prev_hotspot_ = 0.0;
    std::size_t clamp_count_ = 0;
    std::size_t negative_cooling_count_ = 0;
};

} // namespace dcsim
