#include "dcsim/env.hpp"

#include "dcsim/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dcsim {

namespace {

EnvConfig validated(EnvConfig cfg) {
    auto violations = validate_config(cfg.dc);
    if (!violations.empty()) {
        throw ValidationError(violations.front().message);
    }
    if (cfg.episode_steps < 1) {
        throw ValidationError("episode_steps ≥ 1 violated");
    }
    const RewardWeights& w = cfg.reward_weights;
    if (!(w.energy >= 0.0 && w.carbon >= 0.0 && w.hotspot_penalty >= 0.0)) {
        throw ValidationError("reward weights must be ≥ 0");
    }
    if (!(w.energy > 0.0 || w.carbon > 0.0 || w.hotspot_penalty > 0.0)) {
        throw ValidationError("at least one reward weight must be > 0");
    }
    if (!std::isfinite(cfg.hotspot_limit_c)) {
        throw ValidationError("hotspot_limit_c must be finite");
    }
    if (!(cfg.observation_noise_std >= 0.0)) {
        throw ValidationError("observation_noise_std must be ≥ 0");
    }
    if (cfg.traces.grid_step != std::chrono::minutes{cfg.dc.timestep_minutes}) {
        throw ValidationError("trace grid step (" + std::to_string(cfg.traces.grid_step.count()) +
                              " min) differs from timestep_minutes (" + std::to_string(cfg.dc.timestep_minutes) +
                              ")");
    }
    return cfg;
}

} // namespace

double reward_for(const KpiRecord& kpi, const RewardWeights& w, double hotspot_limit_c) noexcept {
    const double excess = std::max(0.0, kpi.hotspot_c - hotspot_limit_c);
    return -(w.energy * kpi.energy_kwh + w.carbon * kpi.carbon_g / 1000.0 + w.hotspot_penalty * excess);
}

KpiRow make_kpi_row(const StepOutcome& o) {
    KpiRow r;
    r.step = o.kpi.step_index;
    r.timestamp = o.info.timestamp;
    r.setpoint_c = o.info.setpoint_c;
    r.workload = o.info.workload;
    r.ambient_c = o.info.ambient_c;
    r.ci = o.info.ci;
    r.p_it_w = o.kpi.p_it;
    r.p_fan_w = o.kpi.p_fan;
    r.p_cool_w = o.info.hvac.p_cool;
    r.p_chiller_elec_w = o.info.hvac.p_chiller_elec;
    r.p_ct_fan_w = o.info.hvac.p_ct_fan;
    r.p_hvac_elec_w = o.info.hvac.p_hvac_elec_total;
    r.energy_kwh = o.kpi.energy_kwh;
    r.carbon_g = o.kpi.carbon_g;
    r.t_return_c = o.info.hvac.t_crac_return;
    r.hotspot_c = o.kpi.hotspot_c;
    return r;
}

Environment::Environment(EnvConfig cfg)
    : cfg_(validated(std::move(cfg))), it_(cfg_.dc), hvac_(cfg_.dc), thermal_(it_.size()), rng_(cfg_.seed) {
    const std::size_t n_grid = cfg_.traces.grid_points();
    if (n_grid < cfg_.episode_steps + 1) {
        throw CoverageError("traces hold " + std::to_string(n_grid) + " grid points from " +
                            format_rfc3339(cfg_.traces.grid_start) + ", an episode of " +
                            std::to_string(cfg_.episode_steps) + " steps needs " +
                            std::to_string(cfg_.episode_steps + 1));
    }
    const std::chrono::milliseconds step = cfg_.traces.grid_step;
    workload_ = align(cfg_.traces.workload, cfg_.traces.grid_start, step, n_grid);
    ambient_ = align(cfg_.traces.ambient_drybulb, cfg_.traces.grid_start, step, n_grid);
    ci_ = align(cfg_.traces.carbon_intensity, cfg_.traces.grid_start, step, n_grid);

    sin_hour_.resize(n_grid);
    cos_hour_.resize(n_grid);
    day_frac_.resize(n_grid);
    using namespace std::chrono;
    for (std::size_t k = 0; k < n_grid; ++k) {
        const Instant t = grid_instant(k);
        const auto day_start = floor<days>(t);
        const double hour = duration<double, std::ratio<3600>>(t - day_start).count();
        const double angle = 2.0 * std::numbers::pi * hour / 24.0;
        sin_hour_[k] = std::sin(angle);
        cos_hour_[k] = std::cos(angle);
        const year y = year_month_day{day_start}.year();
        const auto jan1 = sys_days{y / January / 1};
        const double year_days = y.is_leap() ? 366.0 : 365.0;
        day_frac_[k] = (static_cast<double>((day_start - jan1).count()) + hour / 24.0) / year_days;
    }
}

Instant Environment::grid_instant(std::size_t index) const noexcept {
    return cfg_.traces.grid_start + std::chrono::milliseconds(cfg_.traces.grid_step) * static_cast<long long>(index);
}

Observation Environment::observe(std::size_t index) {
    Observation o;
    o.sin_hour = sin_hour_[index];
    o.cos_hour = cos_hour_[index];
    o.day_of_year_frac = day_frac_[index];
    o.workload = workload_[index];
    o.ambient_c = ambient_[index];
    o.ci = ci_[index];
    o.prev_t_return_c = prev_t_return_;
    o.prev_hotspot_c = prev_hotspot_;
    if (cfg_.observation_noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg_.observation_noise_std);
        o.workload += noise(rng_);
        o.ambient_c += noise(rng_);
        o.ci += noise(rng_);
    }
    return o;
}

Observation Environment::reset(std::optional<Instant> start) {
    std::size_t index = 0;
    if (start) {
        const auto offset = *start - cfg_.traces.grid_start;
        const std::chrono::milliseconds step = cfg_.traces.grid_step;
        if (offset.count() < 0 || offset % step != std::chrono::milliseconds::zero()) {
            throw RangeError("episode start " + format_rfc3339(*start) + " is not on the trace grid");
        }
        index = static_cast<std::size_t>(offset / step);
    }
    if (index + cfg_.episode_steps + 1 > grid_points()) {
        throw RangeError("episode starting at " + format_rfc3339(grid_instant(index)) +
                         " runs past the end of the traces");
    }
    start_index_ = index;
    step_count_ = 0;
    active_ = true;
    rng_.seed(cfg_.seed);

    // Bootstrap the "previous step" fields from the midpoint setpoint.
    const HvacParams& h = cfg_.dc.hvac;
    const double mid = 0.5 * (h.setpoint_min + h.setpoint_max);
    it_.evaluate({mid, workload_[index]}, thermal_);
    prev_t_return_ = hvac_.evaluate(thermal_, mid, ambient_[index]).t_crac_return;
    prev_hotspot_ = hotspot(thermal_);
    return observe(index);
}

StepOutcome Environment::step(Action action) {
    if (!active_) {
        throw EpisodeOverflowError("step called before reset");
    }
    if (step_count_ >= cfg_.episode_steps) {
        throw EpisodeOverflowError("episode already truncated after " + std::to_string(cfg_.episode_steps) +
                                   " steps; call reset");
    }
    if (!std::isfinite(action.t_crac_supply)) {
        throw DomainError("setpoint must be finite");
    }
    const std::size_t index = start_index_ + step_count_;
    StepOutcome out;
    StepInfo& info = out.info;
    info.timestamp = grid_instant(index);
    info.setpoint_c = cfg_.dc.hvac.clamp_setpoint(action.t_crac_supply);
    info.action_clamped = info.setpoint_c != action.t_crac_supply;
    info.workload = workload_[index];
    info.ambient_c = ambient_[index];
    info.ci = ci_[index];
    if (info.action_clamped) {
        ++clamp_count_;
    }

    it_.evaluate({info.setpoint_c, info.workload}, thermal_);
    info.hvac = hvac_.evaluate(thermal_, info.setpoint_c, info.ambient_c);
    if (info.hvac.negative_cooling) {
        ++negative_cooling_count_;
    }
    out.kpi = kpis_for_step(thermal_, info.hvac, info.ci, static_cast<double>(cfg_.dc.timestep_minutes), step_count_);
    out.reward = reward_for(out.kpi, cfg_.reward_weights, cfg_.hotspot_limit_c);

    prev_t_return_ = info.hvac.t_crac_return;
    prev_hotspot_ = out.kpi.hotspot_c;
    ++step_count_;
    out.truncated = step_count_ == cfg_.episode_steps;
    out.terminated = false;
    out.observation = observe(index + 1);
    return out;
}

} // namespace dcsim
