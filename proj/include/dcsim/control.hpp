#pragma once

#include "dcsim/env.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace dcsim {

/// Trim-and-respond reset of the CRAC supply setpoint on return temperature.
struct RbcParams {
    double target_return_c = 32.0;
    double deadband_c = 1.0;
    double trim_step_c = 0.25;   ///< raise per decision when return is cool
    double respond_step_c = 0.5; ///< lower per decision when return is hot
    double initial_setpoint_c = 20.0;
};

/// ValidationError unless deadband >= 0, both steps > 0 and the initial
/// setpoint lies in the HVAC bounds.
void validate_rbc(const RbcParams& params, const HvacParams& hvac);

/// Next setpoint: respond (lower) above target + deadband, trim (raise)
/// below target - deadband, otherwise hold. Always clamped to the bounds.
Action rbc_decide(const RbcParams& params, double prev_setpoint, double prev_t_return, double setpoint_min,
                  double setpoint_max);

class Controller {
public:
    virtual ~Controller() = default;
    /// Called with the first observation of every episode.
    virtual void reset(const Observation& first) { (void)first; }
    virtual Action decide(const Observation& obs) = 0;
};

class FixedPolicy final : public Controller {
public:
    explicit FixedPolicy(double setpoint) : setpoint_(setpoint) {}
    Action decide(const Observation&) override { return {setpoint_}; }
    double setpoint() const noexcept { return setpoint_; }

private:
    double setpoint_;
};

/// RangeError when setpoint is outside the HVAC bounds.
FixedPolicy fixed_policy(double setpoint, const HvacParams& hvac);

class RbcController final : public Controller {
public:
    RbcController(RbcParams params, const HvacParams& hvac);
    void reset(const Observation& first) override;
    Action decide(const Observation& obs) override;

private:
    RbcParams params_;
    double setpoint_min_;
    double setpoint_max_;
    double setpoint_;
};

/// Resets env and drives it with controller until truncation. Appends every
/// step to log when given.
EpisodeSummary run_episode(Environment& env, Controller& controller, std::vector<KpiRow>* log = nullptr,
                           std::optional<Instant> start = std::nullopt);

struct SweepRow {
    double setpoint_c = 0.0;
    EpisodeSummary summary;
};

/// One fixed-setpoint episode per entry, all from the same start.
std::vector<SweepRow> sweep_setpoints(Environment& env, std::span<const double> setpoints);

/// Newline-delimited JSON session driving env from an out-of-process agent.
///
/// Engine -> agent: {"type":"obs","v":[8 numbers],"reward":r,"truncated":b,"step":n}
///                  {"type":"err","msg":"..."}
/// Agent -> engine: {"type":"act","v":[t_supply]}, {"type":"reset"} (optional
///                  "start": RFC 3339 instant), {"type":"close"}
///
/// The session opens with a reset and its observation. Invalid messages are
/// answered with an err line and leave the environment untouched. Returns one
/// summary per episode with at least one step; episodes left before
/// truncation (reset, close, end of input) are flagged incomplete.
std::vector<EpisodeSummary> serve_external_agent(Environment& env, std::istream& in, std::ostream& out,
                                                 std::vector<KpiRow>* log = nullptr);

} // namespace dcsim
