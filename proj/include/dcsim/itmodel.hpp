#pragma once

#include "dcsim/config.hpp"

#include <Eigen/Core>

#include <span>

namespace dcsim {

/// Controller input and exogenous load for one IT-room evaluation.
struct ItInputs {
    double t_crac_supply = 20.0; ///< degC
    double workload = 0.0;       ///< fraction in [0, 1], same for every CPU
};

/// Per-cabinet temperatures and power for one timestep. Arrays have length K
/// in config cabinet order.
struct ThermalState {
    Eigen::ArrayXd t_inlet;
    Eigen::ArrayXd t_outlet;
    Eigen::ArrayXd p_cpu;
    Eigen::ArrayXd p_itfan;
    Eigen::ArrayXd p_rack;
    double p_datacenter = 0.0;

    explicit ThermalState(Eigen::Index k = 0);
    Eigen::Index size() const noexcept { return t_inlet.size(); }
};

struct CabinetPower {
    double p_cpu = 0.0;
    double p_itfan = 0.0;
};

/// dt_supply[i] + t_crac_supply for every cabinet.
Eigen::ArrayXd compute_inlet_temps(const DataCenterConfig& cfg, double t_crac_supply);

/// Power drawn by n_servers identical servers at a common inlet temperature.
/// Throws DomainError when load is outside [0, 1].
CabinetPower compute_cabinet_power(const ServerModel& model, int n_servers, double t_inlet, double load);

/// t_inlet[i] + p_rack[i] / (c_air * rho_air * v_sfan[i]).
Eigen::ArrayXd compute_outlet_temps(std::span<const double> t_inlet, std::span<const double> p_rack,
                                    const DataCenterConfig& cfg);

/// Structure-of-arrays view of a config, built once and evaluated in place
/// every step. Every cabinet quantity is a contiguous array so each stage of
/// the IT-room model is a single vectorized expression.
class ItKernel {
public:
    explicit ItKernel(const DataCenterConfig& cfg);

    /// Fills out (resized on first use) for the given inputs.
    void evaluate(const ItInputs& in, ThermalState& out) const;

    Eigen::Index size() const noexcept { return dt_supply_.size(); }

private:
    Eigen::ArrayXd dt_supply_;
    Eigen::ArrayXd n_servers_;
    Eigen::ArrayXd cpu_c0_, cpu_c1_, cpu_c2_, cpu_min_, cpu_max_;
    Eigen::ArrayXd fan_c0_, fan_c1_, fan_c2_, fan_min_, fan_max_;
    Eigen::ArrayXd heat_capacity_rate_; ///< c_air * rho_air * v_sfan, W/K
    double setpoint_min_;
    double setpoint_max_;
};

/// Vectorized IT-room step. Throws DomainError on invalid inputs.
ThermalState step_it_room(const DataCenterConfig& cfg, const ItInputs& in);

/// Scalar reference: explicit per-cabinet, per-server loop summing each
/// server's clamped curve output. Same contract as step_it_room; for tests
/// and benchmarks only.
ThermalState step_it_room_naive(const DataCenterConfig& cfg, const ItInputs& in);

/// Throws DomainError unless workload is in [0, 1] and the setpoint lies in
/// the configured bounds.
void check_it_inputs(const ItInputs& in, double setpoint_min, double setpoint_max);

} // namespace dcsim
