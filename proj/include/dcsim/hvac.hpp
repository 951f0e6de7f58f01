#pragma once

#include "dcsim/config.hpp"
#include "dcsim/itmodel.hpp"

#include <span>

namespace dcsim {

/// Cooling chain state for one timestep. Thermal quantities (p_cool,
/// p_chiller) and electrical draws are kept apart; every electrical term
/// is exposed.
struct HvacState {
    double t_crac_return = 0.0;  ///< degC
    double p_cool_raw = 0.0;     ///< W thermal, signed
    double p_cool = 0.0;         ///< W thermal, max(0, p_cool_raw)
    double p_chiller = 0.0;      ///< W heat rejected, p_cool * (1 + 1/COP)
    double v_ct_air = 0.0;       ///< m^3/s cooling tower airflow
    double p_ct_fan = 0.0;       ///< W electrical
    double p_chiller_elec = 0.0; ///< W electrical, p_cool / COP
    double p_crac_fan = 0.0;     ///< W electrical
    double p_hvac_elec_total = 0.0;
    /// Set when the supply setpoint exceeded the return temperature and the
    /// negative cooling load was clamped to zero.
    bool negative_cooling = false;
};

/// Mean over cabinets of dt_return[i] + t_outlet[i]. DomainError on K = 0
/// or mismatched lengths.
double crac_return_temp(std::span<const double> dt_return, std::span<const double> t_outlet);

/// m_crac_fan * c_air * (t_return - t_supply); negative when t_return < t_supply.
double cooling_load(const HvacParams& hvac, double t_return, double t_supply);

/// p_cool * (1 + 1/cop). DomainError on cop <= 0 or p_cool < 0.
double chiller_load(double p_cool, double cop);

/// p_chiller / (c_air * rho_air * ct_delta(t_ambient)).
double cooling_tower_airflow(const HvacParams& hvac, double p_chiller, double t_ambient);

/// p_ct_ref * (v_ct_air / v_ct_air_ref)^3.
double cooling_tower_power(const HvacParams& hvac, double v_ct_air);

/// Precomputed per-cabinet return deltas so the chain can run every step
/// without touching the config's cabinet list.
class HvacChain {
public:
    explicit HvacChain(const DataCenterConfig& cfg);

    HvacState evaluate(const ThermalState& thermal, double t_supply, double t_ambient) const;

    const HvacParams& params() const noexcept { return hvac_; }

private:
    HvacParams hvac_;
    Eigen::ArrayXd dt_return_;
};

HvacState step_hvac(const DataCenterConfig& cfg, const ThermalState& thermal, double t_supply, double t_ambient);

} // namespace dcsim
