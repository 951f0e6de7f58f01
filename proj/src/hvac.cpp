#include "dcsim/hvac.hpp"

#include "dcsim/errors.hpp"

#include <cmath>
#include <string>

namespace dcsim {

double crac_return_temp(std::span<const double> dt_return, std::span<const double> t_outlet) {
    if (dt_return.empty()) {
        throw DomainError("CRAC return temperature needs at least one cabinet");
    }
    if (dt_return.size() != t_outlet.size()) {
        throw DomainError("dt_return and t_outlet lengths differ");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < dt_return.size(); ++i) {
        sum += dt_return[i] + t_outlet[i];
    }
    return sum / static_cast<double>(dt_return.size());
}

double cooling_load(const HvacParams& hvac, double t_return, double t_supply) {
    return hvac.m_crac_fan * hvac.c_air * (t_return - t_supply);
}

double chiller_load(double p_cool, double cop) {
    if (!(cop > 0.0)) {
        throw DomainError("COP must be > 0, got " + std::to_string(cop));
    }
    if (p_cool < 0.0) {
        throw DomainError("chiller load needs p_cool >= 0, got " + std::to_string(p_cool));
    }
    return p_cool * (1.0 + 1.0 / cop);
}

double cooling_tower_airflow(const HvacParams& hvac, double p_chiller, double t_ambient) {
    return p_chiller / (hvac.c_air * hvac.rho_air * hvac.ct_delta(t_ambient));
}

double cooling_tower_power(const HvacParams& hvac, double v_ct_air) {
    const double ratio = v_ct_air / hvac.v_ct_air_ref;
    return hvac.p_ct_ref * (ratio * ratio * ratio);
}

HvacChain::HvacChain(const DataCenterConfig& cfg) : hvac_(cfg.hvac) {
    dt_return_.resize(static_cast<Eigen::Index>(cfg.cabinets.size()));
    for (Eigen::Index i = 0; i < dt_return_.size(); ++i) {
        dt_return_[i] = cfg.cabinets[static_cast<std::size_t>(i)].dt_return;
    }
}

HvacState HvacChain::evaluate(const ThermalState& thermal, double t_supply, double t_ambient) const {
    if (thermal.size() != dt_return_.size() || dt_return_.size() == 0) {
        throw DomainError("thermal state does not match the configured cabinets");
    }
    HvacState s;
    s.t_crac_return = (dt_return_ + thermal.t_outlet).sum() / static_cast<double>(dt_return_.size());
    s.p_cool_raw = cooling_load(hvac_, s.t_crac_return, t_supply);
    s.negative_cooling = s.p_cool_raw < 0.0;
    s.p_cool = s.negative_cooling ? 0.0 : s.p_cool_raw;
    s.p_chiller = chiller_load(s.p_cool, hvac_.cop);
    s.v_ct_air = cooling_tower_airflow(hvac_, s.p_chiller, t_ambient);
    s.p_ct_fan = cooling_tower_power(hvac_, s.v_ct_air);
    s.p_chiller_elec = s.p_cool / hvac_.cop;
    s.p_crac_fan = hvac_.p_crac_fan;
    s.p_hvac_elec_total = s.p_chiller_elec + s.p_ct_fan + s.p_crac_fan;
    return s;
}

HvacState step_hvac(const DataCenterConfig& cfg, const ThermalState& thermal, double t_supply, double t_ambient) {
    return HvacChain(cfg).evaluate(thermal, t_supply, t_ambient);
}

} // namespace dcsim
