#include "dcsim/itmodel.hpp"

#include "dcsim/errors.hpp"

#include <cmath>
#include <string>

namespace dcsim {

ThermalState::ThermalState(Eigen::Index k)
    : t_inlet(Eigen::ArrayXd::Zero(k)),
      t_outlet(Eigen::ArrayXd::Zero(k)),
      p_cpu(Eigen::ArrayXd::Zero(k)),
      p_itfan(Eigen::ArrayXd::Zero(k)),
      p_rack(Eigen::ArrayXd::Zero(k)) {}

void check_it_inputs(const ItInputs& in, double setpoint_min, double setpoint_max) {
    if (!(in.workload >= 0.0 && in.workload <= 1.0)) {
        throw DomainError("workload must lie in [0, 1], got " + std::to_string(in.workload));
    }
    if (!(in.t_crac_supply >= setpoint_min && in.t_crac_supply <= setpoint_max)) {
        throw DomainError("CRAC supply setpoint " + std::to_string(in.t_crac_supply) + " outside [" +
                          std::to_string(setpoint_min) + ", " + std::to_string(setpoint_max) + "]");
    }
}

Eigen::ArrayXd compute_inlet_temps(const DataCenterConfig& cfg, double t_crac_supply) {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(cfg.cabinets.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out[i] = cfg.cabinets[static_cast<std::size_t>(i)].dt_supply + t_crac_supply;
    }
    return out;
}

CabinetPower compute_cabinet_power(const ServerModel& model, int n_servers, double t_inlet, double load) {
    if (!(load >= 0.0 && load <= 1.0)) {
        throw DomainError("load must lie in [0, 1], got " + std::to_string(load));
    }
    const double n = static_cast<double>(n_servers);
    return {n * model.cpu_power(t_inlet, load), n * model.fan_power(t_inlet, load)};
}

Eigen::ArrayXd compute_outlet_temps(std::span<const double> t_inlet, std::span<const double> p_rack,
                                    const DataCenterConfig& cfg) {
    const std::size_t k = cfg.cabinets.size();
    if (t_inlet.size() != k || p_rack.size() != k) {
        throw DomainError("outlet temperatures need one inlet and rack power per cabinet");
    }
    const HvacParams& h = cfg.hvac;
    Eigen::ArrayXd out(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        out[static_cast<Eigen::Index>(i)] =
            t_inlet[i] + p_rack[i] / (h.c_air * h.rho_air * cfg.cabinets[i].v_sfan);
    }
    return out;
}

// ---------------------------------------------------------------------------

ItKernel::ItKernel(const DataCenterConfig& cfg)
    : setpoint_min_(cfg.hvac.setpoint_min), setpoint_max_(cfg.hvac.setpoint_max) {
    const auto k = static_cast<Eigen::Index>(cfg.cabinets.size());
    for (auto* a : {&dt_supply_, &n_servers_, &cpu_c0_, &cpu_c1_, &cpu_c2_, &cpu_min_, &cpu_max_, &fan_c0_,
                    &fan_c1_, &fan_c2_, &fan_min_, &fan_max_, &heat_capacity_rate_}) {
        a->resize(k);
    }
    const double air = cfg.hvac.c_air * cfg.hvac.rho_air;
    for (Eigen::Index i = 0; i < k; ++i) {
        const CabinetConfig& c = cfg.cabinets[static_cast<std::size_t>(i)];
        const ServerModel* m = cfg.find_model(c.server_model_id);
        if (m == nullptr) {
            throw ValidationError("cabinet '" + c.id + "': server_model_id '" + c.server_model_id +
                                  "' does not resolve to a server model");
        }
        dt_supply_[i] = c.dt_supply;
        n_servers_[i] = static_cast<double>(c.n_servers);
        cpu_c0_[i] = m->cpu_curve.c0;
        cpu_c1_[i] = m->cpu_curve.c1;
        cpu_c2_[i] = m->cpu_curve.c2;
        cpu_min_[i] = m->p_cpu_min;
        cpu_max_[i] = m->p_cpu_max;
        fan_c0_[i] = m->itfan_curve.c0;
        fan_c1_[i] = m->itfan_curve.c1;
        fan_c2_[i] = m->itfan_curve.c2;
        fan_min_[i] = m->p_fan_min;
        fan_max_[i] = m->p_fan_max;
        heat_capacity_rate_[i] = air * c.v_sfan;
    }
}

void ItKernel::evaluate(const ItInputs& in, ThermalState& out) const {
    check_it_inputs(in, setpoint_min_, setpoint_max_);
    const Eigen::Index k = size();
    if (out.size() != k) {
        out = ThermalState(k);
    }
    const double load = in.workload;

    out.t_inlet = dt_supply_ + in.t_crac_supply;
    out.p_cpu = n_servers_ * (cpu_c0_ + cpu_c1_ * out.t_inlet + cpu_c2_ * load).max(cpu_min_).min(cpu_max_);
    out.p_itfan = n_servers_ * (fan_c0_ + fan_c1_ * out.t_inlet + fan_c2_ * load).max(fan_min_).min(fan_max_);
    out.p_rack = out.p_cpu + out.p_itfan;
    out.t_outlet = out.t_inlet + out.p_rack / heat_capacity_rate_;
    out.p_datacenter = out.p_rack.sum();
}

ThermalState step_it_room(const DataCenterConfig& cfg, const ItInputs& in) {
    ThermalState out;
    ItKernel(cfg).evaluate(in, out);
    return out;
}

ThermalState step_it_room_naive(const DataCenterConfig& cfg, const ItInputs& in) {
    check_it_inputs(in, cfg.hvac.setpoint_min, cfg.hvac.setpoint_max);
    const auto k = static_cast<Eigen::Index>(cfg.cabinets.size());
    ThermalState out(k);
    double p_datacenter = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const CabinetConfig& c = cfg.cabinets[static_cast<std::size_t>(i)];
        const ServerModel* m = cfg.find_model(c.server_model_id);
        if (m == nullptr) {
            throw ValidationError("cabinet '" + c.id + "': server_model_id '" + c.server_model_id +
                                  "' does not resolve to a server model");
        }
        const double t_inlet = c.dt_supply + in.t_crac_supply;
        double p_cpu = 0.0;
        double p_fan = 0.0;
        for (int j = 0; j < c.n_servers; ++j) {
            p_cpu += m->cpu_power(t_inlet, in.workload);
            p_fan += m->fan_power(t_inlet, in.workload);
        }
        const double p_rack = p_cpu + p_fan;
        out.t_inlet[i] = t_inlet;
        out.p_cpu[i] = p_cpu;
        out.p_itfan[i] = p_fan;
        out.p_rack[i] = p_rack;
        out.t_outlet[i] = t_inlet + p_rack / (cfg.hvac.c_air * cfg.hvac.rho_air * c.v_sfan);
        p_datacenter += p_rack;
    }
    out.p_datacenter = p_datacenter;
    return out;
}

} // namespace dcsim
