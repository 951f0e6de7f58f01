#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dcsim {

/// Power as an affine function of inlet temperature and load:
/// c0 + c1 * t_inlet + c2 * load.
struct AffineCurve {
    double c0 = 0.0; ///< W
    double c1 = 0.0; ///< W per degC
    double c2 = 0.0; ///< W per unit load fraction

    double operator()(double t_inlet, double load) const noexcept {
        return c0 + c1 * t_inlet + c2 * load;
    }
};

struct ServerModel {
    std::string id;
    AffineCurve cpu_curve;
    AffineCurve itfan_curve;
    double p_cpu_min = 0.0;
    double p_cpu_max = 0.0;
    double p_fan_min = 0.0;
    double p_fan_max = 0.0;

    /// Per-server CPU power, clamped to [p_cpu_min, p_cpu_max].
    double cpu_power(double t_inlet, double load) const noexcept;
    /// Per-server IT fan power, clamped to [p_fan_min, p_fan_max].
    double fan_power(double t_inlet, double load) const noexcept;
};

struct CabinetConfig {
    std::string id;
    int row = 0;
    int position = 0;
    std::string server_model_id;
    int n_servers = 1;
    double dt_supply = 0.0; ///< K, CRAC supply -> cabinet inlet
    double dt_return = 0.0; ///< K, cabinet outlet -> CRAC return
    double v_sfan = 1.0;    ///< m^3/s through the cabinet
};

struct HvacParams {
    double c_air = 1006.0;   ///< J/(kg K)
    double rho_air = 1.225;  ///< kg/m^3
    double m_crac_fan = 1.0; ///< kg/s
    double p_crac_fan = 0.0; ///< W, fixed-speed CRAC fan draw
    double cop = 1.0;
    /// (ambient dry-bulb degC, cooling tower delta K), ascending in ambient.
    std::vector<std::array<double, 2>> ct_delta_table;
    double ct_delta_min = 1.0;
    double v_ct_air_ref = 1.0; ///< m^3/s
    double p_ct_ref = 0.0;     ///< W
    double setpoint_min = 15.0;
    double setpoint_max = 30.0;

    /// Cooling tower delta at the given ambient: piecewise-linear in the
    /// table, endpoint values outside it, never below ct_delta_min.
    double ct_delta(double t_ambient) const;

    double clamp_setpoint(double t) const noexcept;
};

struct DataCenterConfig {
    std::vector<ServerModel> server_models;
    std::vector<CabinetConfig> cabinets;
    HvacParams hvac;
    int timestep_minutes = 15;

    std::size_t cabinet_count() const noexcept { return cabinets.size(); }
    long long total_servers() const noexcept;

    /// nullptr when no model carries the id.
    const ServerModel* find_model(std::string_view id) const noexcept;
};

struct Violation {
    std::string code;    ///< stable, machine-readable
    std::string message; ///< names the invariant and the offending item
};

/// Every broken invariant in cfg; empty when the config is usable.
std::vector<Violation> validate_config(const DataCenterConfig& cfg);

struct ParseOptions {
    /// Ignore unknown keys instead of raising SchemaError.
    bool lenient = false;
};

/// Parses and validates config JSON.
/// Throws ParseError, SchemaError (naming the field path) or
/// ValidationError (naming the invariant).
DataCenterConfig parse_config(std::string_view json_text, ParseOptions opts = {});

/// As parse_config, reading from a file; IoError when it cannot be read.
DataCenterConfig load_config(const std::filesystem::path& path, ParseOptions opts = {});

/// Parses without running validate_config; used by the validate command.
DataCenterConfig parse_config_unchecked(std::string_view json_text, ParseOptions opts = {});

std::string serialize_config(const DataCenterConfig& cfg);
void save_config(const DataCenterConfig& cfg, const std::filesystem::path& path);

/// Copy of tmpl whose cabinets are tiled (extra rows appended) so that the
/// total server count equals target_servers, with at most
/// servers_per_cabinet servers per cabinet. Used by the scaling benchmark.
DataCenterConfig scale_config(const DataCenterConfig& tmpl, long long target_servers,
                              int servers_per_cabinet);

} // namespace dcsim
