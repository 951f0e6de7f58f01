#include "dcsim/config.hpp"

#include "dcsim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace dcsim {

using nlohmann::json;

double ServerModel::cpu_power(double t_inlet, double load) const noexcept {
    return std::clamp(cpu_curve(t_inlet, load), p_cpu_min, p_cpu_max);
}

double ServerModel::fan_power(double t_inlet, double load) const noexcept {
    return std::clamp(itfan_curve(t_inlet, load), p_fan_min, p_fan_max);
}

double HvacParams::ct_delta(double t_ambient) const {
    if (ct_delta_table.empty()) {
        return ct_delta_min;
    }
    const auto& front = ct_delta_table.front();
    const auto& back = ct_delta_table.back();
    double delta;
    if (t_ambient <= front[0]) {
        delta = front[1];
    } else if (t_ambient >= back[0]) {
        delta = back[1];
    } else {
        auto hi = std::upper_bound(ct_delta_table.begin(), ct_delta_table.end(), t_ambient,
                                   [](double x, const std::array<double, 2>& p) { return x < p[0]; });
        auto lo = hi - 1;
        const double f = (t_ambient - (*lo)[0]) / ((*hi)[0] - (*lo)[0]);
        delta = (*lo)[1] + f * ((*hi)[1] - (*lo)[1]);
    }
    return std::max(ct_delta_min, delta);
}

double HvacParams::clamp_setpoint(double t) const noexcept {
    return std::clamp(t, setpoint_min, setpoint_max);
}

long long DataCenterConfig::total_servers() const noexcept {
    long long n = 0;
    for (const auto& c : cabinets) {
        n += c.n_servers;
    }
    return n;
}

const ServerModel* DataCenterConfig::find_model(std::string_view id) const noexcept {
    for (const auto& m : server_models) {
        if (m.id == id) {
            return &m;
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

class ViolationSink {
public:
    void add(std::string code, std::string message) {
        out_.push_back({std::move(code), std::move(message)});
    }

    template <typename... Parts>
    void addf(std::string code, const Parts&... parts) {
        std::ostringstream os;
        os.precision(17);
        (os << ... << parts);
        add(std::move(code), os.str());
    }

    std::vector<Violation> take() { return std::move(out_); }

private:
    std::vector<Violation> out_;
};

void check_finite(ViolationSink& sink, const std::string& where, double v) {
    if (!std::isfinite(v)) {
        sink.addf("finite", where, ": value must be finite");
    }
}

void check_positive(ViolationSink& sink, const char* name, double v) {
    if (!(v > 0.0)) {
        sink.addf(std::string(name) + "_positive", "hvac." , name, " > 0 violated (got ", v, ")");
    }
}

} // namespace

std::vector<Violation> validate_config(const DataCenterConfig& cfg) {
    ViolationSink sink;

    std::set<std::string> model_ids;
    for (const auto& m : cfg.server_models) {
        const std::string where = "server model '" + m.id + "'";
        if (!model_ids.insert(m.id).second) {
            sink.addf("server_model_unique_id", where, ": duplicate server model id");
        }
        for (const auto* curve : {&m.cpu_curve, &m.itfan_curve}) {
            if (!std::isfinite(curve->c0) || !std::isfinite(curve->c1) || !std::isfinite(curve->c2)) {
                sink.addf("curve_finite", where, ": curve coefficients must be finite");
            }
        }
        for (double v : {m.p_cpu_min, m.p_cpu_max, m.p_fan_min, m.p_fan_max}) {
            check_finite(sink, where, v);
        }
        if (m.p_cpu_min < 0.0 || m.p_fan_min < 0.0) {
            sink.addf("power_min_nonnegative", where, ": p_min ≥ 0 violated");
        }
        if (m.p_cpu_min > m.p_cpu_max) {
            sink.addf("power_min_le_max", where, ": p_cpu_min ≤ p_cpu_max violated");
        }
        if (m.p_fan_min > m.p_fan_max) {
            sink.addf("power_min_le_max", where, ": p_fan_min ≤ p_fan_max violated");
        }
    }

    if (cfg.cabinets.empty()) {
        sink.add("cabinets_nonempty", "at least one cabinet is required (K ≥ 1)");
    }
    std::set<std::pair<int, int>> placements;
    for (const auto& c : cfg.cabinets) {
        const std::string where = "cabinet '" + c.id + "'";
        if (c.n_servers < 1) {
            sink.addf("n_servers_positive", where, ": n_servers ≥ 1 violated (got ", c.n_servers, ")");
        }
        check_finite(sink, where + " dt_supply", c.dt_supply);
        check_finite(sink, where + " dt_return", c.dt_return);
        check_finite(sink, where + " v_sfan", c.v_sfan);
        if (!(c.v_sfan > 0.0)) {
            sink.addf("v_sfan_positive", where, ": v_sfan > 0 violated (got ", c.v_sfan, ")");
        }
        if (c.dt_supply < 0.0) {
            sink.addf("dt_nonnegative", where, ": dt_supply ≥ 0 violated (got ", c.dt_supply, ")");
        }
        if (c.dt_return < 0.0) {
            sink.addf("dt_nonnegative", where, ": dt_return ≥ 0 violated (got ", c.dt_return, ")");
        }
        if (cfg.find_model(c.server_model_id) == nullptr) {
            sink.addf("server_model_resolves", where, ": server_model_id '", c.server_model_id,
                      "' does not resolve to a server model");
        }
        if (!placements.emplace(c.row, c.position).second) {
            sink.addf("unique_placement", where, ": unique placement violated, (row ", c.row,
                      ", position ", c.position, ") already taken");
        }
    }

    const HvacParams& h = cfg.hvac;
    for (double v : {h.c_air, h.rho_air, h.m_crac_fan, h.p_crac_fan, h.cop, h.ct_delta_min,
                     h.v_ct_air_ref, h.p_ct_ref, h.setpoint_min, h.setpoint_max}) {
        check_finite(sink, "hvac", v);
    }
    check_positive(sink, "c_air", h.c_air);
    check_positive(sink, "rho_air", h.rho_air);
    check_positive(sink, "m_crac_fan", h.m_crac_fan);
    check_positive(sink, "cop", h.cop);
    check_positive(sink, "v_ct_air_ref", h.v_ct_air_ref);
    check_positive(sink, "p_ct_ref", h.p_ct_ref);
    check_positive(sink, "ct_delta_min", h.ct_delta_min);
    if (h.p_crac_fan < 0.0) {
        sink.addf("p_crac_fan_nonnegative", "hvac.p_crac_fan ≥ 0 violated (got ", h.p_crac_fan, ")");
    }
    if (h.ct_delta_table.empty()) {
        sink.add("ct_delta_table_nonempty", "hvac.ct_delta_table must have at least one point");
    }
    for (std::size_t i = 0; i < h.ct_delta_table.size(); ++i) {
        const auto& p = h.ct_delta_table[i];
        if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
            sink.addf("finite", "hvac.ct_delta_table[", i, "]: values must be finite");
        }
        if (i > 0 && !(p[0] > h.ct_delta_table[i - 1][0])) {
            sink.addf("ct_delta_table_increasing", "hvac.ct_delta_table[", i,
                      "]: ambient temperatures must be strictly increasing");
        }
    }
    if (!(h.setpoint_min < h.setpoint_max)) {
        sink.addf("setpoint_range", "hvac: setpoint_min < setpoint_max violated (", h.setpoint_min,
                  " vs ", h.setpoint_max, ")");
    }
    if (cfg.timestep_minutes <= 0 || 1440 % cfg.timestep_minutes != 0) {
        sink.addf("timestep_divides_day", "timestep_minutes divides 1440 violated (got ",
                  cfg.timestep_minutes, ")");
    }
    return sink.take();
}

// ---------------------------------------------------------------------------
// JSON reading
// ---------------------------------------------------------------------------

namespace {

class Reader {
public:
    explicit Reader(ParseOptions opts) : opts_(opts) {}

    DataCenterConfig read_root(const json& j) {
        expect_object(j, "<root>");
        check_keys(j, "<root>", {"timestep_minutes", "server_models", "cabinets", "hvac"});
        DataCenterConfig cfg;
        if (j.contains("timestep_minutes")) {
            cfg.timestep_minutes = get_int(j, "timestep_minutes", "timestep_minutes");
        }
        const json& models = require_array(j, "server_models", "server_models");
        for (std::size_t i = 0; i < models.size(); ++i) {
            cfg.server_models.push_back(read_model(models[i], indexed("server_models", i)));
        }
        const json& cabs = require_array(j, "cabinets", "cabinets");
        for (std::size_t i = 0; i < cabs.size(); ++i) {
            cfg.cabinets.push_back(read_cabinet(cabs[i], indexed("cabinets", i)));
        }
        cfg.hvac = read_hvac(require(j, "hvac", "hvac"), "hvac");
        return cfg;
    }

private:
    static std::string indexed(const std::string& path, std::size_t i) {
        return path + "[" + std::to_string(i) + "]";
    }

    static std::string join(const std::string& path, const char* key) {
        return path == "<root>" ? std::string(key) : path + "." + key;
    }

    static void expect_object(const json& j, const std::string& path) {
        if (!j.is_object()) {
            throw SchemaError(path + ": expected an object");
        }
    }

    void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) const {
        if (opts_.lenient) {
            return;
        }
        for (const auto& item : j.items()) {
            const bool known = std::any_of(allowed.begin(), allowed.end(),
                                           [&](const char* k) { return item.key() == k; });
            if (!known) {
                throw SchemaError(join(path, item.key().c_str()) + ": unknown field");
            }
        }
    }

    static const json& require(const json& j, const char* key, const std::string& path) {
        auto it = j.find(key);
        if (it == j.end()) {
            throw SchemaError(path + ": missing required field");
        }
        return *it;
    }

    static const json& require_array(const json& j, const char* key, const std::string& path) {
        const json& v = require(j, key, path);
        if (!v.is_array()) {
            throw SchemaError(path + ": expected an array");
        }
        return v;
    }

    static double get_double(const json& j, const char* key, const std::string& path) {
        const json& v = require(j, key, path);
        if (!v.is_number()) {
            throw SchemaError(path + ": expected a number");
        }
        return v.get<double>();
    }

    static int get_int(const json& j, const char* key, const std::string& path) {
        const json& v = require(j, key, path);
        if (!v.is_number_integer()) {
            throw SchemaError(path + ": expected an integer");
        }
        const auto x = v.get<long long>();
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
            throw SchemaError(path + ": integer out of range");
        }
        return static_cast<int>(x);
    }

    static std::string get_string(const json& j, const char* key, const std::string& path) {
        const json& v = require(j, key, path);
        if (!v.is_string()) {
            throw SchemaError(path + ": expected a string");
        }
        return v.get<std::string>();
    }

    AffineCurve read_curve(const json& j, const std::string& path) const {
        expect_object(j, path);
        check_keys(j, path, {"c0", "c1", "c2"});
        return {get_double(j, "c0", join(path, "c0")), get_double(j, "c1", join(path, "c1")),
                get_double(j, "c2", join(path, "c2"))};
    }

    ServerModel read_model(const json& j, const std::string& path) const {
        expect_object(j, path);
        check_keys(j, path,
                   {"id", "cpu_curve", "itfan_curve", "p_cpu_min", "p_cpu_max", "p_fan_min", "p_fan_max"});
        ServerModel m;
        m.id = get_string(j, "id", join(path, "id"));
        m.cpu_curve = read_curve(require(j, "cpu_curve", join(path, "cpu_curve")), join(path, "cpu_curve"));
        m.itfan_curve =
            read_curve(require(j, "itfan_curve", join(path, "itfan_curve")), join(path, "itfan_curve"));
        m.p_cpu_min = get_double(j, "p_cpu_min", join(path, "p_cpu_min"));
        m.p_cpu_max = get_double(j, "p_cpu_max", join(path, "p_cpu_max"));
        m.p_fan_min = get_double(j, "p_fan_min", join(path, "p_fan_min"));
        m.p_fan_max = get_double(j, "p_fan_max", join(path, "p_fan_max"));
        return m;
    }

    CabinetConfig read_cabinet(const json& j, const std::string& path) const {
        expect_object(j, path);
        check_keys(j, path,
                   {"id", "row", "position", "server_model_id", "n_servers", "dt_supply", "dt_return", "v_sfan"});
        CabinetConfig c;
        c.id = get_string(j, "id", join(path, "id"));
        c.row = get_int(j, "row", join(path, "row"));
        c.position = get_int(j, "position", join(path, "position"));
        c.server_model_id = get_string(j, "server_model_id", join(path, "server_model_id"));
        c.n_servers = get_int(j, "n_servers", join(path, "n_servers"));
        c.dt_supply = get_double(j, "dt_supply", join(path, "dt_supply"));
        c.dt_return = get_double(j, "dt_return", join(path, "dt_return"));
        c.v_sfan = get_double(j, "v_sfan", join(path, "v_sfan"));
        return c;
    }

    HvacParams read_hvac(const json& j, const std::string& path) const {
        expect_object(j, path);
        check_keys(j, path,
                   {"c_air", "rho_air", "m_crac_fan", "p_crac_fan", "cop", "ct_delta_table", "ct_delta_min",
                    "v_ct_air_ref", "p_ct_ref", "setpoint_min", "setpoint_max"});
        HvacParams h;
        h.c_air = get_double(j, "c_air", join(path, "c_air"));
        h.rho_air = get_double(j, "rho_air", join(path, "rho_air"));
        h.m_crac_fan = get_double(j, "m_crac_fan", join(path, "m_crac_fan"));
        h.p_crac_fan = get_double(j, "p_crac_fan", join(path, "p_crac_fan"));
        h.cop = get_double(j, "cop", join(path, "cop"));
        const std::string table_path = join(path, "ct_delta_table");
        const json& table = require_array(j, "ct_delta_table", table_path);
        for (std::size_t i = 0; i < table.size(); ++i) {
            const json& p = table[i];
            const std::string pp = indexed(table_path, i);
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw SchemaError(pp + ": expected [ambient_c, delta_k]");
            }
            h.ct_delta_table.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        h.ct_delta_min = get_double(j, "ct_delta_min", join(path, "ct_delta_min"));
        h.v_ct_air_ref = get_double(j, "v_ct_air_ref", join(path, "v_ct_air_ref"));
        h.p_ct_ref = get_double(j, "p_ct_ref", join(path, "p_ct_ref"));
        h.setpoint_min = get_double(j, "setpoint_min", join(path, "setpoint_min"));
        h.setpoint_max = get_double(j, "setpoint_max", join(path, "setpoint_max"));
        return h;
    }

    ParseOptions opts_;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoError("error reading '" + path.string() + "'");
    }
    return ss.str();
}

} // namespace

DataCenterConfig parse_config_unchecked(std::string_view json_text, ParseOptions opts) {
    json j;
    try {
        j = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed config JSON: ") + e.what());
    }
    return Reader(opts).read_root(j);
}

DataCenterConfig parse_config(std::string_view json_text, ParseOptions opts) {
    DataCenterConfig cfg = parse_config_unchecked(json_text, opts);
    auto violations = validate_config(cfg);
    if (!violations.empty()) {
        std::string msg = violations.front().message;
        if (violations.size() > 1) {
            msg += " (and " + std::to_string(violations.size() - 1) + " more)";
        }
        throw ValidationError(msg);
    }
    return cfg;
}

DataCenterConfig load_config(const std::filesystem::path& path, ParseOptions opts) {
    return parse_config(read_file(path), opts);
}

std::string serialize_config(const DataCenterConfig& cfg) {
    auto curve = [](const AffineCurve& c) { return json{{"c0", c.c0}, {"c1", c.c1}, {"c2", c.c2}}; };
    json models = json::array();
    for (const auto& m : cfg.server_models) {
        models.push_back({{"id", m.id},
                          {"cpu_curve", curve(m.cpu_curve)},
                          {"itfan_curve", curve(m.itfan_curve)},
                          {"p_cpu_min", m.p_cpu_min},
                          {"p_cpu_max", m.p_cpu_max},
                          {"p_fan_min", m.p_fan_min},
                          {"p_fan_max", m.p_fan_max}});
    }
    json cabs = json::array();
    for (const auto& c : cfg.cabinets) {
        cabs.push_back({{"id", c.id},
                        {"row", c.row},
                        {"position", c.position},
                        {"server_model_id", c.server_model_id},
                        {"n_servers", c.n_servers},
                        {"dt_supply", c.dt_supply},
                        {"dt_return", c.dt_return},
                        {"v_sfan", c.v_sfan}});
    }
    const HvacParams& h = cfg.hvac;
    json table = json::array();
    for (const auto& p : h.ct_delta_table) {
        table.push_back({p[0], p[1]});
    }
    json root = {{"timestep_minutes", cfg.timestep_minutes},
                 {"server_models", models},
                 {"cabinets", cabs},
                 {"hvac",
                  {{"c_air", h.c_air},
                   {"rho_air", h.rho_air},
                   {"m_crac_fan", h.m_crac_fan},
                   {"p_crac_fan", h.p_crac_fan},
                   {"cop", h.cop},
                   {"ct_delta_table", table},
                   {"ct_delta_min", h.ct_delta_min},
                   {"v_ct_air_ref", h.v_ct_air_ref},
                   {"p_ct_ref", h.p_ct_ref},
                   {"setpoint_min", h.setpoint_min},
                   {"setpoint_max", h.setpoint_max}}}};
    return root.dump(2) + "\n";
}

void save_config(const DataCenterConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << serialize_config(cfg);
    if (!out) {
        throw IoError("error writing '" + path.string() + "'");
    }
}

DataCenterConfig scale_config(const DataCenterConfig& tmpl, long long target_servers, int servers_per_cabinet) {
    if (tmpl.cabinets.empty()) {
        throw ValidationError("scale_config: template has no cabinets");
    }
    if (target_servers < 1 || servers_per_cabinet < 1) {
        throw DomainError("scale_config: target and servers per cabinet must be ≥ 1");
    }
    int max_row = tmpl.cabinets.front().row;
    int min_row = max_row;
    for (const auto& c : tmpl.cabinets) {
        max_row = std::max(max_row, c.row);
        min_row = std::min(min_row, c.row);
    }
    const int rows_per_tile = max_row - min_row + 1;

    DataCenterConfig out = tmpl;
    out.cabinets.clear();
    long long remaining = target_servers;
    std::size_t k = 0;
    while (remaining > 0) {
        const std::size_t tile = k / tmpl.cabinets.size();
        CabinetConfig c = tmpl.cabinets[k % tmpl.cabinets.size()];
        c.row += static_cast<int>(tile) * rows_per_tile;
        c.id += "_t" + std::to_string(tile);
        c.n_servers = static_cast<int>(std::min<long long>(remaining, servers_per_cabinet));
        remaining -= c.n_servers;
        out.cabinets.push_back(std::move(c));
        ++k;
    }
    return out;
}

} // namespace dcsim
