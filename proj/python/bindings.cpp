#include "dcsim/cli.hpp"
#include "dcsim/config.hpp"
#include "dcsim/control.hpp"
#include "dcsim/env.hpp"
#include "dcsim/errors.hpp"
#include "dcsim/hvac.hpp"
#include "dcsim/itmodel.hpp"
#include "dcsim/metrics.hpp"
#include "dcsim/traces.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace dcsim;

namespace {

py::dict thermal_dict(const ThermalState& s) {
    py::dict d;
    d["t_inlet"] = s.t_inlet;
    d["t_outlet"] = s.t_outlet;
    d["p_cpu"] = s.p_cpu;
    d["p_itfan"] = s.p_itfan;
    d["p_rack"] = s.p_rack;
    d["p_datacenter"] = s.p_datacenter;
    return d;
}

py::dict hvac_dict(const HvacState& s) {
    py::dict d;
    d["t_crac_return"] = s.t_crac_return;
    d["p_cool_raw"] = s.p_cool_raw;
    d["p_cool"] = s.p_cool;
    d["p_chiller"] = s.p_chiller;
    d["v_ct_air"] = s.v_ct_air;
    d["p_ct_fan"] = s.p_ct_fan;
    d["p_chiller_elec"] = s.p_chiller_elec;
    d["p_crac_fan"] = s.p_crac_fan;
    d["p_hvac_elec_total"] = s.p_hvac_elec_total;
    d["negative_cooling"] = s.negative_cooling;
    return d;
}

py::dict kpi_dict(const KpiRecord& k) {
    py::dict d;
    d["step_index"] = k.step_index;
    d["p_it"] = k.p_it;
    d["p_fan"] = k.p_fan;
    d["p_hvac_elec"] = k.p_hvac_elec;
    d["energy_kwh"] = k.energy_kwh;
    d["carbon_g"] = k.carbon_g;
    d["hotspot_c"] = k.hotspot_c;
    return d;
}

py::dict summary_dict(const EpisodeSummary& s) {
    py::dict d;
    d["total_energy_kwh"] = s.total_energy_kwh;
    d["total_carbon_g"] = s.total_carbon_g;
    d["peak_hotspot_c"] = s.peak_hotspot_c;
    d["mean_hotspot_c"] = s.mean_hotspot_c;
    d["steps"] = s.steps;
    d["complete"] = s.complete;
    return d;
}

py::array_t<double> obs_array(const Observation& o) {
    const auto a = o.to_array();
    return py::array_t<double>(static_cast<py::ssize_t>(a.size()), a.data());
}

std::optional<Instant> parse_start(const std::optional<std::string>& start) {
    if (!start) {
        return std::nullopt;
    }
    return parse_rfc3339(*start);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Data-center thermal and energy simulation engine";

    auto base = py::register_exception<Error>(m, "DcsimError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<UnitError>(m, "UnitError", base.ptr());
    py::register_exception<CoverageError>(m, "CoverageError", base.ptr());
    py::register_exception<RangeError>(m, "RangeError", base.ptr());
    py::register_exception<EpisodeOverflowError>(m, "EpisodeOverflowError", base.ptr());
    py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<DataCenterConfig>(m, "Config")
        .def_property_readonly("cabinet_count", [](const DataCenterConfig& c) { return c.cabinets.size(); })
        .def_property_readonly("total_servers", &DataCenterConfig::total_servers)
        .def_property_readonly("timestep_minutes", [](const DataCenterConfig& c) { return c.timestep_minutes; })
        .def_property_readonly("setpoint_bounds",
                               [](const DataCenterConfig& c) {
                                   return py::make_tuple(c.hvac.setpoint_min, c.hvac.setpoint_max);
                               })
        .def("to_json", &serialize_config)
        .def("scaled", &scale_config, py::arg("target_servers"), py::arg("servers_per_cabinet") = 10);

    m.def(
        "load_config",
        [](const std::filesystem::path& path, bool lenient) { return load_config(path, ParseOptions{lenient}); },
        py::arg("path"), py::arg("lenient") = false);
    m.def(
        "parse_config",
        [](const std::string& text, bool lenient) { return parse_config(text, ParseOptions{lenient}); },
        py::arg("text"), py::arg("lenient") = false);
    m.def(
        "validate_config",
        [](const DataCenterConfig& cfg) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& v : validate_config(cfg)) {
                out.emplace_back(v.code, v.message);
            }
            return out;
        },
        py::arg("config"));

    m.def(
        "step_it_room",
        [](const DataCenterConfig& cfg, double setpoint, double load) {
            return thermal_dict(step_it_room(cfg, {setpoint, load}));
        },
        py::arg("config"), py::arg("setpoint"), py::arg("load"));
    m.def(
        "step_it_room_naive",
        [](const DataCenterConfig& cfg, double setpoint, double load) {
            return thermal_dict(step_it_room_naive(cfg, {setpoint, load}));
        },
        py::arg("config"), py::arg("setpoint"), py::arg("load"));
    m.def(
        "step_hvac",
        [](const DataCenterConfig& cfg, double setpoint, double load, double ambient) {
            const ThermalState th = step_it_room(cfg, {setpoint, load});
            return hvac_dict(step_hvac(cfg, th, setpoint, ambient));
        },
        py::arg("config"), py::arg("setpoint"), py::arg("load"), py::arg("ambient"),
        "IT room followed by the cooling chain at one operating point.");
    m.def(
        "temperature_field_csv",
        [](const DataCenterConfig& cfg, double setpoint, double load) {
            return temperature_field_csv(temperature_field(cfg, step_it_room(cfg, {setpoint, load})));
        },
        py::arg("config"), py::arg("setpoint"), py::arg("load"));

    m.def("crac_return_temp", [](std::vector<double> dt, std::vector<double> out) {
        return crac_return_temp(dt, out);
    });
    m.def("chiller_load", &chiller_load, py::arg("p_cool"), py::arg("cop"));

    py::class_<TraceSet>(m, "TraceSet")
        .def_property_readonly("grid_points", &TraceSet::grid_points)
        .def_property_readonly("grid_start", [](const TraceSet& t) { return format_rfc3339(t.grid_start); });
    m.def(
        "load_traces",
        [](const std::filesystem::path& dir, int step_minutes) {
            return load_trace_dir(dir, std::chrono::minutes{step_minutes});
        },
        py::arg("directory"), py::arg("step_minutes") = 15);

    py::class_<Environment>(m, "Environment")
        .def(py::init([](const DataCenterConfig& cfg, const TraceSet& traces, std::size_t episode_steps,
                         double w_energy, double w_carbon, double w_hotspot, double hotspot_limit_c,
                         std::uint64_t seed, double observation_noise_std) {
                 EnvConfig ec;
                 ec.dc = cfg;
                 ec.traces = traces;
                 ec.episode_steps = episode_steps;
                 ec.reward_weights = {w_energy, w_carbon, w_hotspot};
                 ec.hotspot_limit_c = hotspot_limit_c;
                 ec.seed = seed;
                 ec.observation_noise_std = observation_noise_std;
                 return std::make_unique<Environment>(std::move(ec));
             }),
             py::arg("config"), py::arg("traces"), py::arg("episode_steps") = kEpisodeSteps7Days,
             py::arg("w_energy") = 0.0, py::arg("w_carbon") = 1.0, py::arg("w_hotspot") = 0.0,
             py::arg("hotspot_limit_c") = 30.0, py::arg("seed") = 0, py::arg("observation_noise_std") = 0.0)
        .def(
            "reset", [](Environment& e, std::optional<std::string> start) { return obs_array(e.reset(parse_start(start))); },
            py::arg("start") = py::none())
        .def(
            "step",
            [](Environment& e, double setpoint) {
                const StepOutcome o = e.step({setpoint});
                py::dict info = kpi_dict(o.kpi);
                info["timestamp"] = format_rfc3339(o.info.timestamp);
                info["setpoint_c"] = o.info.setpoint_c;
                info["action_clamped"] = o.info.action_clamped;
                info["workload"] = o.info.workload;
                info["ambient_c"] = o.info.ambient_c;
                info["ci"] = o.info.ci;
                info["hvac"] = hvac_dict(o.info.hvac);
                return py::make_tuple(obs_array(o.observation), o.reward, o.terminated, o.truncated, info);
            },
            py::arg("setpoint"), "Returns (observation, reward, terminated, truncated, info).")
        .def_property_readonly("episode_steps", &Environment::episode_steps)
        .def_property_readonly("steps_taken", &Environment::steps_taken)
        .def_property_readonly("grid_points", &Environment::grid_points)
        .def_property_readonly("clamp_count", &Environment::clamp_count)
        .def_property_readonly("observation_size", [](const Environment&) { return Observation::kSize; });

    m.def(
        "run_fixed",
        [](Environment& env, double setpoint, std::optional<std::string> start) {
            FixedPolicy p = fixed_policy(setpoint, env.config().dc.hvac);
            return summary_dict(run_episode(env, p, nullptr, parse_start(start)));
        },
        py::arg("env"), py::arg("setpoint"), py::arg("start") = py::none());
    m.def(
        "run_rbc",
        [](Environment& env, double target_return_c, double deadband_c, double trim_step_c, double respond_step_c,
           double initial_setpoint_c) {
            RbcController c({target_return_c, deadband_c, trim_step_c, respond_step_c, initial_setpoint_c},
                            env.config().dc.hvac);
            return summary_dict(run_episode(env, c));
        },
        py::arg("env"), py::arg("target_return_c") = 32.0, py::arg("deadband_c") = 1.0,
        py::arg("trim_step_c") = 0.25, py::arg("respond_step_c") = 0.5, py::arg("initial_setpoint_c") = 20.0);
    m.def(
        "sweep",
        [](Environment& env, const std::vector<double>& setpoints) {
            py::list out;
            for (const SweepRow& r : sweep_setpoints(env, setpoints)) {
                py::dict d = summary_dict(r.summary);
                d["setpoint_c"] = r.setpoint_c;
                out.append(d);
            }
            return out;
        },
        py::arg("env"), py::arg("setpoints"));

    m.def(
        "cli",
        [](const std::vector<std::string>& args, const std::string& stdin_text) {
            std::istringstream in(stdin_text);
            std::ostringstream out, err;
            const int code = cli::run(args, in, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), py::arg("stdin") = "",
        "Runs a dcsim subcommand in-process and returns (exit_code, stdout, stderr).");
}
