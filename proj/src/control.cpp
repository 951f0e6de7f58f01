#include "dcsim/control.hpp"

#include "dcsim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace dcsim {

void validate_rbc(const RbcParams& p, const HvacParams& hvac) {
    if (!(p.deadband_c >= 0.0)) {
        throw ValidationError("rbc: deadband_c ≥ 0 violated");
    }
    if (!(p.trim_step_c > 0.0) || !(p.respond_step_c > 0.0)) {
        throw ValidationError("rbc: trim_step_c and respond_step_c must be > 0");
    }
    if (!std::isfinite(p.target_return_c)) {
        throw ValidationError("rbc: target_return_c must be finite");
    }
    if (!(p.initial_setpoint_c >= hvac.setpoint_min && p.initial_setpoint_c <= hvac.setpoint_max)) {
        throw ValidationError("rbc: initial_setpoint_c outside the setpoint bounds");
    }
}

Action rbc_decide(const RbcParams& p, double prev_setpoint, double prev_t_return, double setpoint_min,
                  double setpoint_max) {
    double next = prev_setpoint;
    if (prev_t_return > p.target_return_c + p.deadband_c) {
        next = prev_setpoint - p.respond_step_c;
    } else if (prev_t_return < p.target_return_c - p.deadband_c) {
        next = prev_setpoint + p.trim_step_c;
    }
    return {std::clamp(next, setpoint_min, setpoint_max)};
}

FixedPolicy fixed_policy(double setpoint, const HvacParams& hvac) {
    if (!(setpoint >= hvac.setpoint_min && setpoint <= hvac.setpoint_max)) {
        throw RangeError("fixed setpoint " + std::to_string(setpoint) + " outside [" +
                         std::to_string(hvac.setpoint_min) + ", " + std::to_string(hvac.setpoint_max) + "]");
    }
    return FixedPolicy(setpoint);
}

RbcController::RbcController(RbcParams params, const HvacParams& hvac)
    : params_(params),
      setpoint_min_(hvac.setpoint_min),
      setpoint_max_(hvac.setpoint_max),
      setpoint_(params.initial_setpoint_c) {
    validate_rbc(params_, hvac);
}

void RbcController::reset(const Observation&) {
    setpoint_ = params_.initial_setpoint_c;
}

Action RbcController::decide(const Observation& obs) {
    setpoint_ = rbc_decide(params_, setpoint_, obs.prev_t_return_c, setpoint_min_, setpoint_max_).t_crac_supply;
    return {setpoint_};
}

EpisodeSummary run_episode(Environment& env, Controller& controller, std::vector<KpiRow>* log,
                           std::optional<Instant> start) {
    Observation obs = env.reset(start);
    controller.reset(obs);
    std::vector<KpiRecord> records;
    records.reserve(env.episode_steps());
    bool truncated = false;
    while (!truncated) {
        StepOutcome o = env.step(controller.decide(obs));
        records.push_back(o.kpi);
        if (log != nullptr) {
            log->push_back(make_kpi_row(o));
        }
        obs = o.observation;
        truncated = o.truncated;
    }
    return episode_kpis(records);
}

std::vector<SweepRow> sweep_setpoints(Environment& env, std::span<const double> setpoints) {
    std::vector<SweepRow> rows;
    rows.reserve(setpoints.size());
    std::vector<FixedPolicy> policies;
    for (double sp : setpoints) {
        policies.push_back(fixed_policy(sp, env.config().dc.hvac));
    }
    for (FixedPolicy& policy : policies) {
        rows.push_back({policy.setpoint(), run_episode(env, policy)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// External agent protocol
// ---------------------------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

class Session {
public:
    Session(Environment& env, std::ostream& out, std::vector<KpiRow>* log) : env_(env), out_(out), log_(log) {}

    void start() { do_reset(std::nullopt); }

    /// False once the agent closed the session.
    bool handle(const std::string& line) {
        ojson msg;
        try {
            msg = ojson::parse(line);
        } catch (const ojson::parse_error&) {
            send_err("malformed JSON line");
            return true;
        }
        if (!msg.is_object()) {
            send_err("message must be a JSON object");
            return true;
        }
        auto type_it = msg.find("type");
        if (type_it == msg.end() || !type_it->is_string()) {
            send_err("message needs a string \"type\"");
            return true;
        }
        const std::string type = type_it->get<std::string>();
        if (type == "act") {
            handle_act(msg);
        } else if (type == "reset") {
            handle_reset(msg);
        } else if (type == "close") {
            if (!only_keys(msg, {"type"})) {
                return true;
            }
            finish_episode();
            return false;
        } else {
            send_err("unknown message type \"" + type + "\"");
        }
        return true;
    }

    void finish_episode() {
        if (records_.empty()) {
            return;
        }
        EpisodeSummary s = episode_kpis(records_);
        s.complete = truncated_;
        summaries_.push_back(s);
        records_.clear();
    }

    std::vector<EpisodeSummary> take_summaries() { return std::move(summaries_); }

private:
    bool only_keys(const ojson& msg, std::initializer_list<const char*> allowed) {
        for (const auto& item : msg.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
                send_err("unexpected field \"" + item.key() + "\"");
                return false;
            }
        }
        return true;
    }

    void handle_act(const ojson& msg) {
        if (!only_keys(msg, {"type", "v"})) {
            return;
        }
        auto v = msg.find("v");
        if (v == msg.end() || !v->is_array()) {
            send_err("act needs \"v\": [t_supply]");
            return;
        }
        if (v->size() != 1) {
            send_err("act vector must have exactly 1 element, got " + std::to_string(v->size()));
            return;
        }
        const ojson& x = (*v)[0];
        if (!x.is_number()) {
            send_err("action must be a number");
            return;
        }
        const double t = x.get<double>();
        if (!std::isfinite(t)) {
            send_err("action must be finite");
            return;
        }
        if (truncated_) {
            send_err("episode is truncated; send reset or close");
            return;
        }
        StepOutcome o = env_.step({t});
        records_.push_back(o.kpi);
        if (log_ != nullptr) {
            log_->push_back(make_kpi_row(o));
        }
        truncated_ = o.truncated;
        send_obs(o.observation, o.reward, o.truncated, env_.steps_taken());
        if (truncated_) {
            finish_episode();
        }
    }

    void handle_reset(const ojson& msg) {
        if (!only_keys(msg, {"type", "start"})) {
            return;
        }
        std::optional<Instant> start;
        auto s = msg.find("start");
        if (s != msg.end()) {
            if (!s->is_string()) {
                send_err("reset \"start\" must be an RFC 3339 string");
                return;
            }
            try {
                start = parse_rfc3339(s->get<std::string>());
            } catch (const ParseError& e) {
                send_err(e.what());
                return;
            }
        }
        do_reset(start);
    }

    void do_reset(std::optional<Instant> start) {
        Observation obs;
        try {
            obs = env_.reset(start);
        } catch (const RangeError& e) {
            send_err(e.what());
            return;
        }
        finish_episode();
        truncated_ = false;
        send_obs(obs, 0.0, false, 0);
    }

    void send_obs(const Observation& obs, double reward, bool truncated, std::size_t step) {
        const auto v = obs.to_array();
        ojson m;
        m["type"] = "obs";
        m["v"] = v;
        m["reward"] = reward;
        m["truncated"] = truncated;
        m["step"] = step;
        out_ << m.dump() << '\n' << std::flush;
    }

    void send_err(const std::string& text) {
        ojson m;
        m["type"] = "err";
        m["msg"] = text;
        out_ << m.dump(-1, ' ', false, ojson::error_handler_t::replace) << '\n' << std::flush;
    }

    Environment& env_;
    std::ostream& out_;
    std::vector<KpiRow>* log_;
    std::vector<KpiRecord> records_;
    std::vector<EpisodeSummary> summaries_;
    bool truncated_ = false;
};

} // namespace

std::vector<EpisodeSummary> serve_external_agent(Environment& env, std::istream& in, std::ostream& out,
                                                 std::vector<KpiRow>* log) {
    Session session(env, out, log);
    session.start();
    std::string line;
    bool open = true;
    while (open && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        open = session.handle(line);
    }
    if (open) {
        session.finish_episode();
    }
    return session.take_summaries();
}

} // namespace dcsim
