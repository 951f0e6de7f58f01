#include "dcsim/traces.hpp"

#include "dcsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dcsim {

namespace {

using namespace std::chrono;

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const noexcept { return pos_ >= s_.size(); }
    char peek() const noexcept { return done() ? '\0' : s_[pos_]; }
    void skip() noexcept { ++pos_; }

    int digits(int n) {
        int v = 0;
        for (int i = 0; i < n; ++i) {
            const char c = peek();
            if (c < '0' || c > '9') {
                fail("expected digit");
            }
            v = v * 10 + (c - '0');
            skip();
        }
        return v;
    }

    void expect(char c) {
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        skip();
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("invalid RFC 3339 timestamp '" + std::string(s_) + "': " + what);
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
}

const char* unit_name(TraceUnit u) {
    switch (u) {
    case TraceUnit::Fraction: return "fraction";
    case TraceUnit::Celsius: return "degC";
    case TraceUnit::GramsPerKwh: return "gCO2/kWh";
    }
    return "?";
}

} // namespace

Instant parse_rfc3339(std::string_view text) {
    Cursor c(text);
    const int y = c.digits(4);
    c.expect('-');
    const int mo = c.digits(2);
    c.expect('-');
    const int d = c.digits(2);
    if (c.peek() == 'T' || c.peek() == 't' || c.peek() == ' ') {
        c.skip();
    } else {
        c.fail("expected 'T' separator");
    }
    const int hh = c.digits(2);
    c.expect(':');
    const int mm = c.digits(2);
    c.expect(':');
    const int ss = c.digits(2);
    int millis = 0;
    if (c.peek() == '.') {
        c.skip();
        int scale = 100;
        int n = 0;
        while (c.peek() >= '0' && c.peek() <= '9') {
            millis += (c.peek() - '0') * scale;
            scale /= 10;
            c.skip();
            ++n;
        }
        if (n == 0) {
            c.fail("empty fractional seconds");
        }
    }
    minutes offset{0};
    if (c.peek() == 'Z' || c.peek() == 'z') {
        c.skip();
    } else if (c.peek() == '+' || c.peek() == '-') {
        const int sign = c.peek() == '-' ? -1 : 1;
        c.skip();
        const int oh = c.digits(2);
        c.expect(':');
        const int om = c.digits(2);
        if (oh > 23 || om > 59) {
            c.fail("offset out of range");
        }
        offset = minutes{sign * (oh * 60 + om)};
    } else {
        c.fail("missing UTC offset");
    }
    if (!c.done()) {
        c.fail("trailing characters");
    }

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        c.fail("invalid calendar date");
    }
    if (hh > 23 || mm > 59 || ss > 60) {
        c.fail("invalid time of day");
    }
    // Leap seconds fold onto the following second.
    const auto local = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
    return time_point_cast<milliseconds>(local - offset);
}

std::string format_rfc3339(Instant t) {
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss<milliseconds> tod{t - day_point};
    char buf[40];
    const int ms = static_cast<int>(tod.subseconds().count());
    int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                          static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                          static_cast<int>(tod.seconds().count()));
    if (ms != 0) {
        n += std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), ".%03d", ms);
    }
    std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), "Z");
    return buf;
}

TimeSeries parse_trace_csv(std::string_view text, TraceUnit unit) {
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.remove_prefix(3);
    }
    std::vector<Instant> stamps;
    std::vector<double> values;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!header_seen) {
            if (line != "timestamp,value") {
                throw ParseError("line 1: header must be exactly 'timestamp,value'");
            }
            header_seen = true;
            continue;
        }
        if (trim(line).empty()) {
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected exactly two fields");
        }
        Instant t;
        try {
            t = parse_rfc3339(trim(line.substr(0, comma)));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string_view vtext = trim(line.substr(comma + 1));
        double v = 0.0;
        const auto r = std::from_chars(vtext.data(), vtext.data() + vtext.size(), v);
        if (r.ec != std::errc() || r.ptr != vtext.data() + vtext.size() || !std::isfinite(v)) {
            throw ParseError("line " + std::to_string(line_no) + ": invalid value '" + std::string(vtext) + "'");
        }
        if (unit == TraceUnit::Fraction) {
            constexpr double tol = 1e-9;
            if (v < -tol || v > 1.0 + tol) {
                throw UnitError("line " + std::to_string(line_no) + ": workload " + std::string(vtext) +
                                " outside [0, 1]");
            }
            v = std::clamp(v, 0.0, 1.0);
        } else if (unit == TraceUnit::GramsPerKwh && v < 0.0) {
            throw UnitError("line " + std::to_string(line_no) + ": negative carbon intensity " +
                            std::string(vtext));
        }
        stamps.push_back(t);
        values.push_back(v);
    }
    if (!header_seen) {
        throw ParseError("line 1: missing header 'timestamp,value'");
    }

    std::vector<std::size_t> order(stamps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return stamps[a] < stamps[b]; });

    TimeSeries ts;
    ts.unit = unit;
    for (std::size_t idx : order) {
        if (!ts.timestamps.empty() && ts.timestamps.back() == stamps[idx]) {
            ts.values.back() = values[idx];
        } else {
            ts.timestamps.push_back(stamps[idx]);
            ts.values.push_back(values[idx]);
        }
    }
    return ts;
}

TimeSeries load_trace_csv(const std::filesystem::path& path, TraceUnit unit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open trace '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_trace_csv(ss.str(), unit);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const UnitError& e) {
        throw UnitError(path.string() + ": " + e.what());
    }
}

std::string serialize_trace_csv(const TimeSeries& ts) {
    std::string out = "timestamp,value\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out += format_rfc3339(ts.timestamps[i]);
        out += ',';
        append_double(out, ts.values[i]);
        out += '\n';
    }
    return out;
}

std::vector<double> align(const TimeSeries& ts, Instant grid_start, std::chrono::milliseconds grid_step,
                          std::size_t n_steps) {
    if (grid_step <= milliseconds::zero()) {
        throw DomainError("grid step must be positive");
    }
    std::vector<double> out;
    if (n_steps == 0) {
        return out;
    }
    const Instant grid_end = grid_start + grid_step * static_cast<long long>(n_steps - 1);
    if (ts.empty() || grid_start < ts.timestamps.front() || grid_end > ts.timestamps.back()) {
        std::string span = ts.empty() ? std::string("an empty series")
                                       : format_rfc3339(ts.timestamps.front()) + " .. " +
                                             format_rfc3339(ts.timestamps.back());
        throw CoverageError(std::string(unit_name(ts.unit)) + " trace covers " + span + ", grid needs " +
                            format_rfc3339(grid_start) + " .. " + format_rfc3339(grid_end));
    }
    out.reserve(n_steps);
    std::size_t hi = 0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const Instant t = grid_start + grid_step * static_cast<long long>(k);
        while (ts.timestamps[hi] < t) {
            ++hi;
        }
        if (ts.timestamps[hi] == t) {
            out.push_back(ts.values[hi]);
            continue;
        }
        const std::size_t lo = hi - 1;
        const double span = static_cast<double>((ts.timestamps[hi] - ts.timestamps[lo]).count());
        const double f = static_cast<double>((t - ts.timestamps[lo]).count()) / span;
        const double a = ts.values[lo];
        const double b = ts.values[hi];
        out.push_back(std::clamp(a + f * (b - a), std::min(a, b), std::max(a, b)));
    }
    return out;
}

std::size_t TraceSet::grid_points() const {
    if (workload.empty() || ambient_drybulb.empty() || carbon_intensity.empty()) {
        return 0;
    }
    const Instant end = std::min({workload.timestamps.back(), ambient_drybulb.timestamps.back(),
                                  carbon_intensity.timestamps.back()});
    if (end < grid_start) {
        return 0;
    }
    const milliseconds step = grid_step;
    return static_cast<std::size_t>((end - grid_start) / step) + 1;
}

TraceSet make_trace_set(TimeSeries workload, TimeSeries ambient, TimeSeries carbon_intensity,
                        std::chrono::minutes grid_step) {
    if (workload.empty() || ambient.empty() || carbon_intensity.empty()) {
        throw CoverageError("every trace needs at least one sample");
    }
    TraceSet set;
    set.grid_start = std::max({workload.timestamps.front(), ambient.timestamps.front(),
                               carbon_intensity.timestamps.front()});
    set.grid_step = grid_step;
    set.workload = std::move(workload);
    set.ambient_drybulb = std::move(ambient);
    set.carbon_intensity = std::move(carbon_intensity);
    if (set.grid_points() == 0) {
        throw CoverageError("workload, ambient and carbon intensity traces do not overlap");
    }
    return set;
}

TraceSet load_trace_dir(const std::filesystem::path& dir, std::chrono::minutes grid_step) {
    return make_trace_set(load_trace_csv(dir / kWorkloadFile, TraceUnit::Fraction),
                          load_trace_csv(dir / kAmbientFile, TraceUnit::Celsius),
                          load_trace_csv(dir / kCarbonFile, TraceUnit::GramsPerKwh), grid_step);
}

} // namespace dcsim
