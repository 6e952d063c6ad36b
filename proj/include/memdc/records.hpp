#pragma once

// Line-oriented result records. Each file starts with '#' metadata lines
// (key=value pairs), then one header row naming every column with its unit,
// then comma-separated data rows. Doubles are written with 17 significant
// digits so every record parses back to the exact value it came from.

#include "memdc/circuit.hpp"
#include "memdc/error.hpp"
#include "memdc/experiments.hpp"
#include "memdc/programming.hpp"
#include "memdc/scaling.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace memdc {

[[nodiscard]] inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ModelError("record: cannot parse number '" + std::string(s) + "'");
    return v;
}

[[nodiscard]] inline std::uint64_t parse_u64(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ModelError("record: cannot parse integer '" + std::string(s) + "'");
    return v;
}

struct RecordTable {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] const std::string& get(const std::string& key) const {
        auto it = meta.find(key);
        if (it == meta.end()) throw ModelError("record: missing metadata '" + key + "'");
        return it->second;
    }
};

namespace detail {

[[nodiscard]] inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace detail

[[nodiscard]] inline std::string write_table(const RecordTable& t) {
    std::ostringstream os;
    for (const auto& [k, v] : t.meta) os << "# " << k << '=' << v << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

[[nodiscard]] inline RecordTable read_table(std::string_view text) {
    RecordTable t;
    bool header = false;
    for (const auto& line : detail::split(text, '\n')) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = std::string_view(line).substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
            const auto eq = body.find('=');
            if (eq != std::string_view::npos) t.meta[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
            continue;
        }
        auto cells = detail::split(line, ',');
        if (!header) {
            t.columns = std::move(cells);
            header = true;
        } else {
            if (cells.size() != t.columns.size()) throw ModelError("record: row width does not match header");
            t.rows.push_back(std::move(cells));
        }
    }
    if (!header) throw ModelError("record: missing header row");
    return t;
}

// Sweep table: one row per target with every replication sample.

[[nodiscard]] inline RecordTable sweep_table(const SweepResult& r, const std::string& regime, std::uint64_t seed,
                                             double resolution) {
    RecordTable t;
    t.meta = {{"record", "sweep"},
              {"regime", regime},
              {"seed", std::to_string(seed)},
              {"resolution_V", format_double(resolution)},
              {"fit_slope", format_double(r.fit.slope)},
              {"fit_intercept_V", format_double(r.fit.intercept)},
              {"fit_residual_std_V", format_double(r.fit.residual_std)},
              {"offset_subtracted_V", format_double(r.offset_subtracted)},
              {"unconverged", std::to_string(r.unconverged)}};
    t.columns = {"target_V", "mean_V", "std_V", "mre_pct"};
    const std::size_t reps = r.samples.empty() ? 0 : r.samples.front().size();
    for (std::size_t k = 0; k < reps; ++k) t.columns.push_back("rep" + std::to_string(k) + "_V");
    for (std::size_t i = 0; i < r.targets.size(); ++i) {
        std::vector<std::string> row{format_double(r.targets[i]), format_double(r.mean[i]), format_double(r.std[i]),
                                     i < r.mre.size() ? format_double(r.mre[i]) : "nan"};
        for (double s : r.samples[i]) row.push_back(format_double(s));
        t.rows.push_back(std::move(row));
    }
    return t;
}

[[nodiscard]] inline SweepResult parse_sweep(const RecordTable& t) {
    SweepResult r;
    r.fit.slope = parse_double(t.get("fit_slope"));
    r.fit.intercept = parse_double(t.get("fit_intercept_V"));
    r.fit.residual_std = parse_double(t.get("fit_residual_std_V"));
    r.offset_subtracted = parse_double(t.get("offset_subtracted_V"));
    r.unconverged = parse_u64(t.get("unconverged"));
    bool has_mre = true;
    for (const auto& row : t.rows) {
        r.targets.push_back(parse_double(row[0]));
        r.mean.push_back(parse_double(row[1]));
        r.std.push_back(parse_double(row[2]));
        if (row[3] == "nan") has_mre = false;
        else r.mre.push_back(parse_double(row[3]));
        std::vector<double> s;
        for (std::size_t k = 4; k < row.size(); ++k) s.push_back(parse_double(row[k]));
        r.samples.push_back(std::move(s));
    }
    if (!has_mre) r.mre.clear();
    return r;
}

// Stability trace: (t, V, I). The analysis is recomputed on parse.

[[nodiscard]] inline RecordTable stability_table(const StabilityResult& r, const std::string& regime,
                                                 std::uint64_t seed, double v_target) {
    RecordTable t;
    t.meta = {{"record", "stability"},
              {"regime", regime},
              {"seed", std::to_string(seed)},
              {"v_target_V", format_double(v_target)},
              {"drift_slope_V_per_s", format_double(r.fit.slope)},
              {"drift_intercept_V", format_double(r.fit.intercept)},
              {"noise_std_V", format_double(r.noise_std)},
              {"jarque_bera", format_double(r.normality.statistic)},
              {"normality_p", format_double(r.normality.p_value)},
              {"histogram_bins", std::to_string(r.noise_histogram.counts.size())}};
    t.columns = {"t_s", "v_out_V", "supply_current_A"};
    for (const auto& s : r.trace)
        t.rows.push_back({format_double(s.timestamp), format_double(s.v_out), format_double(s.supply_current)});
    return t;
}

[[nodiscard]] inline std::vector<OutputSample> parse_trace(const RecordTable& t) {
    std::vector<OutputSample> trace;
    trace.reserve(t.rows.size());
    for (const auto& row : t.rows)
        trace.push_back({parse_double(row[1]), parse_double(row[2]), parse_double(row[0])});
    return trace;
}

[[nodiscard]] inline StabilityResult parse_stability(const RecordTable& t) {
    return analyze_trace(parse_trace(t), parse_u64(t.get("histogram_bins")));
}

[[nodiscard]] inline RecordTable histogram_table(const Histogram& h, const std::string& regime, std::uint64_t seed,
                                                 double v_target) {
    RecordTable t;
    t.meta = {{"record", "noise_histogram"},
              {"regime", regime},
              {"seed", std::to_string(seed)},
              {"v_target_V", format_double(v_target)}};
    t.columns = {"bin_lo_V", "bin_hi_V", "count"};
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double lo = h.lo + static_cast<double>(i) * h.width;
        t.rows.push_back({format_double(lo), format_double(lo + h.width), std::to_string(h.counts[i])});
    }
    return t;
}

// Scaling scan.

[[nodiscard]] inline RecordTable scan_table(const std::vector<ScanRow>& rows, const ScalingScenario& s,
                                            const std::string& calibration) {
    RecordTable t;
    t.meta = {{"record", "scale_scan"},
              {"power_calibration", calibration},
              {"cooling_power_W", format_double(s.cooling_power)},
              {"gates_per_dot", std::to_string(s.gates_per_dot)},
              {"stage_current_multiplier", format_double(s.amp.stage_current_multiplier)},
              {"static_power_W", format_double(s.amp.static_power)}};
    t.columns = {"r_min_ohm", "r_in_ohm", "i_b_A", "power_W", "max_sources", "quantum_dots", "footprint_x"};
    for (const auto& r : rows)
        t.rows.push_back({format_double(r.r_min), format_double(r.r_in), format_double(r.i_b), format_double(r.power),
                          std::to_string(r.max_sources), std::to_string(r.quantum_dots), format_double(r.footprint)});
    return t;
}

[[nodiscard]] inline std::vector<ScanRow> parse_scan(const RecordTable& t) {
    std::vector<ScanRow> rows;
    for (const auto& c : t.rows)
        rows.push_back({parse_double(c[0]), parse_double(c[1]), parse_double(c[2]), parse_double(c[3]),
                        parse_u64(c[4]), parse_u64(c[5]), parse_double(c[6])});
    return rows;
}

// Program reports serialize to one JSON object per line.

[[nodiscard]] inline nlohmann::json to_json(const DeviceReport& d) {
    return {{"device_index", d.device_index},   {"target_resistance_ohm", d.target_resistance},
            {"tolerance", d.tolerance},         {"pulses_applied", d.pulses_applied},
            {"reads_applied", d.reads_applied}, {"iterations", d.iterations},
            {"final_resistance_ohm", d.final_resistance}, {"measured_resistance_ohm", d.measured_resistance},
            {"relative_error", d.relative_error}, {"converged", d.converged},
            {"pulse_time_s", d.pulse_time}};
}

[[nodiscard]] inline nlohmann::json to_json(const ProgramReport& r) {
    nlohmann::json devices = nlohmann::json::array();
    for (const auto& d : r.devices) devices.push_back(to_json(d));
    return {{"v_target_V", r.v_target},
            {"read_voltage_V", r.read_voltage},
            {"common_target_ohm", r.common_target},
            {"balance_target_ohm", r.balance_target},
            {"devices", devices},
            {"total_iterations", r.total_iterations},
            {"total_pulses", r.total_pulses},
            {"total_pulse_time_s", r.total_pulse_time},
            {"converged", r.converged},
            {"failed_stage", r.failed_stage}};
}

[[nodiscard]] inline ProgramReport program_report_from_json(const nlohmann::json& j) {
    ProgramReport r;
    r.v_target = j.at("v_target_V").get<double>();
    r.read_voltage = j.at("read_voltage_V").get<double>();
    r.common_target = j.at("common_target_ohm").get<double>();
    r.balance_target = j.at("balance_target_ohm").get<double>();
    for (const auto& d : j.at("devices")) {
        DeviceReport dr;
        dr.device_index = d.at("device_index").get<std::size_t>();
        dr.target_resistance = d.at("target_resistance_ohm").get<double>();
        dr.tolerance = d.at("tolerance").get<double>();
        dr.pulses_applied = d.at("pulses_applied").get<int>();
        dr.reads_applied = d.at("reads_applied").get<int>();
        dr.iterations = d.at("iterations").get<int>();
        dr.final_resistance = d.at("final_resistance_ohm").get<double>();
        dr.measured_resistance = d.at("measured_resistance_ohm").get<double>();
        dr.relative_error = d.at("relative_error").get<double>();
        dr.converged = d.at("converged").get<bool>();
        dr.pulse_time = d.at("pulse_time_s").get<double>();
        r.devices.push_back(dr);
    }
    r.total_iterations = j.at("total_iterations").get<int>();
    r.total_pulses = j.at("total_pulses").get<int>();
    r.total_pulse_time = j.at("total_pulse_time_s").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.failed_stage = j.at("failed_stage").get<std::string>();
    return r;
}

} // namespace memdc
