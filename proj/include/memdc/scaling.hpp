#pragma once

// Behavioral power model of an integrated eNVM DC source: a two-stage
// amplifier whose bias current scales inversely with the minimum feedback
// resistance, and the number of such sources a cryostat stage can cool.

#include "memdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace memdc {

struct EnvmTech {
    std::string name;
    double r_min = 10e3; // ohm
    double r_max = 100e3;
    bool cryo_validated = false;

    void validate() const {
        if (!(r_min > 0.0 && r_max > r_min)) throw ModelError("eNVM technology needs 0 < r_min < r_max");
    }
};

[[nodiscard]] inline std::vector<EnvmTech> envm_registry() {
    return {
        {"VCM", 10e3, 100e3, true},
        {"FTJ", 1e6, 100e6, true},
    };
}

[[nodiscard]] inline EnvmTech find_envm(std::string_view name) {
    for (auto& t : envm_registry())
        if (t.name == name) return t;
    throw ConfigError("scale.technology", "unknown eNVM technology '" + std::string(name) + "'");
}

struct AmplifierScalingModel {
    double stage_current_multiplier = 0.0; // supply current = multiplier * I_B
    double i_b_floor = 20e-9;              // A
    double i_b_ref = 1e-6;                 // A at r_min_ref
    double r_min_ref = 10e3;               // ohm
    double v_dd = 3.0;
    double v_ss = -3.0;
    double static_power = 0.0; // W

    void validate() const {
        if (!(stage_current_multiplier > 0.0)) throw ModelError("stage current multiplier must be positive");
        if (!(i_b_floor > 0.0)) throw ModelError("bias current floor must be positive");
        if (!(i_b_ref > 0.0 && r_min_ref > 0.0)) throw ModelError("bias reference point must be positive");
        if (!(v_dd > v_ss)) throw ModelError("v_dd must exceed v_ss");
        if (!(static_power >= 0.0)) throw ModelError("static power must be non-negative");
    }
};

/// Solves multiplier and static power so the model passes through
/// (i_high, p_high) and (i_low, p_low).
[[nodiscard]] inline AmplifierScalingModel calibrate_power_model(double i_high, double p_high, double i_low,
                                                                 double p_low, AmplifierScalingModel base = {}) {
    if (!(i_high > i_low && p_high > p_low)) throw ModelError("power anchors must be increasing in bias current");
    const double rails = base.v_dd - base.v_ss;
    base.stage_current_multiplier = (p_high - p_low) / ((i_high - i_low) * rails);
    base.static_power = p_high - base.stage_current_multiplier * i_high * rails;
    if (base.static_power < 0.0) throw ModelError("power anchors imply negative static power");
    return base;
}

/// Default calibration: sub-100 uW (96 uW) at I_B = 1 uA and 20x lower (5 uW) at the 20 nA floor.
[[nodiscard]] inline AmplifierScalingModel default_scaling_model() {
    return calibrate_power_model(1e-6, 96e-6, 20e-9, 5e-6);
}

/// Alternative calibration with a 10 uW per-source floor.
[[nodiscard]] inline AmplifierScalingModel floor_10uw_scaling_model() {
    return calibrate_power_model(1e-6, 96e-6, 20e-9, 10e-6);
}

[[nodiscard]] inline AmplifierScalingModel find_scaling_model(std::string_view name) {
    if (name == "default") return default_scaling_model();
    if (name == "floor-10uw") return floor_10uw_scaling_model();
    throw ConfigError("scale.power_calibration", "unknown power calibration '" + std::string(name) + "'");
}

struct ScalingScenario {
    EnvmTech tech = find_envm("VCM");
    AmplifierScalingModel amp = default_scaling_model();
    double cooling_power = 1.5; // W
    std::size_t gates_per_dot = 2;

    void validate() const {
        tech.validate();
        amp.validate();
        if (!(cooling_power > 0.0)) throw ModelError("cooling power must be positive");
        if (gates_per_dot < 1) throw ModelError("gates_per_dot must be at least 1");
    }
};

[[nodiscard]] inline double bias_current_for(const AmplifierScalingModel& amp, double r_min) {
    if (!(r_min > 0.0)) throw ModelError("r_min must be positive");
    return std::max(amp.i_b_floor, amp.i_b_ref * amp.r_min_ref / r_min);
}

[[nodiscard]] inline double power_per_source(const AmplifierScalingModel& amp, double i_b) {
    if (!(i_b >= amp.i_b_floor * (1.0 - 1e-12))) throw ModelError("bias current below the floor");
    return amp.static_power + amp.stage_current_multiplier * i_b * (amp.v_dd - amp.v_ss);
}

/// Input resistor of the integrated TIA for a given minimum feedback resistance.
[[nodiscard]] constexpr double input_resistance_for(double r_min) noexcept { return r_min / 4.0; }

/// Layout footprint relative to the reference design (wider output device above 50 kOhm).
[[nodiscard]] constexpr double footprint_multiplier(double r_min) noexcept { return r_min >= 50e3 ? 4.0 : 1.0; }

struct SourceCount {
    std::uint64_t sources = 0;
    std::uint64_t quantum_dots = 0;
    double power_per_source = 0.0;

    friend bool operator==(const SourceCount&, const SourceCount&) = default;
};

[[nodiscard]] inline SourceCount max_sources_for_power(double cooling_power, double per_source,
                                                       std::size_t gates_per_dot = 2) {
    if (!(per_source > 0.0) || !(cooling_power > 0.0)) throw ModelError("powers must be positive");
    // Guard the floor against ratios like 1.5 / 1e-4 landing a hair below an integer.
    const double ratio = cooling_power / per_source;
    const auto n = static_cast<std::uint64_t>(std::floor(ratio * (1.0 + 1e-12)));
    return {n, n / gates_per_dot, per_source};
}

[[nodiscard]] inline SourceCount max_sources(const ScalingScenario& s) {
    s.validate();
    const double p = power_per_source(s.amp, bias_current_for(s.amp, s.tech.r_min));
    return max_sources_for_power(s.cooling_power, p, s.gates_per_dot);
}

/// dV(n) = base_resolution * 2^(base_n - n).
[[nodiscard]] inline double resolution_for(std::size_t n, double base_resolution = 10e-3, std::size_t base_n = 2) {
    if (n < 1) throw ModelError("need at least one memristor");
    return base_resolution * std::exp2(static_cast<double>(base_n) - static_cast<double>(n));
}

struct ScanRow {
    double r_min = 0.0;
    double r_in = 0.0;
    double i_b = 0.0;
    double power = 0.0;
    std::uint64_t max_sources = 0;
    std::uint64_t quantum_dots = 0;
    double footprint = 1.0;

    friend bool operator==(const ScanRow&, const ScanRow&) = default;
};

[[nodiscard]] inline std::vector<ScanRow> scan_rmin(const ScalingScenario& scenario, const std::vector<double>& grid) {
    scenario.validate();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw ModelError("r_min grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ModelError("r_min grid must be strictly ascending");
    }
    std::vector<ScanRow> rows;
    rows.reserve(grid.size());
    for (double r : grid) {
        ScanRow row;
        row.r_min = r;
        row.r_in = input_resistance_for(r);
        row.i_b = bias_current_for(scenario.amp, r);
        row.power = power_per_source(scenario.amp, row.i_b);
        const auto count = max_sources_for_power(scenario.cooling_power, row.power, scenario.gates_per_dot);
        row.max_sources = count.sources;
        row.quantum_dots = count.quantum_dots;
        row.footprint = footprint_multiplier(r);
        rows.push_back(row);
    }
    return rows;
}

/// Logarithmically spaced grid with `points` values from lo to hi inclusive.
[[nodiscard]] inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0 && hi > lo) || points < 2) throw ModelError("log_grid needs 0 < lo < hi and >= 2 points");
    std::vector<double> g(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo * std::exp(step * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

} // namespace memdc
