#pragma once

// DC behavioral model of the discrete TIA op-amp versus temperature.
//
// The closed-loop gain realization factor eta(T) is flat below the plateau
// temperature and log-linear in T between calibration anchors above it.
// The idle current is piecewise log-linear through its anchors. Raising the
// supply above the reference rail multiplies eta by a linear boost factor.

#include "memdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

namespace memdc {

struct Anchor {
    double temperature; // K
    double value;
};

struct AmplifierModel {
    double nominal_closed_loop_gain = 2.0;
    double plateau_temperature = 4.2;

    // Sorted by temperature; the first anchor sits at the plateau temperature.
    std::vector<Anchor> gain_factor_anchors{{4.2, 0.84}, {300.0, 1.0}};
    std::vector<Anchor> idle_current_anchors{{4.2, 1.4e-3}, {77.0, 350e-6}, {300.0, 1.0e-3}};

    double offset = 8e-3; // V, added after the gain
    double v_dd = 2.7;
    double v_ss = -2.7;
    double output_headroom = 0.2;

    // kappa(V) = 1 + boost_per_volt * (V - boost_reference_rail), V = (v_dd - v_ss) / 2
    double boost_reference_rail = 2.7;
    double boost_per_volt = 0.0;

    double max_gain_factor = 1.05;

    void validate() const {
        if (!(v_dd > v_ss)) throw ModelError("v_dd must exceed v_ss");
        if (!(output_headroom >= 0.0) || v_dd - output_headroom <= v_ss + output_headroom)
            throw ModelError("output headroom leaves no output swing");
        if (gain_factor_anchors.empty() || idle_current_anchors.empty())
            throw ModelError("amplifier anchor tables must not be empty");
        auto check_sorted = [](const std::vector<Anchor>& a, const char* what) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (!(a[i].temperature > 0.0) || !(a[i].value > 0.0))
                    throw ModelError(std::string(what) + " anchors must be positive");
                if (i > 0 && !(a[i].temperature > a[i - 1].temperature))
                    throw ModelError(std::string(what) + " anchors must be strictly increasing in temperature");
            }
        };
        check_sorted(gain_factor_anchors, "gain factor");
        check_sorted(idle_current_anchors, "idle current");
        for (const auto& a : gain_factor_anchors)
            if (a.value > max_gain_factor) throw ModelError("gain factor anchor above the maximum");
    }

    [[nodiscard]] double rail() const noexcept { return 0.5 * (v_dd - v_ss); }
    [[nodiscard]] double output_min() const noexcept { return v_ss + output_headroom; }
    [[nodiscard]] double output_max() const noexcept { return v_dd - output_headroom; }
};

namespace detail {

// Piecewise linear in log(T); flat outside the anchor range.
[[nodiscard]] inline double log_temperature_interp(const std::vector<Anchor>& anchors, double t) {
    if (t <= anchors.front().temperature) return anchors.front().value;
    if (t >= anchors.back().temperature) return anchors.back().value;
    const auto hi = std::upper_bound(anchors.begin(), anchors.end(), t,
                                     [](double x, const Anchor& a) { return x < a.temperature; });
    const auto lo = std::prev(hi);
    const double w = std::log(t / lo->temperature) / std::log(hi->temperature / lo->temperature);
    return lo->value + w * (hi->value - lo->value);
}

} // namespace detail

/// eta(T): realized / nominal closed-loop gain at the reference rail.
[[nodiscard]] inline double amplifier_gain_factor(const AmplifierModel& model, double temperature) {
    if (!(temperature > 0.0)) throw ModelError("temperature must be positive");
    if (temperature <= model.plateau_temperature) return model.gain_factor_anchors.front().value;
    return std::min(detail::log_temperature_interp(model.gain_factor_anchors, temperature), model.max_gain_factor);
}

[[nodiscard]] inline double supply_boost(const AmplifierModel& model) noexcept {
    return 1.0 + model.boost_per_volt * (model.rail() - model.boost_reference_rail);
}

/// eta(T) * kappa(rail), capped at max_gain_factor.
[[nodiscard]] inline double effective_gain_factor(const AmplifierModel& model, double temperature) {
    return std::min(amplifier_gain_factor(model, temperature) * supply_boost(model), model.max_gain_factor);
}

[[nodiscard]] inline double amplifier_idle_current(const AmplifierModel& model, double temperature) {
    if (!(temperature > 0.0)) throw ModelError("temperature must be positive");
    if (temperature <= model.plateau_temperature) return model.idle_current_anchors.front().value;
    return detail::log_temperature_interp(model.idle_current_anchors, temperature);
}

/// Closed-loop gain of a fixed-resistor TIA (R_fb / R_in scaled by eta), used for the
/// amplifier characterization table.
[[nodiscard]] inline double closed_loop_gain(const AmplifierModel& model, double temperature) {
    return model.nominal_closed_loop_gain * amplifier_gain_factor(model, temperature);
}

} // namespace memdc
