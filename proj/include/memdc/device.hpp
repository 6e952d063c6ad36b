#pragma once

// Behavioral memristor model: threshold-linear write response with
// cycle-to-cycle Gaussian spread, resistance-proportional read noise,
// deterministic relative conductance drift.

#include "memdc/error.hpp"
#include "memdc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace memdc {

enum class RegimeLabel { room, cryo, custom };

[[nodiscard]] inline std::string to_string(RegimeLabel label) {
    switch (label) {
    case RegimeLabel::room: return "room";
    case RegimeLabel::cryo: return "cryo";
    case RegimeLabel::custom: return "custom";
    }
    return "custom";
}

struct TemperatureRegime {
    double temperature = 300.0; // K
    RegimeLabel label = RegimeLabel::room;

    static TemperatureRegime room() { return {300.0, RegimeLabel::room}; }
    static TemperatureRegime cryo() { return {1.2, RegimeLabel::cryo}; }

    void validate() const {
        if (!(temperature > 0.0)) throw ModelError("temperature must be positive");
    }
};

struct PulseSpec {
    double amplitude = 0.0; // V, sign encodes polarity
    double width = 200e-9;  // s
};

struct MemristorState {
    double conductance = 1e-4; // S, true state
    double g_min = 2e-5;
    double g_max = 2e-4;

    double write_gain = 5e-6;       // S/V above threshold
    double write_threshold = 0.8;   // V
    double max_write_voltage = 3.0; // V
    double c2c_sigma = 0.0;

    double read_noise_alpha = 0.0;   // relative std of a programming read
    double output_noise_alpha = 0.0; // relative std of the in-loop resistance seen by the amplifier
    double drift_rate = 0.0;         // 1/s, positive: resistance grows
    double nonlinearity = 0.0;       // 1/V^2, G(v) = G * (1 + nonlinearity * v^2)

    RandomStream stream{};

    [[nodiscard]] double resistance() const noexcept { return 1.0 / conductance; }

    /// Conductance seen at bias `v` (equals the small-signal value when nonlinearity = 0).
    [[nodiscard]] double conductance_at(double v) const noexcept {
        return conductance * (1.0 + nonlinearity * v * v);
    }

    void validate() const {
        if (!(g_min > 0.0)) throw ModelError("g_min must be positive");
        if (!(g_max >= g_min)) throw ModelError("g_max must not be below g_min");
        if (!(conductance >= g_min && conductance <= g_max))
            throw ModelError("conductance outside [g_min, g_max]");
        if (!(c2c_sigma >= 0.0)) throw ModelError("c2c_sigma must be non-negative");
        if (!(read_noise_alpha >= 0.0)) throw ModelError("read_noise_alpha must be non-negative");
        if (!(output_noise_alpha >= 0.0)) throw ModelError("output_noise_alpha must be non-negative");
        if (!(write_gain >= 0.0)) throw ModelError("write_gain must be non-negative");
        if (!(write_threshold >= 0.0)) throw ModelError("write_threshold must be non-negative");
        if (!(max_write_voltage > 0.0)) throw ModelError("max_write_voltage must be positive");
    }

    /// True if 1/r lies within the conductance bounds.
    [[nodiscard]] bool can_reach(double r) const noexcept {
        const double g = 1.0 / r;
        return r > 0.0 && g >= g_min && g <= g_max;
    }
};

inline void validate_pulse(const PulseSpec& pulse, double max_write_voltage) {
    if (!(pulse.width > 0.0)) throw ModelError("write pulse width must be positive");
    if (!std::isfinite(pulse.amplitude) || std::abs(pulse.amplitude) > max_write_voltage)
        throw ModelError("write pulse amplitude " + std::to_string(pulse.amplitude) +
                         " V exceeds the maximum write voltage " + std::to_string(max_write_voltage) + " V");
}

/// G' = clamp(G + sign(a) k_w max(0, |a| - v_th) (1 + xi), g_min, g_max), xi ~ N(0, c2c_sigma).
/// One normal is consumed per pulse, above threshold or not.
[[nodiscard]] inline MemristorState apply_write_pulse(MemristorState state, const PulseSpec& pulse) {
    validate_pulse(pulse, state.max_write_voltage);
    const double xi = state.stream.normal(0.0, state.c2c_sigma);
    const double overdrive = std::max(0.0, std::abs(pulse.amplitude) - state.write_threshold);
    const double polarity = pulse.amplitude > 0.0 ? 1.0 : (pulse.amplitude < 0.0 ? -1.0 : 0.0);
    const double step = polarity * state.write_gain * overdrive * (1.0 + xi);
    state.conductance = std::clamp(state.conductance + step, state.g_min, state.g_max);
    return state;
}

/// Noisy resistance read; only the stream position changes.
[[nodiscard]] inline double read_resistance(MemristorState& state, double v_read, double width) {
    if (v_read == 0.0 || !std::isfinite(v_read)) throw ModelError("read voltage must be non-zero");
    if (!(width > 0.0)) throw ModelError("read pulse width must be positive");
    const double nu = state.stream.normal(0.0, state.read_noise_alpha);
    return (1.0 / state.conductance_at(v_read)) * (1.0 + nu);
}

[[nodiscard]] inline MemristorState drift_step(MemristorState state, double dt) {
    if (!(dt >= 0.0)) throw ModelError("drift interval must be non-negative");
    state.conductance = std::clamp(state.conductance * (1.0 - state.drift_rate * dt), state.g_min, state.g_max);
    return state;
}

} // namespace memdc
