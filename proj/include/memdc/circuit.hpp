#pragma once

// One programmable DC source: N memristors in parallel in the feedback loop
// of an inverting TIA with input resistor r_in. Output magnitudes are used
// throughout (|V_out| = eta * R_mem / r_in * V_in + offset).

#include "memdc/amplifier.hpp"
#include "memdc/device.hpp"
#include "memdc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace memdc {

enum class SwitchMode { feedback, program };
enum class TopElectrode { loop, apmu };

struct SwitchMatrixState {
    SwitchMode mode = SwitchMode::feedback;
    std::size_t device_index = 0; // meaningful in program mode only
    TopElectrode top_electrode = TopElectrode::loop;

    static SwitchMatrixState feedback() { return {}; }
    static SwitchMatrixState program(std::size_t i) { return {SwitchMode::program, i, TopElectrode::apmu}; }

    friend bool operator==(const SwitchMatrixState&, const SwitchMatrixState&) = default;
};

struct OutputSample {
    double v_out = 0.0;          // V
    double supply_current = 0.0; // A
    double timestamp = 0.0;      // s

    friend bool operator==(const OutputSample&, const OutputSample&) = default;
};

struct SourceBank {
    std::vector<MemristorState> memristors;
    double r_in = 3e3;
    AmplifierModel amplifier{};
    double v_in = 0.25;
    TemperatureRegime regime{};
    SwitchMatrixState switch_state{};
    double output_noise_floor = 0.0; // V, additive output-referred noise std
    RandomStream output_stream{};

    [[nodiscard]] std::size_t size() const noexcept { return memristors.size(); }

    void validate() const {
        if (memristors.empty()) throw ModelError("source bank needs at least one memristor");
        if (!(r_in > 0.0)) throw ModelError("r_in must be positive");
        if (!(output_noise_floor >= 0.0)) throw ModelError("output noise floor must be non-negative");
        regime.validate();
        amplifier.validate();
        if (!(std::abs(v_in) < amplifier.rail())) throw ModelError("v_in outside the amplifier input range");
        for (const auto& m : memristors) m.validate();
        validate_switch_state(switch_state);
    }

    void validate_switch_state(const SwitchMatrixState& s) const {
        if (s.mode == SwitchMode::program && s.device_index >= memristors.size())
            throw ModelError("switch program index " + std::to_string(s.device_index) + " out of range for " +
                             std::to_string(memristors.size()) + " memristors");
        if (s.mode == SwitchMode::feedback && s.top_electrode != TopElectrode::loop)
            throw ModelError("feedback mode requires the top electrode on the loop");
    }
};

namespace detail {

inline void require_feedback(const SourceBank& bank, const char* what) {
    if (bank.switch_state.mode != SwitchMode::feedback)
        throw LoopOpenError(std::string(what) + " requires feedback mode (loop is open)");
}

[[nodiscard]] inline bool has_nonlinearity(const SourceBank& bank) {
    return std::any_of(bank.memristors.begin(), bank.memristors.end(),
                       [](const MemristorState& m) { return m.nonlinearity != 0.0; });
}

[[nodiscard]] inline double clamp_output(const AmplifierModel& amp, double v) {
    return std::clamp(v, amp.output_min(), amp.output_max());
}

} // namespace detail

[[nodiscard]] inline SourceBank set_switch_state(SourceBank bank, const SwitchMatrixState& next) {
    bank.validate_switch_state(next);
    bank.switch_state = next;
    return bank;
}

/// (sum_i G_i)^-1 over the true small-signal conductances.
[[nodiscard]] inline double feedback_resistance(const SourceBank& bank) {
    detail::require_feedback(bank, "feedback_resistance");
    double g = 0.0;
    for (const auto& m : bank.memristors) g += m.conductance;
    return 1.0 / g;
}

/// Feedback resistance with every device evaluated at bias v_bias.
[[nodiscard]] inline double feedback_resistance_at(const SourceBank& bank, double v_bias) {
    detail::require_feedback(bank, "feedback_resistance");
    double g = 0.0;
    for (const auto& m : bank.memristors) g += m.conductance_at(v_bias);
    return 1.0 / g;
}

struct OperatingPoint {
    double v_out;
    double r_mem;
};

/// Solves the (possibly nonlinear) loop for the noiseless output.
[[nodiscard]] inline OperatingPoint solve_operating_point(const SourceBank& bank) {
    detail::require_feedback(bank, "output_voltage");
    const auto& amp = bank.amplifier;
    const double gain = effective_gain_factor(amp, bank.regime.temperature) * bank.v_in / bank.r_in;
    double r_mem = feedback_resistance(bank);
    double v_out = detail::clamp_output(amp, gain * r_mem + amp.offset);
    if (detail::has_nonlinearity(bank)) {
        // The devices see v_out - v_in; fixed point converges since the
        // correction is a small quadratic in the bias.
        for (int it = 0; it < 200; ++it) {
            const double r_next = feedback_resistance_at(bank, v_out - bank.v_in);
            const double v_next = detail::clamp_output(amp, gain * r_next + amp.offset);
            const bool done = std::abs(v_next - v_out) <= 1e-15 * std::max(1.0, std::abs(v_out));
            v_out = v_next;
            r_mem = r_next;
            if (done) break;
        }
    }
    return {v_out, r_mem};
}

[[nodiscard]] inline double supply_current_for(const SourceBank& bank, double v_out, double r_mem) {
    return amplifier_idle_current(bank.amplifier, bank.regime.temperature) + std::abs(v_out - bank.v_in) / r_mem;
}

/// Noiseless DC output and supply current.
[[nodiscard]] inline OutputSample output_voltage(const SourceBank& bank) {
    const auto op = solve_operating_point(bank);
    return {op.v_out, supply_current_for(bank, op.v_out, op.r_mem), 0.0};
}

/// Samples the output every dt over [0, duration]. Devices drift between
/// samples; each sample perturbs every device resistance by its output noise
/// (drawn from the device stream) and adds the additive floor.
[[nodiscard]] inline std::vector<OutputSample> measure_output(SourceBank& bank, double duration, double dt) {
    detail::require_feedback(bank, "measure_output");
    if (!(dt > 0.0) || !(duration >= dt)) throw ModelError("measure_output requires duration >= dt > 0");
    const auto count = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
    const auto& amp = bank.amplifier;
    const double gain = effective_gain_factor(amp, bank.regime.temperature) * bank.v_in / bank.r_in;

    std::vector<OutputSample> trace;
    trace.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (k > 0)
            for (auto& m : bank.memristors) m = drift_step(m, dt);
        const auto op = solve_operating_point(bank);
        const double bias = op.v_out - bank.v_in;
        double g = 0.0;
        for (auto& m : bank.memristors) {
            const double nu = m.stream.normal(0.0, m.output_noise_alpha);
            g += m.conductance_at(bias) / (1.0 + nu);
        }
        const double r_noisy = 1.0 / g;
        double v = gain * r_noisy + amp.offset;
        if (bank.output_noise_floor > 0.0) v += bank.output_stream.normal(0.0, bank.output_noise_floor);
        v = detail::clamp_output(amp, v);
        trace.push_back({v, supply_current_for(bank, v, r_noisy), static_cast<double>(k) * dt});
    }
    return trace;
}

struct PowerBreakdown {
    double amplifier = 0.0; // W, rails x supply current
    double feedback = 0.0;  // W, dissipated in the memristors
    [[nodiscard]] double total() const noexcept { return amplifier + feedback; }
};

[[nodiscard]] inline PowerBreakdown power_draw(const SourceBank& bank) {
    const auto op = solve_operating_point(bank);
    const auto& amp = bank.amplifier;
    const double drop = op.v_out - bank.v_in;
    return {(amp.v_dd - amp.v_ss) * supply_current_for(bank, op.v_out, op.r_mem), drop * drop / op.r_mem};
}

} // namespace memdc
