#pragma once

// Closed-loop programming of a memristor DC source.
//
//   1. common target  R_trg = N * r_in * V_trg / V_in
//   2. devices 0..N-2 tuned to R_trg by read-write-verify at `tolerance`
//   3. balancing target R_bal = (N / R_trg - sum of measured companion G)^-1
//   4. device N-1 tuned to R_bal at `balance_tolerance`
//   5. switch matrix back to feedback
//
// The tuning loop reads the device; outside tolerance it fires a write pulse
// (positive amplitude lowers R) whose amplitude ramps by amplitude_step and
// restarts at start_amplitude whenever the polarity flips. Inside tolerance
// it runs stability_reads verification reads and accepts only if all stay
// inside; otherwise tuning resumes.

#include "memdc/circuit.hpp"
#include "memdc/device.hpp"
#include "memdc/error.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memdc {

struct TuneParams {
    double write_width = 200e-9;      // s
    double amplitude_step = 10e-3;    // V
    double start_amplitude = 0.82;    // V
    double max_amplitude = 2.5;       // V
    double read_width_per_volt = 10e-6; // s/V
    double tolerance = 0.01;
    double balance_tolerance = 0.005;
    int stability_reads = 10;
    int max_iterations = 1000;
    // Overrides the V_trg - V_in read amplitude when set.
    std::optional<double> fixed_read_voltage{};

    void validate() const {
        if (!(tolerance > 0.0 && tolerance < 1.0)) throw ModelError("tolerance must be in (0, 1)");
        if (!(balance_tolerance > 0.0 && balance_tolerance < 1.0))
            throw ModelError("balance_tolerance must be in (0, 1)");
        if (!(amplitude_step > 0.0)) throw ModelError("amplitude_step must be positive");
        if (!(write_width > 0.0)) throw ModelError("write_width must be positive");
        if (!(read_width_per_volt > 0.0)) throw ModelError("read_width_per_volt must be positive");
        if (!(start_amplitude > 0.0 && max_amplitude >= start_amplitude))
            throw ModelError("need 0 < start_amplitude <= max_amplitude");
        if (max_iterations <= 0) throw ModelError("max_iterations must be positive");
        if (stability_reads < 0) throw ModelError("stability_reads must be non-negative");
        if (fixed_read_voltage && *fixed_read_voltage == 0.0) throw ModelError("fixed read voltage must be non-zero");
    }
};

struct DeviceReport {
    std::size_t device_index = 0;
    double target_resistance = 0.0;
    double tolerance = 0.0;
    int pulses_applied = 0;
    int reads_applied = 0;
    int iterations = 0;
    double final_resistance = 0.0;    // true small-signal resistance at exit
    double measured_resistance = 0.0; // last read taken
    double relative_error = 0.0;      // |final - target| / target
    bool converged = false;
    double pulse_time = 0.0;          // s, write + read pulse widths

    friend bool operator==(const DeviceReport&, const DeviceReport&) = default;
};

struct ProgramReport {
    double v_target = 0.0;
    double read_voltage = 0.0;
    double common_target = 0.0;
    double balance_target = 0.0;
    std::vector<DeviceReport> devices;
    int total_iterations = 0;
    int total_pulses = 0;
    double total_pulse_time = 0.0;
    bool converged = false;
    std::string failed_stage; // empty on success

    [[nodiscard]] bool ok() const noexcept { return failed_stage.empty(); }

    friend bool operator==(const ProgramReport&, const ProgramReport&) = default;
};

[[nodiscard]] inline double target_resistance(double v_trg, double v_in, std::size_t n, double r_in) {
    if (v_in == 0.0) throw ModelError("input voltage must be non-zero");
    if (n < 1) throw ModelError("need at least one memristor");
    if (!(r_in > 0.0)) throw ModelError("r_in must be positive");
    if (!(v_trg / v_in > 0.0))
        throw UnreachableTarget("target " + std::to_string(v_trg) + " V and input " + std::to_string(v_in) +
                                " V differ in sign; resistive feedback cannot reach it");
    return static_cast<double>(n) * r_in * v_trg / v_in;
}

[[nodiscard]] inline double balance_resistance(double r_trg, std::span<const double> companion_conductances,
                                               std::size_t n) {
    if (n < 1 || companion_conductances.size() + 1 != n)
        throw ModelError("balance_resistance needs exactly n - 1 companion conductances");
    if (!(r_trg > 0.0)) throw ModelError("target resistance must be positive");
    const double sum = std::accumulate(companion_conductances.begin(), companion_conductances.end(), 0.0);
    const double residual = static_cast<double>(n) / r_trg - sum;
    if (!(residual > 0.0))
        throw UnreachableTarget("companions over-programmed: their conductance already meets the target");
    return 1.0 / residual;
}

struct TuneOutcome {
    MemristorState device;
    DeviceReport report;
};

[[nodiscard]] inline TuneOutcome tune_resistance(MemristorState device, double r_target, double tolerance,
                                                 const TuneParams& params, double v_read) {
    params.validate();
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw ModelError("tolerance must be in (0, 1)");
    if (v_read == 0.0) throw ModelError("read voltage must be non-zero");
    if (!device.can_reach(r_target))
        throw UnreachableTarget("target " + std::to_string(r_target) + " ohm outside the device range [" +
                                std::to_string(1.0 / device.g_max) + ", " + std::to_string(1.0 / device.g_min) + "]");

    DeviceReport report;
    report.target_resistance = r_target;
    report.tolerance = tolerance;
    const double read_width = params.read_width_per_volt * std::abs(v_read);

    auto read = [&] {
        ++report.reads_applied;
        report.pulse_time += read_width;
        return read_resistance(device, v_read, read_width);
    };
    auto within = [&](double r) { return std::abs(r - r_target) <= tolerance * r_target; };

    double amplitude = params.start_amplitude;
    int last_polarity = 0;
    double last_read = 0.0;

    while (report.iterations < params.max_iterations) {
        ++report.iterations;
        last_read = read();
        if (within(last_read)) {
            bool stable = true;
            for (int k = 0; k < params.stability_reads && stable; ++k) {
                last_read = read();
                stable = within(last_read);
            }
            if (stable) {
                report.converged = true;
                break;
            }
            last_polarity = 0; // resume with a fresh ramp
            continue;
        }
        const int polarity = last_read > r_target ? 1 : -1;
        if (polarity != last_polarity) {
            amplitude = params.start_amplitude;
        } else {
            amplitude = std::min(amplitude + params.amplitude_step, params.max_amplitude);
        }
        last_polarity = polarity;
        device = apply_write_pulse(device, {polarity * amplitude, params.write_width});
        ++report.pulses_applied;
        report.pulse_time += params.write_width;
    }

    report.measured_resistance = last_read;
    report.final_resistance = device.resistance();
    report.relative_error = std::abs(report.final_resistance - r_target) / r_target;
    return {device, report};
}

[[nodiscard]] inline TuneOutcome tune_resistance(MemristorState device, double r_target, const TuneParams& params,
                                                 double v_read) {
    return tune_resistance(std::move(device), r_target, params.tolerance, params, v_read);
}

struct ProgramOutcome {
    SourceBank bank;
    ProgramReport report;
};

/// Reachability of the common target for every device; throws before any pulse.
inline double check_reachable(const SourceBank& bank, double v_trg) {
    const double r_trg = target_resistance(v_trg, bank.v_in, bank.size(), bank.r_in);
    for (std::size_t i = 0; i < bank.size(); ++i) {
        if (!bank.memristors[i].can_reach(r_trg))
            throw UnreachableTarget("target " + std::to_string(v_trg) + " V needs " + std::to_string(r_trg) +
                                    " ohm per device, outside the range of device " + std::to_string(i));
    }
    return r_trg;
}

[[nodiscard]] inline ProgramOutcome program_source(SourceBank bank, double v_trg, const TuneParams& params) {
    params.validate();
    bank.validate();
    const double r_trg = check_reachable(bank, v_trg);
    const std::size_t n = bank.size();

    ProgramReport report;
    report.v_target = v_trg;
    report.common_target = r_trg;
    report.read_voltage = params.fixed_read_voltage.value_or(v_trg - bank.v_in);
    if (report.read_voltage == 0.0)
        throw ModelError("read amplitude V_trg - V_in is zero; set a fixed read voltage");

    auto finish = [&](std::string failure) {
        bank.switch_state = SwitchMatrixState::feedback();
        report.failed_stage = std::move(failure);
        report.converged = report.ok();
        for (const auto& d : report.devices) {
            report.total_iterations += d.iterations;
            report.total_pulses += d.pulses_applied;
            report.total_pulse_time += d.pulse_time;
            report.converged = report.converged && d.converged;
        }
        return ProgramOutcome{std::move(bank), std::move(report)};
    };

    std::vector<double> companions;
    companions.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        bank = set_switch_state(std::move(bank), SwitchMatrixState::program(i));
        auto outcome = tune_resistance(bank.memristors[i], r_trg, params.tolerance, params, report.read_voltage);
        outcome.report.device_index = i;
        bank.memristors[i] = outcome.device;
        companions.push_back(1.0 / outcome.report.measured_resistance);
        report.devices.push_back(outcome.report);
    }

    const std::size_t last = n - 1;
    double r_bal = r_trg;
    if (n > 1) {
        try {
            r_bal = balance_resistance(r_trg, companions, n);
        } catch (const UnreachableTarget& e) {
            return finish(std::string("balance: ") + e.what());
        }
    }
    report.balance_target = r_bal;
    if (!bank.memristors[last].can_reach(r_bal))
        return finish("balance: target " + std::to_string(r_bal) + " ohm outside the range of device " +
                      std::to_string(last));

    bank = set_switch_state(std::move(bank), SwitchMatrixState::program(last));
    auto outcome =
        tune_resistance(bank.memristors[last], r_bal, params.balance_tolerance, params, report.read_voltage);
    outcome.report.device_index = last;
    bank.memristors[last] = outcome.device;
    report.devices.push_back(outcome.report);
    return finish({});
}

} // namespace memdc
