#pragma once

// Measurement campaigns on simulated sources: repeated DC sweeps with mean
// resolution error analysis, and stability traces with drift fit and noise
// statistics.

#include "memdc/calibration.hpp"
#include "memdc/circuit.hpp"
#include "memdc/error.hpp"
#include "memdc/programming.hpp"
#include "memdc/rng.hpp"
#include "memdc/stats.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <span>
#include <string>
#include <vector>

namespace memdc {

enum class OffsetMode {
    known,     // subtract the amplifier model offset
    estimated, // subtract mean(raw) - target at the mid-range point
};

struct SweepSpec {
    double v_start = 0.4;
    double v_stop = 0.65;
    double resolution = 10e-3;
    std::size_t replications = 10;
    Calibration calibration = room_calibration();
    std::uint64_t master_seed = 1;
    OffsetMode offset_mode = OffsetMode::known;
    // Achieved output = mean of this many samples of the noisy output, dt apart.
    std::size_t measurement_samples = 10;
    double measurement_dt = 0.1;
    bool parallel = true;

    void validate() const {
        if (!(v_stop > v_start)) throw ConfigError("sweep.v_stop", "must exceed v_start");
        if (!(resolution > 0.0)) throw ConfigError("sweep.resolution", "must be positive");
        if (replications < 1) throw ConfigError("sweep.replications", "must be at least 1");
        if (measurement_samples < 1) throw ConfigError("sweep.measurement_samples", "must be at least 1");
        if (!(measurement_dt > 0.0)) throw ConfigError("sweep.measurement_dt", "must be positive");
        const double steps = (v_stop - v_start) / resolution;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            throw ConfigError("sweep.resolution", "(v_stop - v_start) / resolution is not an integer");
    }

    [[nodiscard]] std::vector<double> targets() const {
        const auto steps = static_cast<std::size_t>(std::llround((v_stop - v_start) / resolution));
        std::vector<double> t(steps + 1);
        for (std::size_t i = 0; i <= steps; ++i) t[i] = v_start + static_cast<double>(i) * resolution;
        return t;
    }
};

struct SweepResult {
    std::vector<double> targets;
    std::vector<double> mean;
    std::vector<double> std;
    LinearFit fit;
    std::vector<double> mre; // percent
    std::vector<std::vector<double>> samples; // [target][replication], offset-corrected
    double offset_subtracted = 0.0;
    std::size_t unconverged = 0; // programming runs that hit max_iterations

    [[nodiscard]] double mean_mre() const { return memdc::mean(mre); }

    friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// MRE(V) = 100 * std(V) / (a_f * dV) per target, std over replications.
[[nodiscard]] inline std::vector<double> compute_mre(const std::vector<std::vector<double>>& samples, double a_f,
                                                     double resolution) {
    if (a_f == 0.0) throw ModelError("compute_mre: fitted slope must be non-zero");
    if (!(resolution > 0.0)) throw ModelError("compute_mre: resolution must be positive");
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.size() < 2) throw ModelError("compute_mre needs at least two replications per target");
        out.push_back(100.0 * sample_std(s) / (a_f * resolution));
    }
    return out;
}

/// Mean of `samples` consecutive output samples; a single sample when samples = 1.
[[nodiscard]] inline double measure_achieved(SourceBank& bank, std::size_t samples, double dt) {
    const auto trace = measure_output(bank, static_cast<double>(samples - 1) * dt + dt, dt);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) acc += trace[i].v_out;
    return acc / static_cast<double>(samples);
}

namespace detail {

struct ReplicationRun {
    std::vector<double> raw; // per target, offset included
    std::size_t unconverged = 0;
};

[[nodiscard]] inline ReplicationRun run_replication(const SweepSpec& spec, const std::vector<double>& targets,
                                                    std::size_t r) {
    SourceBank bank = make_bank(spec.calibration, derive_key(spec.master_seed, StreamLabel::replication, r));
    ReplicationRun run;
    run.raw.reserve(targets.size());
    for (double t : targets) {
        auto outcome = program_source(std::move(bank), t, spec.calibration.tune);
        bank = std::move(outcome.bank);
        if (!outcome.report.ok())
            throw UnreachableTarget("sweep target " + std::to_string(t) + " V: " + outcome.report.failed_stage);
        if (!outcome.report.converged) ++run.unconverged;
        run.raw.push_back(measure_achieved(bank, spec.measurement_samples, spec.measurement_dt));
    }
    return run;
}

} // namespace detail

[[nodiscard]] inline SweepResult run_dc_sweep(const SweepSpec& spec) {
    spec.validate();
    const auto targets = spec.targets();

    // Reachability of every target before any programming.
    {
        const SourceBank probe = make_bank(spec.calibration, spec.master_seed);
        for (double t : targets) {
            try {
                (void)check_reachable(probe, t);
            } catch (const UnreachableTarget& e) {
                throw UnreachableTarget("sweep target " + std::to_string(t) + " V unreachable: " + e.what());
            }
        }
    }

    std::vector<detail::ReplicationRun> runs(spec.replications);
    if (spec.parallel && spec.replications > 1) {
        std::vector<std::future<detail::ReplicationRun>> futures;
        futures.reserve(spec.replications);
        for (std::size_t r = 0; r < spec.replications; ++r)
            futures.push_back(std::async(std::launch::async, [&, r] { return detail::run_replication(spec, targets, r); }));
        for (std::size_t r = 0; r < spec.replications; ++r) runs[r] = futures[r].get();
    } else {
        for (std::size_t r = 0; r < spec.replications; ++r) runs[r] = detail::run_replication(spec, targets, r);
    }

    SweepResult result;
    result.targets = targets;
    for (const auto& run : runs) result.unconverged += run.unconverged;

    if (spec.offset_mode == OffsetMode::known) {
        result.offset_subtracted = spec.calibration.amplifier.offset;
    } else {
        const std::size_t mid = targets.size() / 2;
        double acc = 0.0;
        for (const auto& run : runs) acc += run.raw[mid];
        result.offset_subtracted = acc / static_cast<double>(runs.size()) - targets[mid];
    }

    result.samples.assign(targets.size(), {});
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (const auto& run : runs) result.samples[i].push_back(run.raw[i] - result.offset_subtracted);
        result.mean.push_back(memdc::mean(result.samples[i]));
        result.std.push_back(result.samples[i].size() > 1 ? sample_std(result.samples[i]) : 0.0);
    }
    result.fit = fit_linear(result.targets, result.mean);
    if (spec.replications > 1) result.mre = compute_mre(result.samples, result.fit.slope, spec.resolution);
    return result;
}

struct StabilityResult {
    std::vector<OutputSample> trace;
    LinearFit fit; // V(t) = slope * t + intercept
    double noise_std = 0.0; // detrended sample std
    Histogram noise_histogram;
    NormalityTest normality;
};

[[nodiscard]] inline StabilityResult analyze_trace(std::vector<OutputSample> trace, std::size_t bins = 30) {
    std::vector<double> t(trace.size()), v(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        t[i] = trace[i].timestamp;
        v[i] = trace[i].v_out;
    }
    StabilityResult r;
    r.fit = fit_linear(t, v);
    const auto residuals = detrend(t, v, r.fit);
    r.noise_std = sample_std(residuals);
    r.noise_histogram = histogram(residuals, bins);
    r.normality = jarque_bera(residuals);
    r.trace = std::move(trace);
    return r;
}

/// Samples a programmed bank for `duration`; the bank drifts in place.
[[nodiscard]] inline StabilityResult run_stability(SourceBank& bank, double duration, double dt = 0.1,
                                                   std::size_t bins = 30) {
    if (!(dt > 0.0) || !(duration >= 10.0 * dt)) throw ModelError("run_stability requires duration >= 10 dt > 0");
    return analyze_trace(measure_output(bank, duration, dt), bins);
}

} // namespace memdc
