#pragma once

// Runs one experiment config end to end and writes its records plus a
// manifest. Every output is computed in memory first, written to a
// temporary sibling, checksummed from disk, then renamed into place; on any
// failure the temporaries and already-renamed files of this run are removed.

#include "memdc/amplifier.hpp"
#include "memdc/config.hpp"
#include "memdc/experiments.hpp"
#include "memdc/records.hpp"
#include "memdc/scaling.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace memdc {

inline constexpr const char* artifact_version = "1.0.0";

[[nodiscard]] inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

/// Digest of the canonical document; object keys are sorted, so field order is irrelevant.
[[nodiscard]] inline std::string config_digest(const nlohmann::json& doc) { return sha256_hex(doc.dump()); }

struct OutputFile {
    std::string name;
    std::string contents;
};

struct FileChecksum {
    std::string name;
    std::string sha256;
    std::uint64_t bytes = 0;
};

struct RunManifest {
    std::string config_digest;
    std::uint64_t seed = 0;
    std::string kind;
    std::string version = artifact_version;
    std::vector<FileChecksum> files;
    double wall_clock_seconds = 0.0;
    std::filesystem::path manifest_path;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json f = nlohmann::json::array();
        for (const auto& c : files) f.push_back({{"name", c.name}, {"sha256", c.sha256}, {"bytes", c.bytes}});
        return {{"artifact", "memdc"}, {"version", version},  {"kind", kind},
                {"seed", seed},        {"config_digest", config_digest}, {"files", f},
                {"wall_clock_s", wall_clock_seconds}};
    }
};

[[nodiscard]] inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace detail {

[[nodiscard]] inline std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

[[nodiscard]] inline std::string millivolt_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0fmV", std::round(v * 1e3));
    return buf;
}

inline void write_all(const std::filesystem::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

// Stages files as ".<name>.tmp" and commits them by rename.
class AtomicBatch {
public:
    explicit AtomicBatch(std::filesystem::path dir) : dir_(std::move(dir)) {}

    AtomicBatch(const AtomicBatch&) = delete;
    AtomicBatch& operator=(const AtomicBatch&) = delete;

    ~AtomicBatch() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : staged_) std::filesystem::remove(p, ec);
        for (const auto& p : renamed_) std::filesystem::remove(p, ec);
    }

    FileChecksum stage(const OutputFile& f) {
        const auto tmp = dir_ / ("." + f.name + ".tmp");
        staged_.push_back(tmp);
        finals_.push_back(dir_ / f.name);
        write_all(tmp, f.contents);
        const auto on_disk = read_file(tmp);
        const auto sum = sha256_hex(on_disk);
        if (sum != sha256_hex(f.contents)) throw std::runtime_error("checksum mismatch after writing " + f.name);
        return {f.name, sum, on_disk.size()};
    }

    void commit() {
        for (std::size_t i = 0; i < staged_.size(); ++i) {
            std::filesystem::rename(staged_[i], finals_[i]);
            renamed_.push_back(finals_[i]);
        }
        staged_.clear();
        committed_ = true;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> staged_;
    std::vector<std::filesystem::path> finals_;
    std::vector<std::filesystem::path> renamed_;
    bool committed_ = false;
};

[[nodiscard]] inline std::vector<OutputFile> sweep_outputs(const ExperimentConfig& cfg) {
    const auto result = run_dc_sweep(cfg.sweep);
    const auto& name = cfg.calibration.name;
    return {{"sweep_" + name + "_" + seed_tag(cfg.master_seed) + ".csv",
             write_table(sweep_table(result, name, cfg.master_seed, cfg.sweep.resolution))}};
}

[[nodiscard]] inline std::vector<OutputFile> stability_outputs(const ExperimentConfig& cfg) {
    std::vector<OutputFile> files;
    const auto& name = cfg.calibration.name;
    const auto& tune = cfg.calibration.tune;
    for (std::size_t i = 0; i < cfg.stability.targets.size(); ++i) {
        const double v = cfg.stability.targets[i];
        auto bank = make_bank(cfg.calibration, derive_key(cfg.master_seed, StreamLabel::replication, i));
        auto programmed = program_source(std::move(bank), v, tune);
        if (!programmed.report.ok())
            throw UnreachableTarget("stability target " + std::to_string(v) + " V: " + programmed.report.failed_stage);
        bank = std::move(programmed.bank);
        const auto result = run_stability(bank, cfg.stability.duration, cfg.stability.dt, cfg.stability.bins);
        const auto stem = "stability_" + name + "_" + seed_tag(cfg.master_seed) + "_" + millivolt_tag(v);
        files.push_back({stem + ".csv", write_table(stability_table(result, name, cfg.master_seed, v))});
        files.push_back({stem + "_hist.csv",
                         write_table(histogram_table(result.noise_histogram, name, cfg.master_seed, v))});
    }
    return files;
}

[[nodiscard]] inline std::vector<OutputFile> program_outputs(const ExperimentConfig& cfg) {
    const auto& name = cfg.calibration.name;
    auto bank = make_bank(cfg.calibration, derive_key(cfg.master_seed, StreamLabel::replication, 0));
    std::string log;
    RecordTable summary;
    summary.meta = {{"record", "program"}, {"regime", name}, {"seed", std::to_string(cfg.master_seed)}};
    summary.columns = {"v_target_V", "v_out_V", "v_out_corrected_V", "r_mem_ohm", "pulses", "iterations",
                       "converged"};
    for (double v : cfg.program.targets) {
        auto outcome = program_source(std::move(bank), v, cfg.calibration.tune);
        bank = std::move(outcome.bank);
        log += to_json(outcome.report).dump() + "\n";
        if (!outcome.report.ok())
            throw UnreachableTarget("program target " + std::to_string(v) + " V: " + outcome.report.failed_stage);
        const auto out = output_voltage(bank);
        summary.rows.push_back({format_double(v), format_double(out.v_out),
                                format_double(out.v_out - cfg.calibration.amplifier.offset),
                                format_double(feedback_resistance(bank)), std::to_string(outcome.report.total_pulses),
                                std::to_string(outcome.report.total_iterations),
                                outcome.report.converged ? "1" : "0"});
    }
    const auto stem = "program_" + name + "_" + seed_tag(cfg.master_seed);
    return {{stem + ".csv", write_table(summary)}, {stem + "_log.jsonl", log}};
}

[[nodiscard]] inline std::vector<OutputFile> scale_outputs(const ExperimentConfig& cfg) {
    const auto& s = cfg.scale;
    ScalingScenario scenario;
    scenario.amp = find_scaling_model(s.power_calibration);
    scenario.cooling_power = s.cooling_power;
    scenario.gates_per_dot = s.gates_per_dot;

    auto grid = log_grid(s.grid_lo, s.grid_hi, s.grid_points);
    for (const auto& name : s.technologies) grid.push_back(find_envm(name).r_min);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto tag = s.power_calibration + "_" + seed_tag(cfg.master_seed);
    std::vector<OutputFile> files;
    files.push_back({"scale_scan_" + tag + ".csv", write_table(scan_table(scan_rmin(scenario, grid), scenario,
                                                                          s.power_calibration))});

    RecordTable techs;
    techs.meta = {{"record", "envm_max_sources"}, {"power_calibration", s.power_calibration}};
    techs.columns = {"technology", "r_min_ohm", "r_max_ohm", "cryo_validated", "i_b_A", "power_W", "max_sources",
                     "quantum_dots"};
    for (const auto& name : s.technologies) {
        auto sc = scenario;
        sc.tech = find_envm(name);
        const auto count = max_sources(sc);
        techs.rows.push_back({sc.tech.name, format_double(sc.tech.r_min), format_double(sc.tech.r_max),
                              sc.tech.cryo_validated ? "1" : "0", format_double(bias_current_for(sc.amp, sc.tech.r_min)),
                              format_double(count.power_per_source), std::to_string(count.sources),
                              std::to_string(count.quantum_dots)});
    }
    files.push_back({"scale_envm_" + tag + ".csv", write_table(techs)});

    RecordTable res;
    res.meta = {{"record", "resolution"}};
    res.columns = {"memristors", "resolution_V"};
    for (std::size_t n = 1; n <= s.resolution_max_n; ++n)
        res.rows.push_back({std::to_string(n), format_double(resolution_for(n))});
    files.push_back({"scale_resolution_" + tag + ".csv", write_table(res)});

    if (!s.transfer_feedback.empty()) {
        RecordTable tr;
        tr.meta = {{"record", "integrated_transfer"}, {"r_in_ohm", format_double(s.transfer_r_in)}};
        tr.columns = {"r_fb_ohm", "v_in_V", "v_out_V"};
        const auto steps = static_cast<std::size_t>(std::llround(s.transfer_v_in_stop / s.transfer_v_in_step));
        for (double r_fb : s.transfer_feedback) {
            for (std::size_t k = 0; k <= steps; ++k) {
                const double v_in = static_cast<double>(k) * s.transfer_v_in_step;
                const double v_out =
                    std::clamp(r_fb / s.transfer_r_in * v_in, s.transfer_v_out_min, s.transfer_v_out_max);
                tr.rows.push_back({format_double(r_fb), format_double(v_in), format_double(v_out)});
            }
        }
        files.push_back({"scale_transfer_" + tag + ".csv", write_table(tr)});
    }
    return files;
}

[[nodiscard]] inline std::vector<OutputFile> amplifier_outputs(const ExperimentConfig& cfg) {
    const auto& a = cfg.amplifier;
    const auto& amp = cfg.calibration.amplifier;
    const auto tag = cfg.calibration.name + "_" + seed_tag(cfg.master_seed);

    RecordTable transfer;
    transfer.meta = {{"record", "amplifier_transfer"}, {"nominal_gain", format_double(amp.nominal_closed_loop_gain)}};
    transfer.columns = {"temperature_K", "v_in_V", "v_out_V"};
    const auto steps = static_cast<std::size_t>(std::llround(a.v_in_stop / a.v_in_step));
    for (double t : a.temperatures) {
        const double gain = closed_loop_gain(amp, t);
        for (std::size_t k = 0; k <= steps; ++k) {
            const double v_in = static_cast<double>(k) * a.v_in_step;
            transfer.rows.push_back({format_double(t), format_double(v_in),
                                     format_double(std::clamp(gain * v_in + amp.offset, amp.output_min(),
                                                              amp.output_max()))});
        }
    }

    RecordTable temps;
    temps.meta = {{"record", "amplifier_temperature"}};
    temps.columns = {"temperature_K", "closed_loop_gain", "gain_factor", "idle_current_A"};
    for (double t : log_grid(a.t_lo, a.t_hi, a.t_points))
        temps.rows.push_back({format_double(t), format_double(closed_loop_gain(amp, t)),
                              format_double(amplifier_gain_factor(amp, t)),
                              format_double(amplifier_idle_current(amp, t))});

    return {{"amplifier_transfer_" + tag + ".csv", write_table(transfer)},
            {"amplifier_temperature_" + tag + ".csv", write_table(temps)}};
}

} // namespace detail

[[nodiscard]] inline std::vector<OutputFile> compute_outputs(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
    case ExperimentKind::sweep: return detail::sweep_outputs(cfg);
    case ExperimentKind::stability: return detail::stability_outputs(cfg);
    case ExperimentKind::program: return detail::program_outputs(cfg);
    case ExperimentKind::scale: return detail::scale_outputs(cfg);
    case ExperimentKind::amplifier: return detail::amplifier_outputs(cfg);
    }
    return {};
}

/// Executes the config and writes its records and manifest into `out_dir`
/// (the config's output_dir when empty).
inline RunManifest run(const ExperimentConfig& cfg, std::filesystem::path out_dir = {}) {
    const auto start = std::chrono::steady_clock::now();
    if (out_dir.empty()) out_dir = cfg.output_dir;
    std::filesystem::create_directories(out_dir);

    const auto files = compute_outputs(cfg);

    RunManifest manifest;
    manifest.config_digest = config_digest(cfg.document);
    manifest.seed = cfg.master_seed;
    manifest.kind = to_string(cfg.kind);

    detail::AtomicBatch batch(out_dir);
    for (const auto& f : files) manifest.files.push_back(batch.stage(f));
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::string label = cfg.kind == ExperimentKind::scale ? cfg.scale.power_calibration : cfg.calibration.name;
    const OutputFile mf{"manifest_" + manifest.kind + "_" + label + "_" + detail::seed_tag(cfg.master_seed) + ".json",
                        manifest.to_json().dump(2) + "\n"};
    (void)batch.stage(mf);
    batch.commit();
    manifest.manifest_path = out_dir / mf.name;
    return manifest;
}

} // namespace memdc
