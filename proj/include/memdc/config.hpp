#pragma once

// Experiment configuration documents (JSON). A document names a calibration
// preset and overrides any of its fields; unknown keys are reported so a
// typo never silently falls back to a default.
//
//   {
//     "kind": "sweep", "seed": 42, "calibration": "room",
//     "device": {"c2c_sigma": 0.05}, "tune": {"tolerance": 0.01},
//     "sweep": {"v_start": 0.4, "v_stop": 0.65, "resolution": 0.01, "replications": 10}
//   }

#include "memdc/calibration.hpp"
#include "memdc/error.hpp"
#include "memdc/experiments.hpp"
#include "memdc/programming.hpp"
#include "memdc/scaling.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace memdc {

enum class ExperimentKind { sweep, stability, program, scale, amplifier };

[[nodiscard]] inline std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::stability: return "stability";
    case ExperimentKind::program: return "program";
    case ExperimentKind::scale: return "scale";
    case ExperimentKind::amplifier: return "amplifier";
    }
    return "sweep";
}

[[nodiscard]] inline std::optional<ExperimentKind> parse_kind(std::string_view s) {
    for (auto k : {ExperimentKind::sweep, ExperimentKind::stability, ExperimentKind::program, ExperimentKind::scale,
                   ExperimentKind::amplifier})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct Diagnostic {
    std::string field;
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct StabilitySettings {
    std::vector<double> targets{0.5};
    double duration = 300.0;
    double dt = 0.1;
    std::size_t bins = 30;
};

struct ProgramSettings {
    std::vector<double> targets{0.5};
};

struct ScaleSettings {
    std::string power_calibration = "default";
    std::vector<std::string> technologies{"VCM", "FTJ"};
    double grid_lo = 10e3;
    double grid_hi = 1e6;
    std::size_t grid_points = 41;
    double cooling_power = 1.5;
    std::size_t gates_per_dot = 2;
    std::size_t resolution_max_n = 8;
    // Integrated TIA transfer table: feedback resistances at a fixed input resistor.
    std::vector<double> transfer_feedback{};
    double transfer_r_in = 2.5e3;
    double transfer_v_in_stop = 0.1;
    double transfer_v_in_step = 5e-3;
    double transfer_v_out_min = 0.2;
    double transfer_v_out_max = 1.2;
};

struct AmplifierSettings {
    std::vector<double> temperatures{1.2, 35.0, 300.0};
    double v_in_stop = 1.5;
    double v_in_step = 0.05;
    double t_lo = 1.2;
    double t_hi = 300.0;
    std::size_t t_points = 60;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::sweep;
    std::uint64_t master_seed = 1;
    Calibration calibration = room_calibration();
    std::string output_dir = "out";
    SweepSpec sweep{};
    StabilitySettings stability{};
    ProgramSettings program{};
    ScaleSettings scale{};
    AmplifierSettings amplifier{};
    nlohmann::json document; // as loaded, for the digest
};

namespace detail {

// Reads typed fields out of one JSON object, recording diagnostics and
// flagging keys that nothing consumed.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& obj, std::string path, std::vector<Diagnostic>& diags)
        : obj_(obj), path_(std::move(path)), diags_(diags) {
        if (!obj_.is_object()) diags_.push_back({path_, "expected an object"});
    }

    ObjectReader(const ObjectReader&) = delete;
    ObjectReader& operator=(const ObjectReader&) = delete;

    ~ObjectReader() {
        if (!obj_.is_object()) return;
        for (const auto& [key, _] : obj_.items())
            if (!seen_.count(key)) diags_.push_back({join(key), "unknown key"});
    }

    [[nodiscard]] std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[nodiscard]] const nlohmann::json* find(const std::string& key) {
        seen_.insert(key);
        if (!obj_.is_object()) return nullptr;
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const auto* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else diags_.push_back({join(key), "expected a number"});
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const auto* v = find(key)) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0))
                out = static_cast<Int>(v->get<std::uint64_t>());
            else diags_.push_back({join(key), "expected a non-negative integer"});
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const auto* v = find(key)) {
            if (v->is_boolean()) out = v->get<bool>();
            else diags_.push_back({join(key), "expected true or false"});
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const auto* v = find(key)) {
            if (v->is_string()) out = v->get<std::string>();
            else diags_.push_back({join(key), "expected a string"});
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array()) {
                diags_.push_back({join(key), "expected an array of numbers"});
                return;
            }
            std::vector<double> tmp;
            for (const auto& e : *v) {
                if (!e.is_number()) {
                    diags_.push_back({join(key), "expected an array of numbers"});
                    return;
                }
                tmp.push_back(e.get<double>());
            }
            out = std::move(tmp);
        }
    }

    void strings(const std::string& key, std::vector<std::string>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array()) {
                diags_.push_back({join(key), "expected an array of strings"});
                return;
            }
            std::vector<std::string> tmp;
            for (const auto& e : *v) {
                if (!e.is_string()) {
                    diags_.push_back({join(key), "expected an array of strings"});
                    return;
                }
                tmp.push_back(e.get<std::string>());
            }
            out = std::move(tmp);
        }
    }

    void anchors(const std::string& key, std::vector<Anchor>& out) {
        if (const auto* v = find(key)) {
            std::vector<Anchor> tmp;
            bool ok = v->is_array();
            if (ok) {
                for (const auto& e : *v) {
                    if (!(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())) {
                        ok = false;
                        break;
                    }
                    tmp.push_back({e[0].get<double>(), e[1].get<double>()});
                }
            }
            if (ok) out = std::move(tmp);
            else diags_.push_back({join(key), "expected an array of [temperature, value] pairs"});
        }
    }

private:
    const nlohmann::json& obj_;
    std::string path_;
    std::vector<Diagnostic>& diags_;
    std::set<std::string> seen_;
};

inline void read_device(ObjectReader& r, DeviceParams& d) {
    r.number("r_low", d.r_low);
    r.number("r_high", d.r_high);
    r.number("initial_resistance", d.initial_resistance);
    r.number("write_gain", d.write_gain);
    r.number("write_threshold", d.write_threshold);
    r.number("max_write_voltage", d.max_write_voltage);
    r.number("c2c_sigma", d.c2c_sigma);
    r.number("read_noise_alpha", d.read_noise_alpha);
    r.number("output_noise_alpha", d.output_noise_alpha);
    r.number("drift_rate", d.drift_rate);
    r.number("nonlinearity", d.nonlinearity);
}

inline void read_amplifier(ObjectReader& r, AmplifierModel& a) {
    r.number("nominal_closed_loop_gain", a.nominal_closed_loop_gain);
    r.number("plateau_temperature", a.plateau_temperature);
    r.anchors("gain_factor_anchors", a.gain_factor_anchors);
    r.anchors("idle_current_anchors", a.idle_current_anchors);
    r.number("offset", a.offset);
    r.number("v_dd", a.v_dd);
    r.number("v_ss", a.v_ss);
    r.number("output_headroom", a.output_headroom);
    r.number("boost_reference_rail", a.boost_reference_rail);
    r.number("boost_per_volt", a.boost_per_volt);
    r.number("max_gain_factor", a.max_gain_factor);
}

inline void read_tune(ObjectReader& r, TuneParams& t) {
    r.number("write_width", t.write_width);
    r.number("amplitude_step", t.amplitude_step);
    r.number("start_amplitude", t.start_amplitude);
    r.number("max_amplitude", t.max_amplitude);
    r.number("read_width_per_volt", t.read_width_per_volt);
    r.number("tolerance", t.tolerance);
    r.number("balance_tolerance", t.balance_tolerance);
    r.integer("stability_reads", t.stability_reads);
    r.integer("max_iterations", t.max_iterations);
    if (r.find("fixed_read_voltage")) {
        double v = 0.0;
        r.number("fixed_read_voltage", v);
        t.fixed_read_voltage = v;
    }
}

template <typename Fn>
void section(const nlohmann::json& doc, const std::string& key, std::vector<Diagnostic>& diags, Fn&& fn) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    ObjectReader r(*it, key, diags);
    fn(r);
}

inline void check_positive(std::vector<Diagnostic>& d, const std::string& field, double v) {
    if (!(v > 0.0)) d.push_back({field, "must be positive"});
}

} // namespace detail

struct ParsedConfig {
    ExperimentConfig config;
    std::vector<Diagnostic> diagnostics;
};

/// Parses a document into a config; every problem is collected, nothing thrown.
[[nodiscard]] inline ParsedConfig parse_config(const nlohmann::json& doc) {
    ParsedConfig out;
    auto& cfg = out.config;
    auto& diags = out.diagnostics;
    cfg.document = doc;
    if (!doc.is_object()) {
        diags.push_back({"", "configuration must be a JSON object"});
        return out;
    }

    static const std::set<std::string> sections{"device", "amplifier", "bank", "tune", "sweep",
                                                "stability", "program", "scale", "amplifier_sweep"};
    detail::ObjectReader top(doc, "", diags);
    for (const auto& s : sections) (void)top.find(s);

    std::string kind = "sweep";
    top.string("kind", kind);
    if (auto k = parse_kind(kind)) cfg.kind = *k;
    else diags.push_back({"kind", "unknown experiment kind '" + kind + "'"});

    top.integer("seed", cfg.master_seed);
    top.string("output_dir", cfg.output_dir);

    std::string cal = "room";
    top.string("calibration", cal);
    try {
        cfg.calibration = find_calibration(cal);
    } catch (const ConfigError& e) {
        diags.push_back({"calibration", "unknown calibration '" + cal + "'"});
    }
    if (const auto* t = top.find("temperature")) {
        if (t->is_number()) {
            cfg.calibration.regime = {t->get<double>(), RegimeLabel::custom};
        } else {
            diags.push_back({"temperature", "expected a number"});
        }
    }

    detail::section(doc, "device", diags, [&](auto& r) { detail::read_device(r, cfg.calibration.device); });
    detail::section(doc, "amplifier", diags, [&](auto& r) { detail::read_amplifier(r, cfg.calibration.amplifier); });
    detail::section(doc, "tune", diags, [&](auto& r) { detail::read_tune(r, cfg.calibration.tune); });
    detail::section(doc, "bank", diags, [&](auto& r) {
        r.integer("memristor_count", cfg.calibration.bank.memristor_count);
        r.number("r_in", cfg.calibration.bank.r_in);
        r.number("v_in", cfg.calibration.bank.v_in);
        r.number("output_noise_floor", cfg.calibration.bank.output_noise_floor);
    });
    detail::section(doc, "sweep", diags, [&](auto& r) {
        auto& s = cfg.sweep;
        r.number("v_start", s.v_start);
        r.number("v_stop", s.v_stop);
        r.number("resolution", s.resolution);
        r.integer("replications", s.replications);
        r.integer("measurement_samples", s.measurement_samples);
        r.number("measurement_dt", s.measurement_dt);
        r.boolean("parallel", s.parallel);
        std::string mode = "known";
        r.string("offset_mode", mode);
        if (mode == "known") s.offset_mode = OffsetMode::known;
        else if (mode == "estimated") s.offset_mode = OffsetMode::estimated;
        else diags.push_back({"sweep.offset_mode", "expected 'known' or 'estimated'"});
    });
    detail::section(doc, "stability", diags, [&](auto& r) {
        r.numbers("targets", cfg.stability.targets);
        r.number("duration", cfg.stability.duration);
        r.number("dt", cfg.stability.dt);
        r.integer("bins", cfg.stability.bins);
    });
    detail::section(doc, "program", diags, [&](auto& r) { r.numbers("targets", cfg.program.targets); });
    detail::section(doc, "scale", diags, [&](auto& r) {
        auto& s = cfg.scale;
        r.string("power_calibration", s.power_calibration);
        r.strings("technologies", s.technologies);
        r.number("grid_lo", s.grid_lo);
        r.number("grid_hi", s.grid_hi);
        r.integer("grid_points", s.grid_points);
        r.number("cooling_power", s.cooling_power);
        r.integer("gates_per_dot", s.gates_per_dot);
        r.integer("resolution_max_n", s.resolution_max_n);
        r.numbers("transfer_feedback", s.transfer_feedback);
        r.number("transfer_r_in", s.transfer_r_in);
        r.number("transfer_v_in_stop", s.transfer_v_in_stop);
        r.number("transfer_v_in_step", s.transfer_v_in_step);
        r.number("transfer_v_out_min", s.transfer_v_out_min);
        r.number("transfer_v_out_max", s.transfer_v_out_max);
    });
    detail::section(doc, "amplifier_sweep", diags, [&](auto& r) {
        auto& a = cfg.amplifier;
        r.numbers("temperatures", a.temperatures);
        r.number("v_in_stop", a.v_in_stop);
        r.number("v_in_step", a.v_in_step);
        r.number("t_lo", a.t_lo);
        r.number("t_hi", a.t_hi);
        r.integer("t_points", a.t_points);
    });

    cfg.sweep.calibration = cfg.calibration;
    cfg.sweep.master_seed = cfg.master_seed;
    return out;
}

/// Semantic checks on a parsed config: physical bounds, reachability, model validity.
[[nodiscard]] inline std::vector<Diagnostic> check_config(const ExperimentConfig& cfg) {
    std::vector<Diagnostic> d;
    const auto& cal = cfg.calibration;
    const auto& dev = cal.device;
    using detail::check_positive;

    check_positive(d, "device.r_low", dev.r_low);
    if (!(dev.r_high > dev.r_low)) d.push_back({"device.r_high", "must exceed device.r_low"});
    if (!(dev.initial_resistance >= dev.r_low && dev.initial_resistance <= dev.r_high))
        d.push_back({"device.initial_resistance", "must lie within [r_low, r_high]"});
    if (!(dev.write_gain >= 0.0)) d.push_back({"device.write_gain", "must be non-negative"});
    if (!(dev.c2c_sigma >= 0.0)) d.push_back({"device.c2c_sigma", "must be non-negative"});
    if (!(dev.read_noise_alpha >= 0.0)) d.push_back({"device.read_noise_alpha", "must be non-negative"});
    if (!(dev.output_noise_alpha >= 0.0)) d.push_back({"device.output_noise_alpha", "must be non-negative"});
    check_positive(d, "device.max_write_voltage", dev.max_write_voltage);
    check_positive(d, "bank.r_in", cal.bank.r_in);
    if (cal.bank.v_in == 0.0) d.push_back({"bank.v_in", "must be non-zero"});
    if (cal.bank.memristor_count < 1) d.push_back({"bank.memristor_count", "must be at least 1"});
    if (!(cal.bank.output_noise_floor >= 0.0)) d.push_back({"bank.output_noise_floor", "must be non-negative"});
    check_positive(d, "temperature", cal.regime.temperature);

    try {
        cal.amplifier.validate();
    } catch (const ModelError& e) {
        d.push_back({"amplifier", e.what()});
    }
    if (!(std::abs(cal.bank.v_in) < cal.amplifier.rail())) d.push_back({"bank.v_in", "outside the amplifier input range"});
    try {
        cal.tune.validate();
    } catch (const ModelError& e) {
        d.push_back({"tune", e.what()});
    }
    if (cal.tune.max_amplitude > dev.max_write_voltage)
        d.push_back({"tune.max_amplitude", "exceeds device.max_write_voltage"});

    auto reachable = [&](const std::string& field, double v_trg) {
        if (cal.bank.v_in == 0.0 || !(cal.bank.r_in > 0.0) || cal.bank.memristor_count < 1) return;
        if (!(v_trg / cal.bank.v_in > 0.0)) {
            d.push_back({field, "target " + std::to_string(v_trg) + " V has the opposite sign of v_in"});
            return;
        }
        const double r = target_resistance(v_trg, cal.bank.v_in, cal.bank.memristor_count, cal.bank.r_in);
        if (r < dev.r_low || r > dev.r_high)
            d.push_back({field, "target " + std::to_string(v_trg) + " V needs " + std::to_string(r) +
                                    " ohm per device, outside [" + std::to_string(dev.r_low) + ", " +
                                    std::to_string(dev.r_high) + "]"});
        const double out_max = cal.amplifier.output_max();
        if (v_trg > out_max) d.push_back({field, "target above the amplifier output swing"});
    };

    switch (cfg.kind) {
    case ExperimentKind::sweep: {
        const auto& s = cfg.sweep;
        if (!(s.resolution > 0.0)) d.push_back({"sweep.resolution", "must be positive"});
        if (!(s.v_stop > s.v_start)) d.push_back({"sweep.v_stop", "must exceed sweep.v_start"});
        if (s.replications < 1) d.push_back({"sweep.replications", "must be at least 1"});
        if (s.measurement_samples < 1) d.push_back({"sweep.measurement_samples", "must be at least 1"});
        check_positive(d, "sweep.measurement_dt", s.measurement_dt);
        if (s.resolution > 0.0 && s.v_stop > s.v_start) {
            try {
                s.validate();
                for (double t : s.targets()) reachable("sweep", t);
            } catch (const ConfigError& e) {
                d.push_back({e.field(), e.what()});
            }
        }
        break;
    }
    case ExperimentKind::stability: {
        const auto& s = cfg.stability;
        if (s.targets.empty()) d.push_back({"stability.targets", "must not be empty"});
        for (double t : s.targets) reachable("stability.targets", t);
        check_positive(d, "stability.dt", s.dt);
        if (!(s.duration >= 10.0 * s.dt)) d.push_back({"stability.duration", "must be at least 10 * dt"});
        if (s.bins < 1) d.push_back({"stability.bins", "must be at least 1"});
        break;
    }
    case ExperimentKind::program:
        if (cfg.program.targets.empty()) d.push_back({"program.targets", "must not be empty"});
        for (double t : cfg.program.targets) reachable("program.targets", t);
        break;
    case ExperimentKind::scale: {
        const auto& s = cfg.scale;
        try {
            (void)find_scaling_model(s.power_calibration);
        } catch (const ConfigError& e) {
            d.push_back({"scale.power_calibration", e.what()});
        }
        for (const auto& t : s.technologies) {
            try {
                (void)find_envm(t);
            } catch (const ConfigError&) {
                d.push_back({"scale.technologies", "unknown eNVM technology '" + t + "'"});
            }
        }
        check_positive(d, "scale.grid_lo", s.grid_lo);
        if (!(s.grid_hi > s.grid_lo)) d.push_back({"scale.grid_hi", "must exceed scale.grid_lo"});
        if (s.grid_points < 2) d.push_back({"scale.grid_points", "must be at least 2"});
        check_positive(d, "scale.cooling_power", s.cooling_power);
        if (s.gates_per_dot < 1) d.push_back({"scale.gates_per_dot", "must be at least 1"});
        if (s.resolution_max_n < 1) d.push_back({"scale.resolution_max_n", "must be at least 1"});
        for (double r : s.transfer_feedback)
            if (!(r > 0.0)) d.push_back({"scale.transfer_feedback", "must be positive"});
        check_positive(d, "scale.transfer_r_in", s.transfer_r_in);
        check_positive(d, "scale.transfer_v_in_step", s.transfer_v_in_step);
        check_positive(d, "scale.transfer_v_in_stop", s.transfer_v_in_stop);
        if (!(s.transfer_v_out_max > s.transfer_v_out_min))
            d.push_back({"scale.transfer_v_out_max", "must exceed scale.transfer_v_out_min"});
        break;
    }
    case ExperimentKind::amplifier: {
        const auto& a = cfg.amplifier;
        for (double t : a.temperatures)
            if (!(t > 0.0)) d.push_back({"amplifier_sweep.temperatures", "must be positive"});
        check_positive(d, "amplifier_sweep.v_in_step", a.v_in_step);
        check_positive(d, "amplifier_sweep.v_in_stop", a.v_in_stop);
        check_positive(d, "amplifier_sweep.t_lo", a.t_lo);
        if (!(a.t_hi > a.t_lo)) d.push_back({"amplifier_sweep.t_hi", "must exceed amplifier_sweep.t_lo"});
        if (a.t_points < 2) d.push_back({"amplifier_sweep.t_points", "must be at least 2"});
        break;
    }
    }
    return d;
}

/// Parse + semantic checks; the full diagnostic list, empty when valid.
[[nodiscard]] inline std::vector<Diagnostic> validate(const nlohmann::json& doc) {
    auto parsed = parse_config(doc);
    if (!parsed.diagnostics.empty()) return parsed.diagnostics;
    return check_config(parsed.config);
}

[[nodiscard]] inline nlohmann::json load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("parse error in ") + path.string() + ": " + e.what());
    }
}

/// Parses and checks; throws ConfigError naming the first offending field.
[[nodiscard]] inline ExperimentConfig load_config(const nlohmann::json& doc) {
    auto parsed = parse_config(doc);
    auto diags = parsed.diagnostics;
    if (diags.empty()) diags = check_config(parsed.config);
    if (!diags.empty()) throw ConfigError(diags.front().field, diags.front().message);
    return parsed.config;
}

} // namespace memdc
