// memdc: command-line driver for the memristor DC source simulator.
//
//   memdc sweep     --config configs/fig4a-room.json [--seed N] [--out DIR]
//   memdc stability --config configs/fig4b-room.json
//   memdc program   --config configs/program-room.json
//   memdc scale     --config configs/fig5d-scan.json
//   memdc amplifier --config configs/fig2c-amplifier.json
//   memdc validate  --config any.json

#include "memdc/config.hpp"
#include "memdc/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

nlohmann::json load_with_overrides(const Options& opt, const std::string& kind) {
    auto doc = memdc::load_document(opt.config);
    if (!doc.is_object()) throw memdc::ConfigError("config", "configuration must be a JSON object");
    if (!kind.empty()) {
        if (doc.contains("kind") && doc["kind"] != kind)
            throw memdc::ConfigError("kind", "config is a '" + doc["kind"].dump() + "' experiment, not '" + kind + "'");
        doc["kind"] = kind;
    }
    if (opt.seed) doc["seed"] = *opt.seed;
    return doc;
}

int run_kind(const Options& opt, const std::string& kind) {
    const auto doc = load_with_overrides(opt, kind);
    const auto cfg = memdc::load_config(doc);
    const auto manifest = memdc::run(cfg, opt.out.empty() ? std::filesystem::path{} : std::filesystem::path{opt.out});
    for (const auto& f : manifest.files) std::cout << f.sha256 << "  " << f.name << '\n';
    std::cout << "manifest: " << manifest.manifest_path.string() << '\n';
    return 0;
}

int run_validate(const Options& opt) {
    const auto doc = load_with_overrides(opt, "");
    const auto diags = memdc::validate(doc);
    for (const auto& d : diags) std::cerr << "error: " << (d.field.empty() ? "<root>" : d.field) << ": " << d.message << '\n';
    if (diags.empty()) std::cout << opt.config << ": ok\n";
    return diags.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memristor-based programmable DC source simulator"};
    app.require_subcommand(1);

    Options opt;
    auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "Override the master seed");
        sub->add_option("--out", opt.out, "Output directory (overrides output_dir)");
        return sub;
    };
    add("sweep", "Repeated DC sweeps with MRE analysis");
    add("stability", "Stability traces with drift fit and noise statistics");
    add("program", "Program a source to one or more target voltages");
    add("scale", "Integrated eNVM source power and count scaling");
    add("amplifier", "Amplifier gain and idle current versus temperature");
    add("validate", "Check a configuration without running it");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto* sub = app.get_subcommands().front();
        if (sub->get_name() == "validate") return run_validate(opt);
        return run_kind(opt, sub->get_name());
    } catch (const memdc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
