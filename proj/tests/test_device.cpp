#include <catch2/catch_amalgamated.hpp>

#include "memdc/amplifier.hpp"
#include "memdc/device.hpp"
#include "memdc/stats.hpp"

#include <cmath>
#include <vector>

using namespace memdc;
using Catch::Approx;

namespace {

MemristorState noiseless(double g) {
    MemristorState m;
    m.g_min = 1e-5;
    m.g_max = 2e-4;
    m.conductance = g;
    m.write_gain = 1e-6;
    m.write_threshold = 0.8;
    return m;
}

} // namespace

TEST_CASE("write pulse at exactly the threshold leaves conductance unchanged", "[device][write]") {
    auto m = noiseless(50e-6);
    m.c2c_sigma = 0.3;
    const auto next = apply_write_pulse(m, {m.write_threshold, 200e-9});
    CHECK(next.conductance == m.conductance);
}

TEST_CASE("write pulse saturates at g_max", "[device][write]") {
    auto m = noiseless(2e-4);
    const auto next = apply_write_pulse(m, {2.5, 200e-9});
    CHECK(next.conductance == m.g_max);
    const auto down = apply_write_pulse(noiseless(1e-5), {-2.5, 200e-9});
    CHECK(down.conductance == 1e-5);
}

TEST_CASE("noise-free write follows the threshold-linear law", "[device][write]") {
    // 50 uS + 1 uS/V * (1.0 - 0.8) V = 50.2 uS
    const auto next = apply_write_pulse(noiseless(50e-6), {1.0, 200e-9});
    CHECK(next.conductance == Approx(50.2e-6).epsilon(1e-12));
    const auto back = apply_write_pulse(next, {-1.0, 200e-9});
    CHECK(back.conductance == Approx(50e-6).epsilon(1e-12));
}

TEST_CASE("invalid pulses are rejected without changing state", "[device][write]") {
    auto m = noiseless(50e-6);
    const auto position = m.stream.position();
    CHECK_THROWS_AS(apply_write_pulse(m, {1.0, 0.0}), ModelError);
    CHECK_THROWS_AS(apply_write_pulse(m, {1.0, -1e-9}), ModelError);
    CHECK_THROWS_AS(apply_write_pulse(m, {3.5, 200e-9}), ModelError);
    CHECK_THROWS_AS(apply_write_pulse(m, {-3.01, 200e-9}), ModelError);
    CHECK(m.conductance == 50e-6);
    CHECK(m.stream.position() == position);
}

TEST_CASE("write response is monotone in amplitude without c2c noise", "[device][write][property]") {
    const auto m = noiseless(80e-6);
    double previous = -1.0;
    for (double a = 0.0; a <= 3.0; a += 0.05) {
        const double g = apply_write_pulse(m, {a, 200e-9}).conductance;
        CHECK(g >= previous);
        previous = g;
    }
}

TEST_CASE("noiseless read is the inverse conductance", "[device][read]") {
    auto m = noiseless(100e-6);
    CHECK(read_resistance(m, 0.2, 2e-6) == Approx(10e3).epsilon(1e-15));
    CHECK(m.conductance == 100e-6);
}

TEST_CASE("zero read voltage or width is an error", "[device][read]") {
    auto m = noiseless(100e-6);
    CHECK_THROWS_AS(read_resistance(m, 0.0, 1e-6), ModelError);
    CHECK_THROWS_AS(read_resistance(m, 0.2, 0.0), ModelError);
}

TEST_CASE("read noise statistics match the resistance-proportional law", "[device][read][montecarlo]") {
    auto m = noiseless(1.0 / 12e3);
    m.read_noise_alpha = 0.002;
    m.stream = RandomStream{2024};
    std::vector<double> reads(100000);
    for (auto& r : reads) r = read_resistance(m, 0.25, 2.5e-6);
    // std = alpha * R = 24 ohm
    CHECK(sample_std(reads) == Approx(24.0).epsilon(0.05));
    CHECK(mean(reads) == Approx(12e3).epsilon(1e-3));
    CHECK(sample_std(reads) / mean(reads) == Approx(0.002).epsilon(0.05));
    CHECK(m.conductance == 1.0 / 12e3);
}

TEST_CASE("reads are reproducible from stream position", "[device][read][determinism]") {
    auto a = noiseless(80e-6);
    a.read_noise_alpha = 0.01;
    a.stream = RandomStream{7, 13};
    auto b = a;
    CHECK(read_resistance(a, 0.3, 3e-6) == read_resistance(b, 0.3, 3e-6));
    CHECK(a.stream == b.stream);
}

TEST_CASE("drift step", "[device][drift]") {
    auto m = noiseless(100e-6);
    m.drift_rate = 1e-5;
    CHECK(drift_step(m, 0.0).conductance == m.conductance);
    CHECK(drift_step(m, 100.0).conductance == Approx(99.9e-6).epsilon(1e-12));
    m.drift_rate = 0.0;
    CHECK(drift_step(m, 1e6).conductance == m.conductance);
    m.drift_rate = 1.0;
    CHECK(drift_step(m, 10.0).conductance == m.g_min);
    CHECK_THROWS_AS(drift_step(m, -1.0), ModelError);
}

TEST_CASE("conductance never leaves its bounds under random pulse and drift sequences", "[device][property]") {
    RandomStream gen{99};
    for (int trial = 0; trial < 200; ++trial) {
        auto m = noiseless(1e-5 + gen.uniform() * 1.9e-4);
        m.write_gain = 20e-6 * gen.uniform();
        m.c2c_sigma = 0.5 * gen.uniform();
        m.drift_rate = (gen.uniform() - 0.3) * 1e-3;
        m.stream = RandomStream{gen.next_u64()};
        for (int step = 0; step < 200; ++step) {
            if (gen.uniform() < 0.7) {
                m = apply_write_pulse(m, {(gen.uniform() * 2.0 - 1.0) * 3.0, 200e-9});
            } else {
                m = drift_step(m, gen.uniform() * 100.0);
            }
            REQUIRE(m.conductance >= m.g_min);
            REQUIRE(m.conductance <= m.g_max);
        }
    }
}

TEST_CASE("identical seeds give bit-identical trajectories", "[device][determinism]") {
    auto run = [](std::uint64_t seed) {
        auto m = noiseless(60e-6);
        m.c2c_sigma = 0.1;
        m.read_noise_alpha = 0.01;
        m.stream = RandomStream{seed};
        std::vector<double> trace;
        for (int i = 0; i < 100; ++i) {
            m = apply_write_pulse(m, {(i % 7 < 4 ? 1.2 : -1.1), 200e-9});
            trace.push_back(m.conductance);
            trace.push_back(read_resistance(m, 0.25, 2.5e-6));
        }
        return trace;
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}

TEST_CASE("derived streams are independent of later siblings", "[rng]") {
    const RandomStream root{42};
    const auto first = root.child(StreamLabel::device, 0);
    CHECK(first == root.child(StreamLabel::device, 0));
    CHECK(first.key() != root.child(StreamLabel::device, 1).key());
    CHECK(first.key() != root.child(StreamLabel::replication, 0).key());
    RandomStream s{1};
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double z = s.normal();
        acc += z;
        acc2 += z * z;
    }
    CHECK(acc / 200000 == Approx(0.0).margin(0.01));
    CHECK(acc2 / 200000 == Approx(1.0).epsilon(0.01));
}

TEST_CASE("amplifier gain factor", "[amplifier]") {
    const AmplifierModel amp;
    CHECK(amplifier_gain_factor(amp, 300.0) == Approx(1.0).epsilon(1e-15));
    // closed-loop plateau 1.68 at nominal gain 2
    CHECK(amplifier_gain_factor(amp, 1.2) == Approx(0.84).epsilon(1e-15));
    CHECK(closed_loop_gain(amp, 1.2) == Approx(1.68).epsilon(1e-15));
    CHECK(amplifier_gain_factor(amp, 2.0) == amplifier_gain_factor(amp, 4.0));
    CHECK_THROWS_AS(amplifier_gain_factor(amp, 0.0), ModelError);

    // log-linear between 4.2 K and 300 K: halfway in log T sits halfway in eta
    const double t_mid = std::sqrt(4.2 * 300.0);
    CHECK(amplifier_gain_factor(amp, t_mid) == Approx(0.92).epsilon(1e-12));
    double prev = 0.0;
    for (double t = 4.2; t <= 300.0; t *= 1.1) {
        const double eta = amplifier_gain_factor(amp, t);
        CHECK(eta >= prev);
        CHECK(eta > 0.0);
        CHECK(eta <= 1.05);
        prev = eta;
    }
}

TEST_CASE("amplifier idle current anchors", "[amplifier]") {
    const AmplifierModel amp;
    CHECK(amplifier_idle_current(amp, 1.2) == Approx(1.4e-3));
    CHECK(amplifier_idle_current(amp, 77.0) == Approx(350e-6));
    CHECK(amplifier_idle_current(amp, 300.0) == Approx(1.0e-3));
    CHECK(amplifier_idle_current(amp, 1.2) / amplifier_idle_current(amp, 300.0) == Approx(1.4));
    // decreasing up to 77 K, increasing after
    CHECK(amplifier_idle_current(amp, 10.0) > amplifier_idle_current(amp, 40.0));
    CHECK(amplifier_idle_current(amp, 100.0) < amplifier_idle_current(amp, 200.0));
}

TEST_CASE("supply boost reproduces the 3.0 V cryogenic gain", "[amplifier]") {
    AmplifierModel amp;
    amp.boost_per_volt = 0.39286;
    CHECK(effective_gain_factor(amp, 1.2) == Approx(0.84));
    amp.v_dd = 3.0;
    amp.v_ss = -3.0;
    CHECK(effective_gain_factor(amp, 1.2) == Approx(0.939).epsilon(1e-4));
    CHECK(effective_gain_factor(amp, 300.0) <= amp.max_gain_factor);
}
