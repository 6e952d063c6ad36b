#pragma once

// Counter-based random streams.
//
// Every stream is a (key, counter) pair. Draw k of a stream is
// splitmix64_mix(key + k * golden), so a stream is 16 bytes, copies are
// cheap, and any draw is reproducible from its position alone. Child keys
// are derived by mixing the parent key with a label and an index:
//
//     derive_key(master, Label::replication, r)       -> replication stream
//     derive_key(rep_key, Label::device, i)            -> device i stream
//
// Adding replications or devices never perturbs existing streams.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace memdc {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

[[nodiscard]] constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

enum class StreamLabel : std::uint64_t {
    replication = 0x7265706CULL, // "repl"
    device = 0x64657669ULL,      // "devi"
    output = 0x6F757470ULL,      // "outp"
    property = 0x70726F70ULL,    // "prop"
};

[[nodiscard]] constexpr std::uint64_t derive_key(std::uint64_t parent, StreamLabel label,
                                                 std::uint64_t index) noexcept {
    const auto a = splitmix64_mix(parent ^ splitmix64_mix(static_cast<std::uint64_t>(label)));
    return splitmix64_mix(a + (index + 1) * golden_gamma);
}

class RandomStream {
public:
    constexpr RandomStream() noexcept = default;
    constexpr explicit RandomStream(std::uint64_t key, std::uint64_t position = 0) noexcept
        : key_(key), position_(position) {}

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] constexpr std::uint64_t position() const noexcept { return position_; }

    constexpr std::uint64_t next_u64() noexcept {
        ++position_;
        return splitmix64_mix(key_ + position_ * golden_gamma);
    }

    /// Uniform in (0, 1].
    double uniform() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal; Box-Muller, one value per two draws (no cached spare).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

    [[nodiscard]] constexpr RandomStream child(StreamLabel label, std::uint64_t index) const noexcept {
        return RandomStream{derive_key(key_, label, index)};
    }

    friend constexpr bool operator==(const RandomStream&, const RandomStream&) = default;

private:
    std::uint64_t key_ = 0;
    std::uint64_t position_ = 0;
};

} // namespace memdc
