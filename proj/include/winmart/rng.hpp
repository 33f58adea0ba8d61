#pragma once

#include <array>
#include <cstdint>

namespace winmart {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Counter-based: the output is a pure function of (counter, key), so each
// path can be given its own stream without any shared generator state.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

// Stream identifiers occupying the last counter word.
enum class RngStream : std::uint32_t {
    Increments = 0,  // Gaussian increments of the driving Brownian motion
    Terminal = 1,    // Bernoulli completion of the terminal outcome
};

constexpr PhiloxKey seed_key(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

constexpr PhiloxCounter path_counter(std::uint64_t index, std::uint64_t path, RngStream stream) {
    return {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(path),
            static_cast<std::uint32_t>(path >> 32), static_cast<std::uint32_t>(stream)};
}

// Uniform in (0, 1) from two words: 52 random bits, offset by half a unit so
// both endpoints are excluded exactly.
constexpr double uniform_open01(std::uint32_t lo, std::uint32_t hi) {
    const double high = static_cast<double>(hi >> 12);
    const double low = static_cast<double>(lo);
    return (high * 0x1p32 + low + 0.5) * 0x1p-52;
}

} // namespace winmart
