#pragma once

// Portable, fixed random streams. The bit generator is xoshiro256** seeded
// through splitmix64; the uniform and normal transforms are implemented here
// rather than taken from <random>, whose distributions are not specified
// bit-for-bit across standard libraries.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sztbss {

/// Seed for every generator in the library. Same seed, same output.
struct Seed {
    std::uint64_t value = 0;

    constexpr Seed() = default;
    constexpr explicit Seed(std::uint64_t v) : value(v) {}

    friend constexpr bool operator==(Seed, Seed) = default;
};

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent sub-seed for a named stream (sources, mixer, z, noise...).
constexpr Seed derive_seed(Seed base, std::uint64_t stream) {
    std::uint64_t s = base.value ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    splitmix64(s);
    return Seed{splitmix64(s)};
}

class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(Seed seed) {
        std::uint64_t sm = seed.value;
        for (auto& w : state_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform_open() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform on the open interval (lo, hi).
    double uniform_open(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

    /// Uniform integer in [0, n). Multiply-shift; bias is below 2^-64 * n.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sztbss
