#pragma once

// Seeded source generators for the experiment presets and the AWGN channel.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "sztbss/error.hpp"
#include "sztbss/rng.hpp"
#include "sztbss/signal.hpp"

namespace sztbss {

/// Real QPSK on a carrier with rectangular symbols:
/// s(k) = cos(2*pi*carrier*k + phi_m), phi_m in {pi/4, 3pi/4, 5pi/4, 7pi/4}, m = k / sps.
inline Signal gen_qpsk(std::size_t n, std::size_t sps, double carrier, Seed seed) {
    detail::require(sps >= 1, "gen_qpsk: samples per symbol must be >= 1");
    detail::require(carrier > 0.0 && carrier < 0.5, "gen_qpsk: carrier must lie in (0, 0.5) cycles/sample");
    detail::require(n >= sps, "gen_qpsk: need at least one full symbol");

    Xoshiro256 rng(seed);
    std::vector<double> s(n);
    double phase = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % sps == 0) phase = std::numbers::pi / 4.0 + std::numbers::pi / 2.0 * static_cast<double>(rng.below(4));
        s[k] = std::cos(2.0 * std::numbers::pi * carrier * static_cast<double>(k) + phase);
    }
    return Signal(std::move(s));
}

/// Unit-peak Gaussian-derivative pulse shapes.
inline double gauss_pulse(int order, double t) {
    if (order == 1) return -t * std::exp(0.5 * (1.0 - t * t)); // peak +1 at t = -1
    return (1.0 - t * t) * std::exp(-0.5 * t * t);              // peak +1 at t = 0
}

/// Sparse train of n_pulses Gauss pulses. Each pulse occupies its own slot of
/// 6*width samples (support |k - c| <= 3*width), slots never overlap, and the
/// free space is distributed between them at random.
inline Signal gen_gauss_pulse_train(std::size_t n, int order, std::size_t n_pulses, double width, Seed seed,
                                    std::vector<std::size_t>* centers_out = nullptr) {
    detail::require(order == 1 || order == 2, "gen_gauss_pulse_train: order must be 1 or 2");
    detail::require(width > 0.0, "gen_gauss_pulse_train: width must be positive");
    const auto half = static_cast<std::size_t>(std::ceil(3.0 * width));
    const std::size_t slot = 2 * half + 1;
    detail::require(n_pulses * slot <= n && static_cast<double>(n_pulses) * width * 6.0 <= static_cast<double>(n),
                    "gen_gauss_pulse_train: " + std::to_string(n_pulses) + " pulses of width " +
                        std::to_string(width) + " cannot be placed without overlap in " + std::to_string(n) +
                        " samples");

    Xoshiro256 rng(seed);
    const std::size_t slack = n - n_pulses * slot;
    std::vector<std::size_t> offsets(n_pulses);
    for (auto& o : offsets) o = rng.below(slack + 1);
    std::sort(offsets.begin(), offsets.end());

    std::vector<double> s(n, 0.0);
    std::vector<std::size_t> centers(n_pulses);
    for (std::size_t j = 0; j < n_pulses; ++j) {
        const std::size_t c = offsets[j] + j * slot + half;
        centers[j] = c;
        for (std::size_t k = c - half; k <= c + half; ++k)
            s[k] = gauss_pulse(order, (static_cast<double>(k) - static_cast<double>(c)) / width);
    }
    if (centers_out) *centers_out = std::move(centers);
    return Signal(std::move(s));
}

/// i.i.d. zero-mean Gaussian samples.
inline Signal gen_wgn(std::size_t n, double variance, Seed seed) {
    detail::require(n >= 1, "gen_wgn: n must be >= 1");
    detail::require(variance > 0.0, "gen_wgn: variance must be positive");
    Xoshiro256 rng(seed);
    const double sd = std::sqrt(variance);
    std::vector<double> s(n);
    for (auto& v : s) v = sd * rng.normal();
    return Signal(std::move(s));
}

/// y = x + w with var(w) = mean(x^2) / 10^(snr_db/10).
inline Signal awgn(const Signal& x, double snr_db, Seed seed) {
    detail::require(!x.empty(), "awgn: empty input");
    const double p = power(x.samples());
    detail::require(p > 0.0, "awgn: zero-power input");
    const double sd = std::sqrt(p / std::pow(10.0, snr_db / 10.0));
    Xoshiro256 rng(seed);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + sd * rng.normal();
    return Signal(std::move(y), x.sample_rate_hz());
}

} // namespace sztbss

namespace sztbss {

/// Audio-like stand-in for recorded sounds: Gaussian noise through a
/// two-pole resonator (centre frequency and bandwidth in cycles/sample),
/// gated by random bursts of length `burst` with raised-cosine fades.
/// Normalized to a peak of 0.9.
inline Signal gen_audio_like(std::size_t n, double centre, double bandwidth, std::size_t burst, Seed seed) {
    detail::require(n >= 1, "gen_audio_like: n must be >= 1");
    detail::require(centre > 0.0 && centre < 0.5, "gen_audio_like: centre frequency must lie in (0, 0.5)");
    detail::require(bandwidth > 0.0 && bandwidth < 0.5, "gen_audio_like: bandwidth must lie in (0, 0.5)");
    detail::require(burst >= 2, "gen_audio_like: burst length must be >= 2");

    Xoshiro256 rng(seed);
    const double r = std::exp(-std::numbers::pi * bandwidth);
    const double a1 = -2.0 * r * std::cos(2.0 * std::numbers::pi * centre);
    const double a2 = r * r;

    std::vector<double> y(n);
    double y1 = 0.0, y2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = rng.normal() - a1 * y1 - a2 * y2;
        y2 = y1;
        y1 = v;
        y[i] = v;
    }

    // Per-burst gains; about a third of the bursts are near-silent.
    const std::size_t blocks = n / burst + 2;
    std::vector<double> gain(blocks);
    for (auto& g : gain) g = rng.uniform_open() < 0.3 ? 0.05 : rng.uniform_open(0.2, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = i / burst;
        const double frac = static_cast<double>(i % burst) / static_cast<double>(burst);
        const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * frac);
        y[i] *= (1.0 - w) * gain[b] + w * gain[b + 1];
    }

    double peak = 0.0;
    for (double v : y) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (auto& v : y) v *= 0.9 / peak;
    return Signal(std::move(y));
}

} // namespace sztbss
