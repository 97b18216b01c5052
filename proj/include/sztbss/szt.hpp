#pragma once

// Sliding Z transform with unit step.
//
// For a window of length WIN slid one sample at a time,
//   S(z, n) = sum_{m=0}^{WIN-1} s(n+m) z^-m,
// consecutive windows satisfy the comb relation
//   S(z, n) - z^-1 S(z, n+1) = s(n) - z^-WIN s(n+WIN) =: S'(n).
// comb_forward evaluates the right-hand side directly; comb_inverse runs the
// recursion s(n+WIN) = (s(n) - S'(n)) z^WIN, which is stable for 0 < z < 1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sztbss/error.hpp"
#include "sztbss/rng.hpp"
#include "sztbss/signal.hpp"

namespace sztbss {

struct SztParams {
    std::size_t win = 8;
    double z = 0.9;
    std::size_t step = 1;
    /// Accept window lengths that are not powers of two.
    bool allow_any_win = false;

    void validate() const {
        detail::require(win >= 1, "SztParams: window length must be >= 1");
        detail::require(allow_any_win || std::has_single_bit(win),
                        "SztParams: window length " + std::to_string(win) + " is not a power of two");
        detail::require(z > 0.0 && z < 1.0, "SztParams: z must lie in (0, 1)");
        detail::require(-static_cast<double>(win) * std::log(z) < 690.0,
                        "SztParams: z^-WIN overflows double precision");
        detail::require(step == 1, "SztParams: only unit step is supported");
    }

    /// z^-WIN
    double comb_gain() const { return std::pow(z, -static_cast<double>(win)); }
};

inline constexpr double kZMax = 0.999;

/// Lower end of the z draw range: z^-win stays below e^45.
inline double z_lower_bound(std::size_t win) {
    return std::max(0.5, std::exp(-45.0 / static_cast<double>(win)));
}

/// Draws the transform point uniformly from (max(0.5, e^(-45/win)), 0.999).
inline double sample_z(std::size_t win, Seed seed) {
    detail::require(win >= 1, "sample_z: window length must be >= 1");
    Xoshiro256 rng(seed);
    return rng.uniform_open(z_lower_bound(win), kZMax);
}

/// Direct Horner evaluation of S(z, n).
inline double windowed_z(std::span<const double> s, const SztParams& p, std::size_t n) {
    p.validate();
    detail::require(s.size() >= p.win && n <= s.size() - p.win,
                    "windowed_z: start index " + std::to_string(n) + " out of range");
    const double zinv = 1.0 / p.z;
    double acc = 0.0;
    for (std::size_t m = p.win; m-- > 0;) acc = acc * zinv + s[n + m];
    return acc;
}

/// S'(n) = s(n) - s(n+WIN) z^-WIN for n = 0 .. N-WIN-1.
inline Signal comb_forward(const Signal& s, const SztParams& p) {
    p.validate();
    detail::require(s.size() > p.win, "comb_forward: signal length " + std::to_string(s.size()) +
                                          " must exceed the window length " + std::to_string(p.win));
    const double g = p.comb_gain();
    const std::size_t m = s.size() - p.win;
    std::vector<double> out(m);
    for (std::size_t n = 0; n < m; ++n) out[n] = s[n] - s[n + p.win] * g;
    return Signal(std::move(out), s.sample_rate_hz());
}

/// Inverts comb_forward: s(0..WIN-1) = init, s(n+WIN) = (s(n) - S'(n)) z^WIN.
inline Signal comb_inverse(const Signal& sprime, const SztParams& p, std::span<const double> init) {
    p.validate();
    detail::require(!sprime.empty(), "comb_inverse: empty input");
    detail::require(init.size() == p.win, "comb_inverse: expected " + std::to_string(p.win) +
                                              " initial values, got " + std::to_string(init.size()));
    const double zw = std::pow(p.z, static_cast<double>(p.win));
    std::vector<double> out(sprime.size() + p.win);
    std::copy(init.begin(), init.end(), out.begin());
    for (std::size_t n = 0; n < sprime.size(); ++n) out[n + p.win] = (out[n] - sprime[n]) * zw;
    return Signal(std::move(out), sprime.sample_rate_hz());
}

/// Zero initial conditions.
inline Signal comb_inverse(const Signal& sprime, const SztParams& p) {
    const std::vector<double> zeros(p.win, 0.0);
    return comb_inverse(sprime, p, zeros);
}

/// Smallest multiple of WIN after which the zero-init transient has decayed
/// by tol (z^B <= tol), capped at n_total / 4.
inline std::size_t burn_in_length(const SztParams& p, double tol, std::size_t n_total) {
    p.validate();
    detail::require(tol > 0.0 && tol <= 1.0, "burn_in_length: tol must lie in (0, 1]");
    const std::size_t cap = n_total / 4;
    const double per_block = static_cast<double>(p.win) * std::log(p.z);
    double blocks = std::ceil(std::log(tol) / per_block);
    if (blocks < 0.0) blocks = 0.0;
    // guard the ceil against rounding on exact powers
    while (blocks > 0.0 && (blocks - 1.0) * per_block <= std::log(tol)) blocks -= 1.0;
    const double b = blocks * static_cast<double>(p.win);
    if (b >= static_cast<double>(cap)) return cap;
    return static_cast<std::size_t>(b);
}

} // namespace sztbss
