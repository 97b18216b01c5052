#pragma once

// FIR convolutive mixing: x_i(n) = sum_j sum_l A^(l)_ij * s_j(n - l),
// with zero prehistory and output length equal to input length.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sztbss/error.hpp"
#include "sztbss/matrix.hpp"
#include "sztbss/rng.hpp"
#include "sztbss/signal.hpp"

namespace sztbss {

class ConvolutiveMixer {
public:
    /// taps[l] is the K x K matrix for delay l.
    explicit ConvolutiveMixer(std::vector<Matrix> taps) : taps_(std::move(taps)) {
        detail::require(!taps_.empty(), "ConvolutiveMixer: need at least one path");
        const std::size_t k = taps_.front().rows();
        detail::require(k >= 1, "ConvolutiveMixer: need at least one channel");
        for (const auto& a : taps_) {
            detail::require(a.rows() == k && a.cols() == k, "ConvolutiveMixer: every tap must be K x K");
            for (double v : a.data()) detail::require(std::isfinite(v), "ConvolutiveMixer: non-finite coefficient");
        }
    }

    std::size_t channels() const { return taps_.front().rows(); }
    std::size_t paths() const { return taps_.size(); }
    const Matrix& tap(std::size_t l) const { return taps_[l]; }
    const std::vector<Matrix>& taps() const { return taps_; }

    friend bool operator==(const ConvolutiveMixer&, const ConvolutiveMixer&) = default;

private:
    std::vector<Matrix> taps_;
};

/// Every coefficient i.i.d. uniform on (0, 1).
inline ConvolutiveMixer random_mixer(std::size_t k, std::size_t paths, Seed seed) {
    detail::require(k >= 1 && paths >= 1, "random_mixer: K and L must be >= 1");
    Xoshiro256 rng(seed);
    std::vector<Matrix> taps;
    for (std::size_t l = 0; l < paths; ++l) {
        Matrix a(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) a(i, j) = rng.uniform_open();
        taps.push_back(std::move(a));
    }
    return ConvolutiveMixer(std::move(taps));
}

inline MultiSignal mix(const ConvolutiveMixer& mixer, const MultiSignal& sources) {
    const std::size_t k = mixer.channels();
    detail::require(sources.channel_count() == k, "mix: mixer has " + std::to_string(k) + " channels, sources have " +
                                                      std::to_string(sources.channel_count()));
    const std::size_t n = sources.length();
    detail::require(n >= mixer.paths(), "mix: sources shorter than the number of paths");

    std::vector<Signal> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> x(n, 0.0);
        for (std::size_t l = 0; l < mixer.paths(); ++l) {
            const Matrix& a = mixer.tap(l);
            for (std::size_t j = 0; j < k; ++j) {
                const double c = a(i, j);
                const auto& s = sources[j].vec();
                for (std::size_t t = l; t < n; ++t) x[t] += c * s[t - l];
            }
        }
        out.emplace_back(std::move(x), sources[0].sample_rate_hz());
    }
    return MultiSignal(std::move(out));
}

/// A(z) = sum_l A^(l) z^-l.
inline Matrix mixer_at_z(const ConvolutiveMixer& mixer, double z) {
    detail::require(z != 0.0, "mixer_at_z: z must be nonzero");
    Matrix acc(mixer.channels(), mixer.channels());
    double zl = 1.0;
    for (std::size_t l = 0; l < mixer.paths(); ++l) {
        acc = acc + zl * mixer.tap(l);
        zl /= z;
    }
    return acc;
}

} // namespace sztbss
