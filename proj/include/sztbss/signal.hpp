#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sztbss/error.hpp"
#include "sztbss/matrix.hpp"

namespace sztbss {

/// A real-valued sample sequence. All samples are finite.
class Signal {
public:
    Signal() = default;

    explicit Signal(std::vector<double> samples, std::optional<double> sample_rate_hz = std::nullopt)
        : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
        for (std::size_t i = 0; i < samples_.size(); ++i)
            detail::require(std::isfinite(samples_[i]),
                            "Signal: non-finite sample at index " + std::to_string(i));
        if (sample_rate_hz_)
            detail::require(*sample_rate_hz_ > 0.0 && std::isfinite(*sample_rate_hz_),
                            "Signal: sample rate must be positive");
    }

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    double operator[](std::size_t i) const { return samples_[i]; }
    std::span<const double> samples() const { return samples_; }
    const std::vector<double>& vec() const { return samples_; }

    std::optional<double> sample_rate_hz() const { return sample_rate_hz_; }

    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    friend bool operator==(const Signal&, const Signal&) = default;

private:
    std::vector<double> samples_;
    std::optional<double> sample_rate_hz_;
};

/// K >= 1 channels of equal length.
class MultiSignal {
public:
    MultiSignal() = default;

    explicit MultiSignal(std::vector<Signal> channels) : channels_(std::move(channels)) {
        detail::require(!channels_.empty(), "MultiSignal: at least one channel required");
        const std::size_t n = channels_.front().size();
        for (const auto& c : channels_)
            detail::require(c.size() == n, "MultiSignal: channels differ in length");
    }

    std::size_t channel_count() const { return channels_.size(); }
    std::size_t length() const { return channels_.empty() ? 0 : channels_.front().size(); }

    const Signal& operator[](std::size_t k) const { return channels_[k]; }
    const std::vector<Signal>& channels() const { return channels_; }

    friend bool operator==(const MultiSignal&, const MultiSignal&) = default;

private:
    std::vector<Signal> channels_;
};

inline double mean(std::span<const double> x) {
    return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Mean of x^2.
inline double power(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v * v;
    return s / static_cast<double>(x.size());
}

/// Pearson correlation with biased (1/N) covariances, clamped to [-1, 1].
/// Zero-variance input is an error rather than a silent 0.
inline double correlation(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size(), "correlation: length mismatch (" + std::to_string(x.size()) +
                                              " vs " + std::to_string(y.size()) + ")");
    detail::require(x.size() >= 2, "correlation: need at least 2 samples");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    detail::require(sxx > 0.0 && syy > 0.0, "correlation: zero-variance input");
    const double c = sxy / (std::sqrt(sxx) * std::sqrt(syy));
    return std::clamp(c, -1.0, 1.0);
}

inline double correlation(const Signal& x, const Signal& y) { return correlation(x.samples(), y.samples()); }

struct CorrelationReport {
    /// corr_matrix(r, s) = C(recovered_r, source_s).
    Matrix corr_matrix;
    /// assignment[r] = index of the source matched to recovered channel r.
    std::vector<std::size_t> assignment;
    /// |C| of each matched pair, indexed by source.
    std::vector<double> matched_abs_corr;
};

/// Correlates every recovered channel with every source over samples
/// [burn_in, N) and resolves the permutation/sign indeterminacy by the
/// assignment maximizing the summed |C|. Exhaustive for K <= 4, greedy above.
inline CorrelationReport match_and_score(const MultiSignal& recovered, const MultiSignal& sources,
                                         std::size_t burn_in) {
    const std::size_t k = sources.channel_count();
    detail::require(recovered.channel_count() == k, "match_and_score: channel count mismatch (" +
                                                        std::to_string(recovered.channel_count()) + " vs " +
                                                        std::to_string(k) + ")");
    detail::require(recovered.length() == sources.length(), "match_and_score: length mismatch");
    detail::require(burn_in < sources.length(), "match_and_score: burn-in must be shorter than the signal");

    CorrelationReport rep;
    rep.corr_matrix = Matrix(k, k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t s = 0; s < k; ++s)
            rep.corr_matrix(r, s) = correlation(recovered[r].samples().subspan(burn_in),
                                                sources[s].samples().subspan(burn_in));

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    if (k <= 4) {
        std::vector<std::size_t> best = perm;
        double best_sum = -1.0;
        do {
            double sum = 0.0;
            for (std::size_t r = 0; r < k; ++r) sum += std::abs(rep.corr_matrix(r, perm[r]));
            if (sum > best_sum) {
                best_sum = sum;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        perm = best;
    } else {
        std::vector<bool> r_used(k, false), s_used(k, false);
        for (std::size_t step = 0; step < k; ++step) {
            double best = -1.0;
            std::size_t br = 0, bs = 0;
            for (std::size_t r = 0; r < k; ++r) {
                if (r_used[r]) continue;
                for (std::size_t s = 0; s < k; ++s) {
                    if (s_used[s]) continue;
                    if (std::abs(rep.corr_matrix(r, s)) > best) {
                        best = std::abs(rep.corr_matrix(r, s));
                        br = r;
                        bs = s;
                    }
                }
            }
            r_used[br] = s_used[bs] = true;
            perm[br] = bs;
        }
    }

    rep.assignment = perm;
    rep.matched_abs_corr.assign(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) rep.matched_abs_corr[perm[r]] = std::abs(rep.corr_matrix(r, perm[r]));
    return rep;
}

} // namespace sztbss
