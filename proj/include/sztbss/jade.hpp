#pragma once

// Real-valued JADE for instantaneous mixtures:
//   center + whiten  ->  K^2 fourth-order cumulant matrices
//   ->  joint approximate diagonalization by Givens sweeps.
// All moment estimators use 1/T normalization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "sztbss/error.hpp"
#include "sztbss/givens.hpp"
#include "sztbss/matrix.hpp"
#include "sztbss/symmetric_eigen.hpp"

namespace sztbss {

/// K channels (rows) by T samples (columns).
using DataMatrix = Matrix;

struct WhiteningResult {
    Matrix whitener;            // W, K x K
    std::vector<double> mean;   // per channel
    DataMatrix whitened;        // W (X - mean)
};

struct JointDiagOptions {
    double threshold = 1e-6;    // rotations with |angle| <= threshold are skipped
    std::size_t max_sweeps = 100;
    /// Called with the off-diagonal criterion before and after every applied rotation.
    std::function<void(double before, double after)> rotation_observer;
};

struct JointDiagResult {
    Matrix rotation;            // V, orthogonal
    std::size_t sweeps = 0;
    std::size_t rotations = 0;
    bool converged = false;
    double criterion = 0.0;     // sum_k sum_{i != j} M_k(i, j)^2 after rotation
    double total = 0.0;         // sum_k ||M_k||_F^2 (rotation invariant)

    double relative_criterion() const { return total > 0.0 ? criterion / total : 0.0; }
};

struct JadeModel {
    WhiteningResult whitening;
    Matrix rotation;            // V
    Matrix unmixing;            // B = V^T W
    DataMatrix separated;       // Y = B (X - mean)
    std::size_t sweeps = 0;
    bool converged = false;
    double criterion = 0.0;
    double relative_criterion = 0.0;

    /// Fourth-order structure was actually diagonalized. Gaussian inputs
    /// leave a large residual because they carry no fourth-order information.
    bool identifiable() const { return relative_criterion < 1e-3; }
};

inline double joint_off_criterion(const std::vector<Matrix>& ms) {
    double s = 0.0;
    for (const auto& m : ms) s += off_diagonal_sq(m);
    return s;
}

inline std::vector<double> row_means(const DataMatrix& x) {
    std::vector<double> mu(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (double v : x.row(i)) s += v;
        mu[i] = s / static_cast<double>(x.cols());
    }
    return mu;
}

/// Biased sample covariance of the rows of x about mu.
inline Matrix sample_covariance(const DataMatrix& x, const std::vector<double>& mu) {
    const std::size_t k = x.rows();
    const auto t = static_cast<double>(x.cols());
    Matrix c(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            const auto xi = x.row(i);
            const auto xj = x.row(j);
            double s = 0.0;
            for (std::size_t n = 0; n < x.cols(); ++n) s += (xi[n] - mu[i]) * (xj[n] - mu[j]);
            c(i, j) = c(j, i) = s / t;
        }
    return c;
}

inline Matrix sample_covariance(const DataMatrix& x) { return sample_covariance(x, row_means(x)); }

/// W = Lambda^-1/2 E^T from the eigendecomposition of the sample covariance.
inline WhiteningResult center_whiten(const DataMatrix& x) {
    const std::size_t k = x.rows();
    detail::require(k >= 1, "center_whiten: no channels");
    detail::require(x.cols() > k, "center_whiten: need more samples (" + std::to_string(x.cols()) +
                                      ") than channels (" + std::to_string(k) + ")");
    for (double v : x.data()) detail::require(std::isfinite(v), "center_whiten: non-finite data");

    WhiteningResult out;
    out.mean = row_means(x);
    const Matrix cov = sample_covariance(x, out.mean);
    const SymmetricEigen eig = jacobi_eigen(cov, 1e-12);

    const double lmax = eig.values.front();
    const double lmin = eig.values.back();
    if (!(lmax > 0.0) || lmin < 1e-12 * lmax)
        throw Error("center_whiten: singular or near-singular covariance (eigenvalues " + std::to_string(lmin) +
                    " .. " + std::to_string(lmax) + "); the mixture is degenerate");

    out.whitener = Matrix(k, k);
    for (std::size_t r = 0; r < k; ++r) {
        const double scale = 1.0 / std::sqrt(eig.values[r]);
        for (std::size_t c = 0; c < k; ++c) out.whitener(r, c) = scale * eig.vectors(c, r);
    }

    out.whitened = DataMatrix(k, x.cols());
    for (std::size_t n = 0; n < x.cols(); ++n)
        for (std::size_t r = 0; r < k; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c) s += out.whitener(r, c) * (x(c, n) - out.mean[c]);
            out.whitened(r, n) = s;
        }
    return out;
}

/// Q^{ij}_{kl} = E[x_i x_j x_k x_l] - d_ij d_kl - d_ik d_jl - d_il d_jk, for
/// whitened zero-mean data. Returned in order i*K + j.
inline std::vector<Matrix> cumulant_matrices(const DataMatrix& xw) {
    const std::size_t k = xw.rows();
    detail::require(k >= 1 && xw.cols() >= 1, "cumulant_matrices: empty data");
    const auto t = static_cast<double>(xw.cols());

    // Unique index quadruples a <= b <= c <= d.
    struct Quad { std::size_t a, b, c, d; };
    std::vector<Quad> quads;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b)
            for (std::size_t c = b; c < k; ++c)
                for (std::size_t d = c; d < k; ++d) quads.push_back({a, b, c, d});

    std::vector<double> moments(quads.size(), 0.0);
    std::vector<double> col(k);
    for (std::size_t n = 0; n < xw.cols(); ++n) {
        for (std::size_t i = 0; i < k; ++i) col[i] = xw(i, n);
        for (std::size_t q = 0; q < quads.size(); ++q) {
            const auto& u = quads[q];
            moments[q] += col[u.a] * col[u.b] * col[u.c] * col[u.d];
        }
    }

    auto flat = [k](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return ((a * k + b) * k + c) * k + d;
    };
    std::vector<double> tensor(k * k * k * k);
    for (std::size_t q = 0; q < quads.size(); ++q) {
        std::size_t idx[4] = {quads[q].a, quads[q].b, quads[q].c, quads[q].d};
        const double m = moments[q] / t;
        do {
            tensor[flat(idx[0], idx[1], idx[2], idx[3])] = m;
        } while (std::next_permutation(idx, idx + 4));
    }

    auto delta = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
    std::vector<Matrix> out;
    out.reserve(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            Matrix q(k, k);
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = 0; b < k; ++b)
                    q(a, b) = tensor[flat(i, j, a, b)] - delta(i, j) * delta(a, b) - delta(i, a) * delta(j, b) -
                              delta(i, b) * delta(j, a);
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = a + 1; b < k; ++b) q(a, b) = q(b, a) = 0.5 * (q(a, b) + q(b, a));
            out.push_back(std::move(q));
        }
    return out;
}

/// Finds orthogonal V such that V^T M_k V is as diagonal as possible for all k.
/// Each pair (p, q) is rotated by the closed-form angle that maximizes
/// sum_k (M_k(p,p) - M_k(q,q))^2 + (2 M_k(p,q))^2 restricted to the plane.
inline JointDiagResult joint_diagonalize(std::vector<Matrix> ms, const JointDiagOptions& opt = {}) {
    detail::require(!ms.empty(), "joint_diagonalize: empty matrix set");
    const std::size_t k = ms.front().rows();
    detail::require(k >= 2, "joint_diagonalize: need K >= 2");
    for (const auto& m : ms) {
        detail::require(m.rows() == k && m.cols() == k, "joint_diagonalize: matrices differ in shape");
        detail::require(m.is_symmetric(), "joint_diagonalize: input matrix is not symmetric");
    }

    JointDiagResult res;
    res.rotation = Matrix::identity(k);
    for (const auto& m : ms) {
        const double f = frobenius_norm(m);
        res.total += f * f;
    }

    bool changed = true;
    while (changed && res.sweeps < opt.max_sweeps) {
        changed = false;
        ++res.sweeps;
        for (std::size_t p = 0; p + 1 < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) {
                double g11 = 0.0, g22 = 0.0, g12 = 0.0;
                for (const auto& m : ms) {
                    const double h1 = m(p, p) - m(q, q);
                    const double h2 = m(p, q) + m(q, p);
                    g11 += h1 * h1;
                    g22 += h2 * h2;
                    g12 += h1 * h2;
                }
                const double ton = g11 - g22;
                const double toff = 2.0 * g12;
                const double angle = 0.5 * std::atan2(toff, ton + std::hypot(ton, toff));
                if (!(std::abs(angle) > opt.threshold)) continue;

                const GivensRotation g{p, q, std::cos(angle), std::sin(angle)};
                const double before = opt.rotation_observer ? joint_off_criterion(ms) : 0.0;
                for (auto& m : ms) {
                    g.apply_similarity(m);
                    // keep exact symmetry against rounding drift
                    for (std::size_t i = 0; i < k; ++i) {
                        const double v = 0.5 * (m(p, i) + m(i, p));
                        m(p, i) = m(i, p) = v;
                        const double w = 0.5 * (m(q, i) + m(i, q));
                        m(q, i) = m(i, q) = w;
                    }
                }
                g.apply_right(res.rotation);
                ++res.rotations;
                changed = true;
                if (opt.rotation_observer) opt.rotation_observer(before, joint_off_criterion(ms));
            }
    }
    res.converged = !changed;
    res.criterion = joint_off_criterion(ms);
    return res;
}

struct JadeOptions {
    double threshold = 1e-6;
    std::size_t max_sweeps = 100;
};

/// Y = V^T W (X - mean).
inline JadeModel jade_separate(const DataMatrix& x, const JadeOptions& opt = {}) {
    const std::size_t k = x.rows();
    detail::require(k >= 2, "jade_separate: need at least 2 channels");

    JadeModel model;
    model.whitening = center_whiten(x);
    JointDiagOptions jd;
    jd.threshold = opt.threshold;
    jd.max_sweeps = opt.max_sweeps;
    const JointDiagResult r = joint_diagonalize(cumulant_matrices(model.whitening.whitened), jd);

    model.rotation = r.rotation;
    model.sweeps = r.sweeps;
    model.converged = r.converged;
    model.criterion = r.criterion;
    model.relative_criterion = r.relative_criterion();
    const Matrix vt = r.rotation.transposed();
    model.unmixing = vt * model.whitening.whitener;
    model.separated = vt * model.whitening.whitened;
    return model;
}

} // namespace sztbss
