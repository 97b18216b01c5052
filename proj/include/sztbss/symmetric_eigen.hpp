#pragma once

// Cyclic Jacobi eigensolver for small symmetric matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "sztbss/error.hpp"
#include "sztbss/givens.hpp"
#include "sztbss/matrix.hpp"

namespace sztbss {

struct SymmetricEigen {
    /// Descending.
    std::vector<double> values;
    /// Column k is the unit eigenvector of values[k].
    Matrix vectors;
    std::size_t sweeps = 0;
};

/// Sweeps over all (p, q) pairs until ||off(A)||_F <= tol * ||A||_F.
inline SymmetricEigen jacobi_eigen(const Matrix& a_in, double tol = 1e-12, std::size_t max_sweeps = 100) {
    detail::require(a_in.square(), "jacobi_eigen: matrix must be square");
    detail::require(a_in.is_symmetric(), "jacobi_eigen: matrix must be symmetric");
    const std::size_t n = a_in.rows();

    Matrix a = a_in;
    Matrix v = Matrix::identity(n);
    const double target = tol * frobenius_norm(a);

    std::size_t sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (std::sqrt(off_diagonal_sq(a)) <= target) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Symmetric Schur: choose t = tan(theta) annihilating a(p, q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const GivensRotation g{p, q, c, -t * c};
                g.apply_similarity(a);
                a(p, q) = a(q, p) = 0.0;
                g.apply_right(v);
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.sweeps = sweep;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

} // namespace sztbss
