#pragma once

#include <cstddef>

#include "sztbss/matrix.hpp"

namespace sztbss {

/// Plane rotation G = [[c, -s], [s, c]] acting on coordinates (p, q).
struct GivensRotation {
    std::size_t p = 0;
    std::size_t q = 1;
    double c = 1.0;
    double s = 0.0;

    /// M <- M * G (columns p and q).
    void apply_right(Matrix& m) const {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double mp = m(i, p);
            const double mq = m(i, q);
            m(i, p) = c * mp + s * mq;
            m(i, q) = -s * mp + c * mq;
        }
    }

    /// M <- G^T * M (rows p and q).
    void apply_left_transposed(Matrix& m) const {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const double mp = m(p, j);
            const double mq = m(q, j);
            m(p, j) = c * mp + s * mq;
            m(q, j) = -s * mp + c * mq;
        }
    }

    /// M <- G^T * M * G
    void apply_similarity(Matrix& m) const {
        apply_left_transposed(m);
        apply_right(m);
    }
};

} // namespace sztbss
