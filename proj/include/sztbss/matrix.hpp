#pragma once

// Small dense row-major matrix. Channel counts here are 2..8, so nothing
// in this file tries to be clever about cache blocking.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sztbss/error.hpp"

namespace sztbss {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            detail::require(r.size() == cols_, "Matrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const { return data_; }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool is_symmetric() const {
        if (!square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        detail::require(a.cols_ == b.rows_, "Matrix: inner dimension mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) {
        detail::require(a.rows_ == b.rows_ && a.cols_ == b.cols_, "Matrix: shape mismatch");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
        return a;
    }

    friend Matrix operator-(Matrix a, const Matrix& b) {
        detail::require(a.rows_ == b.rows_ && a.cols_ == b.cols_, "Matrix: shape mismatch");
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
        return a;
    }

    friend Matrix operator*(double s, Matrix a) {
        for (auto& v : a.data_) v *= s;
        return a;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

/// Sum of squared off-diagonal entries.
inline double off_diagonal_sq(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j) s += m(i, j) * m(i, j);
    return s;
}

} // namespace sztbss
