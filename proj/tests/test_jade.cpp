#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "sztbss/jade.hpp"
#include "sztbss/signal.hpp"
#include "test_util.hpp"

using namespace sztbss;

namespace {

Matrix random_orthogonal(std::size_t k, std::uint64_t seed) {
    // Gram-Schmidt on a random matrix.
    Xoshiro256 rng(Seed{seed});
    Matrix q(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> v(k);
        for (auto& x : v) x = rng.normal();
        for (std::size_t p = 0; p < j; ++p) {
            double d = 0;
            for (std::size_t i = 0; i < k; ++i) d += v[i] * q(i, p);
            for (std::size_t i = 0; i < k; ++i) v[i] -= d * q(i, p);
        }
        double nrm = 0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < k; ++i) q(i, j) = v[i] / nrm;
    }
    return q;
}

double orthogonality_error(const Matrix& v) {
    return frobenius_norm(v.transposed() * v - Matrix::identity(v.rows()));
}

/// |V^T R| must be a permutation matrix: each column of V matches a column of R up to sign.
void expect_equal_up_to_sign_permutation(const Matrix& v, const Matrix& r, double tol) {
    const Matrix p = v.transposed() * r;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double mx = 0.0, rest = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) mx = std::max(mx, std::abs(p(i, j)));
        for (std::size_t j = 0; j < p.cols(); ++j)
            if (std::abs(p(i, j)) != mx) rest += p(i, j) * p(i, j);
        EXPECT_NEAR(mx, 1.0, tol) << "row " << i;
        EXPECT_LT(std::sqrt(rest), tol) << "row " << i;
    }
}

DataMatrix uniform_sources(std::size_t k, std::size_t t, std::uint64_t seed) {
    Xoshiro256 rng(Seed{seed});
    DataMatrix s(k, t);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t n = 0; n < t; ++n) s(i, n) = rng.uniform_open(-1.0, 1.0);
    return s;
}

DataMatrix gaussian_data(std::size_t k, std::size_t t, std::uint64_t seed) {
    Xoshiro256 rng(Seed{seed});
    DataMatrix s(k, t);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t n = 0; n < t; ++n) s(i, n) = rng.normal();
    return s;
}

std::vector<double> row_vec(const DataMatrix& m, std::size_t i) {
    const auto r = m.row(i);
    return {r.begin(), r.end()};
}

/// Best-permutation |C| between rows of y and rows of s.
std::vector<double> matched(const DataMatrix& y, const DataMatrix& s) {
    std::vector<Signal> ys, ss;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        ys.emplace_back(row_vec(y, i));
        ss.emplace_back(row_vec(s, i));
    }
    return match_and_score(MultiSignal(ys), MultiSignal(ss), 0).matched_abs_corr;
}

} // namespace

TEST(JacobiEigen, TwoByTwoAnalytic) {
    const SymmetricEigen e = jacobi_eigen(Matrix{{2.0, 1.0}, {1.0, 2.0}});
    EXPECT_NEAR(e.values[0], 3.0, 1e-14);
    EXPECT_NEAR(e.values[1], 1.0, 1e-14);
    EXPECT_NEAR(std::abs(e.vectors(0, 0)), std::sqrt(0.5), 1e-14);
    EXPECT_NEAR(e.vectors(0, 0) * e.vectors(1, 0), 0.5, 1e-14);
}

TEST(JacobiEigen, ReconstructsRandomSymmetric) {
    for (std::size_t k : {2u, 3u, 5u, 8u}) {
        const Matrix r = random_orthogonal(k, k);
        Matrix d(k, k);
        for (std::size_t i = 0; i < k; ++i) d(i, i) = static_cast<double>(i) - 2.5;
        Matrix a = r * d * r.transposed();
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) a(j, i) = a(i, j);
        const SymmetricEigen e = jacobi_eigen(a);
        EXPECT_LT(orthogonality_error(e.vectors), 1e-12);
        Matrix lam(k, k);
        for (std::size_t i = 0; i < k; ++i) lam(i, i) = e.values[i];
        EXPECT_LT(frobenius_norm(e.vectors * lam * e.vectors.transposed() - a), 1e-11);
        EXPECT_TRUE(std::is_sorted(e.values.rbegin(), e.values.rend()));
    }
}

TEST(JacobiEigen, RejectsNonSymmetric) {
    EXPECT_THROW(jacobi_eigen(Matrix{{1.0, 2.0}, {0.0, 1.0}}), Error);
    EXPECT_THROW(jacobi_eigen(Matrix(2, 3)), Error);
}

TEST(CenterWhiten, AlreadyWhiteData) {
    // Exactly white by construction: rows of an orthogonal design scaled to unit variance.
    const std::size_t t = 4;
    DataMatrix x{{1, -1, 1, -1}, {1, 1, -1, -1}};
    (void)t;
    const WhiteningResult w = center_whiten(x);
    EXPECT_LT(orthogonality_error(w.whitener), 1e-12);
    EXPECT_LT(frobenius_norm(sample_covariance(w.whitened) - Matrix::identity(2)), 1e-8);
}

TEST(CenterWhiten, KnownCovarianceAxes) {
    // z: exactly white sample (centered, orthonormalized rows, scaled to unit 1/T variance).
    const std::size_t t = 5000;
    DataMatrix z = gaussian_data(2, t, 3);
    for (std::size_t i = 0; i < 2; ++i) {
        double m = 0;
        for (double v : z.row(i)) m += v;
        m /= t;
        for (auto& v : z.row(i)) v -= m;
    }
    auto dot = [&](std::size_t a, std::size_t b) {
        double s = 0;
        for (std::size_t n = 0; n < t; ++n) s += z(a, n) * z(b, n);
        return s / t;
    };
    const double r00 = dot(0, 0);
    for (auto& v : z.row(0)) v /= std::sqrt(r00);
    const double r01 = dot(0, 1);
    for (std::size_t n = 0; n < t; ++n) z(1, n) -= r01 * z(0, n);
    const double r11 = dot(1, 1);
    for (auto& v : z.row(1)) v /= std::sqrt(r11);

    // X = diag(2, 1) z has covariance diag(4, 1).
    DataMatrix x = z;
    for (auto& v : x.row(0)) v *= 2.0;
    for (auto& v : x.row(0)) v += 3.0; // and a mean
    const WhiteningResult w = center_whiten(x);
    EXPECT_NEAR(w.mean[0], 3.0, 1e-12);
    EXPECT_LT(frobenius_norm(sample_covariance(w.whitened) - Matrix::identity(2)), 1e-8);
    // Largest eigenvalue first: W = diag(1/2, 1) up to row signs.
    EXPECT_NEAR(std::abs(w.whitener(0, 0)), 0.5, 1e-10);
    EXPECT_NEAR(std::abs(w.whitener(1, 1)), 1.0, 1e-10);
    EXPECT_NEAR(w.whitener(0, 1), 0.0, 1e-10);
    EXPECT_NEAR(w.whitener(1, 0), 0.0, 1e-10);
}

TEST(CenterWhiten, CovarianceIsIdentityForRandomMixtures) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t k = 2 + seed % 4;
        const Matrix a = random_orthogonal(k, seed) * Matrix::identity(k) + 0.3 * random_orthogonal(k, seed + 100);
        const DataMatrix x = a * uniform_sources(k, 3000, seed);
        const WhiteningResult w = center_whiten(x);
        EXPECT_LT(frobenius_norm(sample_covariance(w.whitened) - Matrix::identity(k)), 1e-8);
    }
}

TEST(CenterWhiten, DegenerateMixtureRejected) {
    DataMatrix x = uniform_sources(2, 1000, 1);
    for (std::size_t n = 0; n < 1000; ++n) x(1, n) = x(0, n);
    EXPECT_THROW(center_whiten(x), Error);
    EXPECT_THROW(center_whiten(DataMatrix(3, 3)), Error);
}

namespace {

// Direct quadruple-loop fourth cumulant of whitened zero-mean data.
double cumulant_oracle(const DataMatrix& x, std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    const auto t = static_cast<double>(x.cols());
    double m4 = 0, rij = 0, rkl = 0, rik = 0, rjl = 0, ril = 0, rjk = 0;
    for (std::size_t n = 0; n < x.cols(); ++n) {
        m4 += x(i, n) * x(j, n) * x(k, n) * x(l, n);
        rij += x(i, n) * x(j, n);
        rkl += x(k, n) * x(l, n);
        rik += x(i, n) * x(k, n);
        rjl += x(j, n) * x(l, n);
        ril += x(i, n) * x(l, n);
        rjk += x(j, n) * x(k, n);
    }
    return m4 / t - (rij * rkl + rik * rjl + ril * rjk) / (t * t);
}

} // namespace

TEST(CumulantMatrices, MatchQuadrupleLoopOracle) {
    const DataMatrix x = center_whiten(uniform_sources(3, 2000, 5)).whitened;
    const auto qs = cumulant_matrices(x);
    ASSERT_EQ(qs.size(), 9u);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t l = 0; l < 3; ++l)
                    EXPECT_NEAR(qs[i * 3 + j](k, l), cumulant_oracle(x, i, j, k, l), 1e-9);
}

TEST(CumulantMatrices, GaussianIsNearZero) {
    const DataMatrix x = center_whiten(gaussian_data(2, 100000, 7)).whitened;
    double mx = 0;
    for (const auto& q : cumulant_matrices(x))
        for (double v : q.data()) mx = std::max(mx, std::abs(v));
    EXPECT_LT(mx, 0.05);
}

TEST(CumulantMatrices, UniformKurtosis) {
    const DataMatrix x = center_whiten(uniform_sources(1, 100000, 8)).whitened;
    const auto qs = cumulant_matrices(x);
    ASSERT_EQ(qs.size(), 1u);
    EXPECT_NEAR(qs[0](0, 0), -1.2, 0.06);
}

TEST(CumulantMatrices, CountAndExactSymmetry) {
    for (std::size_t k : {2u, 3u, 4u}) {
        const auto qs = cumulant_matrices(center_whiten(uniform_sources(k, 500, k)).whitened);
        EXPECT_EQ(qs.size(), k * k);
        for (const auto& q : qs) EXPECT_TRUE(q.is_symmetric());
    }
}

TEST(JointDiagonalize, DiagonalSetGivesIdentity) {
    const std::vector<Matrix> ms{Matrix{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}, Matrix{{-1, 0, 0}, {0, 5, 0}, {0, 0, 0.5}}};
    const JointDiagResult r = joint_diagonalize(ms);
    EXPECT_EQ(r.rotation, Matrix::identity(3));
    EXPECT_EQ(r.rotations, 0u);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.criterion, 0.0);
}

TEST(JointDiagonalize, SingleMatrixMatchesEigenvectors) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t k = 2 + seed % 5;
        const Matrix r = random_orthogonal(k, seed + 50);
        Matrix d(k, k);
        for (std::size_t i = 0; i < k; ++i) d(i, i) = 1.0 + 1.7 * static_cast<double>(i);
        Matrix a = r * d * r.transposed();
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) a(j, i) = a(i, j);
        const JointDiagResult jd = joint_diagonalize({a}, {.threshold = 1e-12});
        expect_equal_up_to_sign_permutation(jd.rotation, jacobi_eigen(a).vectors, 1e-8);
    }
}

TEST(JointDiagonalize, RecoversExactJointDiagonalizer) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t k = 2 + seed % 4;
        const Matrix r = random_orthogonal(k, seed);
        Xoshiro256 rng(Seed{seed + 1000});
        std::vector<Matrix> ms;
        for (std::size_t m = 0; m < k * k; ++m) {
            Matrix d(k, k);
            for (std::size_t i = 0; i < k; ++i) d(i, i) = rng.uniform_open(-3.0, 3.0);
            Matrix a = r * d * r.transposed();
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i + 1; j < k; ++j) a(j, i) = a(i, j);
            ms.push_back(a);
        }
        const JointDiagResult jd = joint_diagonalize(ms, {.threshold = 1e-12});
        EXPECT_LT(orthogonality_error(jd.rotation), 1e-10);
        EXPECT_LT(jd.criterion, 1e-18) << "seed " << seed;
        expect_equal_up_to_sign_permutation(jd.rotation, r, 1e-8);
    }
}

TEST(JointDiagonalize, CriterionNeverIncreases) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t k = 2 + seed % 3;
        const auto qs = cumulant_matrices(center_whiten(random_orthogonal(k, seed) * uniform_sources(k, 2000, seed)).whitened);
        std::size_t calls = 0;
        JointDiagOptions opt;
        opt.rotation_observer = [&](double before, double after) {
            ++calls;
            EXPECT_LE(after, before * (1 + 1e-12) + 1e-15);
        };
        const JointDiagResult jd = joint_diagonalize(qs, opt);
        EXPECT_EQ(calls, jd.rotations);
        EXPECT_LT(orthogonality_error(jd.rotation), 1e-10);
    }
}

TEST(JointDiagonalize, Errors) {
    EXPECT_THROW(joint_diagonalize({Matrix{{1.0}}}), Error);
    EXPECT_THROW(joint_diagonalize({Matrix{{1.0, 2.0}, {0.0, 1.0}}}), Error);
    EXPECT_THROW(joint_diagonalize({Matrix::identity(2), Matrix::identity(3)}), Error);
    EXPECT_THROW(joint_diagonalize({}), Error);
}

TEST(JointDiagonalize, ReportsNonConvergenceButReturns) {
    const auto qs = cumulant_matrices(center_whiten(random_orthogonal(4, 1) * uniform_sources(4, 2000, 2)).whitened);
    const JointDiagResult jd = joint_diagonalize(qs, {.threshold = 0.0, .max_sweeps = 1});
    EXPECT_FALSE(jd.converged);
    EXPECT_EQ(jd.sweeps, 1u);
    EXPECT_LT(orthogonality_error(jd.rotation), 1e-10);
}

TEST(JadeSeparate, PermutedScaledSources) {
    const DataMatrix s = uniform_sources(2, 100000, 11);
    const Matrix pd{{0.0, -3.0}, {0.5, 0.0}};
    const JadeModel m = jade_separate(pd * s);
    for (double c : matched(m.separated, s)) EXPECT_GE(c, 0.999);
}

TEST(JadeSeparate, SymmetricMixtureAgainstInverseOracle) {
    const DataMatrix s = uniform_sources(2, 100000, 12);
    const Matrix a{{1.0, 0.5}, {0.5, 1.0}};
    const DataMatrix x = a * s;
    const JadeModel m = jade_separate(x);
    // Oracle: the true inverse (1/0.75) [[1, -0.5], [-0.5, 1]] recovers s exactly.
    const Matrix ainv = (1.0 / 0.75) * Matrix{{1.0, -0.5}, {-0.5, 1.0}};
    const DataMatrix oracle = ainv * x;
    for (double c : matched(oracle, s)) EXPECT_NEAR(c, 1.0, 1e-12);
    for (double c : matched(m.separated, oracle)) EXPECT_GE(c, 0.99);
    EXPECT_TRUE(m.identifiable());
}

TEST(JadeSeparate, ModelInvariants) {
    const DataMatrix s = uniform_sources(3, 20000, 13);
    const JadeModel m = jade_separate(random_orthogonal(3, 4) * s + 0.5 * s);
    EXPECT_LT(orthogonality_error(m.rotation), 1e-10);
    const Matrix cy = sample_covariance(m.separated);
    EXPECT_LT(std::sqrt(off_diagonal_sq(cy)), 1e-6);
    // separated = B (X - mean)
    EXPECT_EQ(m.unmixing.rows(), 3u);
    EXPECT_TRUE(m.converged);
}

TEST(JadeSeparate, GaussianSourcesFlaggedUnidentifiable) {
    const JadeModel m = jade_separate(gaussian_data(2, 100000, 14));
    EXPECT_FALSE(m.identifiable());
    EXPECT_GE(m.relative_criterion, 1e-3);
}

TEST(JadeSeparate, EquivariantToPositiveChannelScaling) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DataMatrix s = uniform_sources(2, 20000, 20 + seed);
        const Matrix a{{1.0, 0.6}, {0.3, 1.0}};
        const DataMatrix x = a * s;
        const Matrix d{{7.0, 0.0}, {0.0, 0.02}};
        const auto base = matched(jade_separate(x).separated, s);
        const auto scaled = matched(jade_separate(d * x).separated, s);
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(base[i], scaled[i], 1e-6);
    }
}

TEST(JadeSeparate, Errors) {
    EXPECT_THROW(jade_separate(uniform_sources(1, 100, 1)), Error);
    DataMatrix dup = uniform_sources(2, 100, 1);
    for (std::size_t n = 0; n < 100; ++n) dup(1, n) = 2.0 * dup(0, n);
    EXPECT_THROW(jade_separate(dup), Error);
}
