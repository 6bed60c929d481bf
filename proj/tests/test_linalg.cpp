#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "affine_pr/linalg.hpp"

using namespace affine_pr;

namespace {

RMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    RMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
    return a;
}

Eigen::MatrixXd to_eigen(const RMatrix& a) {
    Eigen::MatrixXd m(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    return m;
}

}  // namespace

TEST(Matrix, ProductAndAdjoint) {
    CMatrix a(2, 2);
    a(0, 0) = {1, 1};
    a(0, 1) = 2;
    a(1, 0) = {0, -1};
    a(1, 1) = 3;
    const CMatrix h = a.adjoint();
    EXPECT_EQ(h(0, 0), cdouble(1, -1));
    EXPECT_EQ(h(1, 0), cdouble(2, 0));
    EXPECT_EQ(h(0, 1), cdouble(0, 1));
    const CMatrix p = a * CMatrix::identity(2);
    EXPECT_EQ(p, a);
    EXPECT_THROW(a * CMatrix(3, 1), DimensionError);
}

TEST(Lu, MatchesEigenSolve) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (std::size_t n : {1u, 2u, 5u, 9u}) {
        RMatrix a(n, n);
        RVec b(n);
        for (auto& v : a.data()) v = g(rng);
        for (auto& v : b) v = g(rng);
        const RVec x = lu_solve(a, b);
        const Eigen::VectorXd ref = to_eigen(a).partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-10 * (1 + std::abs(ref[i])));
    }
}

TEST(Lu, SingularReportsRank) {
    RMatrix a(3, 3);
    a(0, 0) = 1;
    a(1, 1) = 1;  // third row and column zero
    const LuDecomposition<double> lu(a);
    EXPECT_TRUE(lu.singular());
    EXPECT_EQ(lu.pivot_count(), 2u);
    try {
        lu.solve(RVec{1, 2, 3});
        FAIL();
    } catch (const SingularSystemError& e) {
        EXPECT_EQ(e.rank(), 2u);
        EXPECT_EQ(e.size(), 3u);
    }
}

TEST(Jacobi, MatchesEigenSelfAdjoint) {
    std::mt19937_64 rng(11);
    for (std::size_t n : {1u, 2u, 4u, 8u, 12u}) {
        const RMatrix a = random_symmetric(n, rng);
        const SymmetricEigen eg = jacobi_eigen(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(a));
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(eg.values[k], ref.eigenvalues()[k], 1e-11 * (1 + std::abs(ref.eigenvalues()[k])));
            // A v = lambda v
            const RVec v = eg.vector(k);
            const RVec av = a * v;
            for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(av[i], eg.values[k] * v[i], 1e-10);
            EXPECT_NEAR(norm2(v), 1.0, 1e-12);
        }
    }
}

TEST(Jacobi, DiagonalInputKeepsBasis) {
    RMatrix a(2, 2);
    a(0, 0) = 1;
    const SymmetricEigen eg = jacobi_eigen(a);
    EXPECT_EQ(eg.values[0], 0.0);
    EXPECT_EQ(eg.values[1], 1.0);
    EXPECT_EQ(eg.vector(0), (RVec{0, 1}));
}

TEST(Hermitian, MatchesEigenComplex) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (std::size_t n : {1u, 2u, 3u, 6u}) {
        CMatrix h(n, n);
        Eigen::MatrixXcd ref(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const cdouble v = i == j ? cdouble(g(rng), 0) : cdouble(g(rng), g(rng));
                h(i, j) = v;
                h(j, i) = std::conj(v);
            }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) ref(i, j) = h(i, j);
        const HermitianEigen eg = hermitian_eigen(h);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ref);
        ASSERT_EQ(eg.values.size(), n);
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(eg.values[k], es.eigenvalues()[k], 1e-10);
            const CVec hv = h * eg.vectors[k];
            for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(hv[i] - eg.values[k] * eg.vectors[k][i]), 1e-9);
        }
    }
}

TEST(Hermitian, RepeatedEigenvalueGivesOrthonormalBasis) {
    const CMatrix h = CMatrix::identity(3);
    const HermitianEigen eg = hermitian_eigen(h);
    ASSERT_EQ(eg.vectors.size(), 3u);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            EXPECT_NEAR(std::abs(cdot(eg.vectors[a], eg.vectors[b])), a == b ? 1.0 : 0.0, 1e-12);
}

TEST(LeastSquares, MinimumNormMatchesPseudoInverse) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    RMatrix a(2, 4);
    for (auto& v : a.data()) v = g(rng);
    const RVec b{1.0, -2.0};
    const LeastSquaresResult ls = min_norm_least_squares(a, b);
    const Eigen::MatrixXd ea = to_eigen(a);
    const Eigen::VectorXd ref = ea.completeOrthogonalDecomposition().solve(Eigen::Vector2d(1.0, -2.0));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ls.x[i], ref[i], 1e-9);
    EXPECT_LT(ls.residual, 1e-10);
    EXPECT_EQ(ls.rank, 2u);
}

TEST(LeastSquares, InconsistentSystemHasResidual) {
    RMatrix a(2, 1);
    a(0, 0) = 1;
    a(1, 0) = 1;
    const LeastSquaresResult ls = min_norm_least_squares(a, RVec{0.0, 1.0});
    EXPECT_NEAR(ls.x[0], 0.5, 1e-14);
    EXPECT_NEAR(ls.residual, std::sqrt(0.5), 1e-14);
}

TEST(Rank, NumericalRank) {
    RMatrix a(3, 3);
    a(0, 0) = 1;
    a(1, 1) = 1e-3;
    EXPECT_EQ(numerical_rank(a), 2u);
    EXPECT_EQ(numerical_rank(RMatrix(2, 2)), 0u);
}
