#pragma once

// Small dense linear algebra used throughout: a row-major matrix, partially
// pivoted LU, cyclic Jacobi for symmetric eigenproblems, and Hermitian
// eigenproblems reduced to real symmetric ones.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "affine_pr/errors.hpp"

namespace affine_pr {

using cdouble = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<cdouble>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <class T>
T conj_if(const T& v) {
    if constexpr (is_complex_v<T>) {
        return std::conj(v);
    } else {
        return v;
    }
}

/// Dense row-major matrix.
template <class T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<T> col(std::size_t j) const {
        std::vector<T> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    const std::vector<T>& data() const noexcept { return data_; }
    std::vector<T>& data() noexcept { return data_; }

    /// Conjugate transpose (plain transpose for real T).
    Matrix adjoint() const {
        Matrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = conj_if((*this)(i, j));
        return out;
    }

    Matrix transpose() const {
        Matrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    Matrix& operator+=(const Matrix& o) {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionError("matrix sum shape mismatch");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionError("matrix difference shape mismatch");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(T s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, T s) { return a *= s; }
    friend Matrix operator*(T s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DimensionError("matrix product shape mismatch");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend std::vector<T> operator*(const Matrix& a, std::span<const T> x) {
        if (a.cols_ != x.size()) throw DimensionError("matrix-vector shape mismatch");
        std::vector<T> out(a.rows_, T{});
        for (std::size_t i = 0; i < a.rows_; ++i) {
            T acc{};
            for (std::size_t j = 0; j < a.cols_; ++j) acc += a(i, j) * x[j];
            out[i] = acc;
        }
        return out;
    }
    friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& x) {
        return a * std::span<const T>(x);
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RMatrix = Matrix<double>;
using CMatrix = Matrix<cdouble>;

template <class T>
double frobenius_norm(const Matrix<T>& a) {
    double s = 0.0;
    for (const auto& v : a.data()) s += std::norm(v);
    return std::sqrt(s);
}

template <class T>
double max_abs(const Matrix<T>& a) {
    double s = 0.0;
    for (const auto& v : a.data()) s = std::max(s, static_cast<double>(std::abs(v)));
    return s;
}

template <class T>
double norm2(std::span<const T> v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}
template <class T>
double norm2(const std::vector<T>& v) {
    return norm2(std::span<const T>(v));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot product length mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// Hermitian inner product a* b.
inline cdouble cdot(std::span<const cdouble> a, std::span<const cdouble> b) {
    if (a.size() != b.size()) throw DimensionError("dot product length mismatch");
    cdouble acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

/// Partially pivoted LU factorization PA = LU of a square matrix.
template <class T>
class LuDecomposition {
public:
    /// Pivots below `rel_tol * max|A|` mark the matrix singular.
    explicit LuDecomposition(Matrix<T> a, double rel_tol = 1e-10) : lu_(std::move(a)) {
        if (lu_.rows() != lu_.cols()) throw DimensionError("LU needs a square matrix");
        const std::size_t n = lu_.rows();
        perm_.resize(n);
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        const double thresh = rel_tol * max_abs(lu_);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                if (std::abs(lu_(i, k)) > best) {
                    best = std::abs(lu_(i, k));
                    p = i;
                }
            }
            if (best <= thresh || best == 0.0) {
                singular_ = true;
                continue;
            }
            ++pivots_;
            if (p != k) {
                std::swap(perm_[k], perm_[p]);
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                const T f = lu_(i, k) / lu_(k, k);
                lu_(i, k) = f;
                if (f == T{}) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    bool singular() const noexcept { return singular_; }
    /// Number of accepted pivots; a lower bound on the numerical rank.
    std::size_t pivot_count() const noexcept { return pivots_; }

    std::vector<T> solve(std::span<const T> b) const {
        const std::size_t n = lu_.rows();
        if (b.size() != n) throw DimensionError("LU solve right-hand side length mismatch");
        if (singular_) throw SingularSystemError(pivots_, n);
        std::vector<T> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            T acc = b[perm_[i]];
            for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * y[j];
            y[i] = acc;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            T acc = y[ii];
            for (std::size_t j = ii + 1; j < n; ++j) acc -= lu_(ii, j) * y[j];
            y[ii] = acc / lu_(ii, ii);
        }
        return y;
    }
    std::vector<T> solve(const std::vector<T>& b) const { return solve(std::span<const T>(b)); }

private:
    Matrix<T> lu_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
    std::size_t pivots_ = 0;
};

template <class T>
std::vector<T> lu_solve(const Matrix<T>& a, const std::vector<T>& b, double rel_tol = 1e-10) {
    return LuDecomposition<T>(a, rel_tol).solve(b);
}

/// Eigen-decomposition of a real symmetric matrix; values ascending, vectors as columns.
struct SymmetricEigen {
    RVec values;
    RMatrix vectors;
    int sweeps = 0;

    RVec vector(std::size_t k) const { return vectors.col(k); }
};

/// Cyclic Jacobi rotations. Converged once the off-diagonal Frobenius mass is at most
/// `rel_tol * ||A||_F`; throws EigenConvergenceError after `max_sweeps`.
inline SymmetricEigen jacobi_eigen(const RMatrix& input, double rel_tol = 1e-13, int max_sweeps = 100) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw DimensionError("eigen-decomposition needs a square matrix");
    RMatrix a = input;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = s;
            a(j, i) = s;
        }
    RMatrix v = RMatrix::identity(n);
    const double target = rel_tol * frobenius_norm(a);

    auto off_mass = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_mass() > target) {
        if (sweep >= max_sweeps)
            throw EigenConvergenceError("Jacobi eigen-solver did not converge in " +
                                        std::to_string(max_sweeps) + " sweeps");
        ++sweep;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymmetricEigen out;
    out.sweeps = sweep;
    out.values.resize(n);
    out.vectors = RMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

/// Real symmetric 2n x 2n matrix [[X, -Y], [Y, X]] representing H = X + iY.
inline RMatrix realify_hermitian(const CMatrix& h) {
    const std::size_t n = h.rows();
    RMatrix r(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            r(i, j) = h(i, j).real();
            r(i + n, j + n) = h(i, j).real();
            r(i, j + n) = -h(i, j).imag();
            r(i + n, j) = h(i, j).imag();
        }
    return r;
}

struct HermitianEigen {
    RVec values;                 // ascending
    std::vector<CVec> vectors;   // unit eigenvectors matching values
};

/// Eigen-decomposition of a Hermitian matrix through its real symmetric realification,
/// whose spectrum is that of H with every eigenvalue doubled.
inline HermitianEigen hermitian_eigen(const CMatrix& h) {
    const std::size_t n = h.rows();
    if (h.cols() != n) throw DimensionError("eigen-decomposition needs a square matrix");
    const SymmetricEigen re = jacobi_eigen(realify_hermitian(h));
    HermitianEigen out;
    for (std::size_t k = 0; k < 2 * n && out.values.size() < n; ++k) {
        CVec z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = {re.vectors(i, k), re.vectors(i + n, k)};
        // The partner (-b, a) of each realified eigenvector is i times the same complex
        // vector, so keep only candidates independent of those already accepted.
        for (const auto& prev : out.vectors) {
            const cdouble proj = cdot(prev, z);
            for (std::size_t i = 0; i < n; ++i) z[i] -= proj * prev[i];
        }
        const double nz = norm2(z);
        if (nz < 0.5) continue;
        for (auto& zi : z) zi /= nz;
        out.values.push_back(re.values[k]);
        out.vectors.push_back(std::move(z));
    }
    return out;
}

/// Singular values (descending) via the eigenvalues of A^T A.
inline RVec singular_values(const RMatrix& a) {
    const RMatrix g = a.transpose() * a;
    RVec ev = jacobi_eigen(g).values;
    for (auto& e : ev) e = std::sqrt(std::max(e, 0.0));
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

/// Number of singular values above `rel_tol * max(1e-300, sigma_max)`.
inline std::size_t numerical_rank(const RMatrix& a, double rel_tol = 1e-10) {
    if (a.empty()) return 0;
    const RVec s = singular_values(a);
    if (s.empty() || s.front() == 0.0) return 0;
    const double cut = rel_tol * s.front();
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double v) { return v > cut; }));
}

struct LeastSquaresResult {
    RVec x;
    double residual = 0.0;  // ||A x - b||
    std::size_t rank = 0;
};

/// Minimum-norm least-squares solution through the pseudo-inverse of A^T A.
inline LeastSquaresResult min_norm_least_squares(const RMatrix& a, const RVec& b, double rel_tol = 1e-12) {
    if (a.rows() != b.size()) throw DimensionError("least squares right-hand side length mismatch");
    const std::size_t n = a.cols();
    const RMatrix at = a.transpose();
    const SymmetricEigen eg = jacobi_eigen(at * a);
    const RVec atb = at * b;
    const double top = eg.values.empty() ? 0.0 : std::max(0.0, eg.values.back());
    LeastSquaresResult out;
    out.x.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = eg.values[k];
        if (lam <= rel_tol * top || lam <= 0.0) continue;
        ++out.rank;
        const RVec e = eg.vector(k);
        const double coef = dot(e, atb) / lam;
        for (std::size_t i = 0; i < n; ++i) out.x[i] += coef * e[i];
    }
    RVec r = a * out.x;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    out.residual = norm2(r);
    return out;
}

}  // namespace affine_pr
