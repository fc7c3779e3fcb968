#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trinmf {

// Dense row-major matrix of doubles. Entries are validated to be finite at
// construction; everything downstream assumes finiteness. Matrices are used
// as values: operations return fresh matrices and never alias their inputs.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
        if (!std::isfinite(fill))
            throw std::invalid_argument("Matrix: non-finite fill value");
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
        if (data_.size() != rows * cols)
            throw std::invalid_argument("Matrix: entry count does not match dimensions");
        for (double v : data_)
            if (!std::isfinite(v))
                throw std::invalid_argument("Matrix: non-finite entry");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows_list) {
        rows_ = rows_list.size();
        cols_ = rows_ == 0 ? 0 : rows_list.begin()->size();
        if (rows_ == 0 || cols_ == 0)
            throw std::invalid_argument("Matrix: empty initializer");
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows_list) {
            if (r.size() != cols_)
                throw std::invalid_argument("Matrix: ragged initializer");
            for (double v : r) {
                if (!std::isfinite(v))
                    throw std::invalid_argument("Matrix: non-finite entry");
                data_.push_back(v);
            }
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch");
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "operator+");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
    return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "operator-");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
    return c;
}

inline Matrix operator*(const Matrix& a, double s) {
    Matrix c = a;
    for (double& v : c.data()) v *= s;
    return c;
}

inline Matrix operator*(double s, const Matrix& a) { return a * s; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("operator*: inner dimensions differ");
    Matrix c(a.rows(), b.cols(), 0.0);
    // i-k-j loop order: streams over rows of b for cache locality
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = a(i, j);
    return t;
}

/// Squared Frobenius norm: sum of squared entries.
inline double frob2_sq(const Matrix& x) {
    double s = 0.0;
    for (double v : x.data()) s += v * v;
    return s;
}

inline double frob_norm(const Matrix& x) { return std::sqrt(frob2_sq(x)); }

/// Entrywise l1 norm: sum of absolute values.
inline double l1_norm(const Matrix& x) {
    double s = 0.0;
    for (double v : x.data()) s += std::abs(v);
    return s;
}

/// Outer product u (x) v: result(i,j) = u[i]*v[j].
inline Matrix tensor(std::span<const double> u, std::span<const double> v) {
    if (u.empty() || v.empty())
        throw std::invalid_argument("tensor: empty vector");
    Matrix m(u.size(), v.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            m(i, j) = u[i] * v[j];
    return m;
}

inline double min_entry(const Matrix& x) {
    return *std::min_element(x.data().begin(), x.data().end());
}

inline double max_entry(const Matrix& x) {
    return *std::max_element(x.data().begin(), x.data().end());
}

inline double max_abs(const Matrix& x) {
    double m = 0.0;
    for (double v : x.data()) m = std::max(m, std::abs(v));
    return m;
}

inline bool is_nonneg(const Matrix& x) {
    return min_entry(x) >= 0.0;
}

inline void require_nonneg(const Matrix& x, const char* where) {
    if (!is_nonneg(x))
        throw std::invalid_argument(std::string(where) + ": negative entry");
}

/// Column j as a vector.
inline std::vector<double> column(const Matrix& a, std::size_t j) {
    std::vector<double> c(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) c[i] = a(i, j);
    return c;
}

/// Row i as a vector.
inline std::vector<double> row(const Matrix& a, std::size_t i) {
    std::vector<double> r(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] = a(i, j);
    return r;
}

inline double mean_entry(const Matrix& x) {
    double s = std::accumulate(x.data().begin(), x.data().end(), 0.0);
    return s / static_cast<double>(x.size());
}

/// Matrix with i.i.d. entries uniform on (lo, hi], drawn from a seeded
/// generator. Same seed, same matrix.
inline Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi,
                             std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols, 0.0);
    for (double& v : m.data()) v = dist(gen);
    return m;
}

/// Dense symmetric k x k linear solve via Cholesky with partial-pivot
/// Gaussian fallback. Small systems only (active-set row/column solves).
inline std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw std::invalid_argument("solve_dense: square system required");
    // Gaussian elimination with partial pivoting
    std::vector<std::size_t> piv(n);
    std::iota(piv.begin(), piv.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = k;
        double mag = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > mag) { mag = std::abs(a(i, k)); best = i; }
        if (mag == 0.0)
            throw std::runtime_error("solve_dense: singular system");
        if (best != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(best, j));
            std::swap(b[k], b[best]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

} // namespace trinmf
