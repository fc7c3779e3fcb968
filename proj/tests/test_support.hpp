#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "trinmf/matrix.hpp"

// Shared generators and independent oracles for the test suites. Everything
// here stays deliberately naive (plain loops, no shared code with the library
// paths under test).

namespace testsup {

inline std::vector<double> random_vector(std::size_t n, double lo, double hi,
                                         std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(gen);
    return v;
}

/// Nonnegative rank-1 target u (x) v with entries bounded away from zero.
inline trinmf::Matrix rank1_target(std::size_t m, std::size_t n, std::uint64_t seed) {
    const auto u = random_vector(m, 0.2, 1.0, seed);
    const auto v = random_vector(n, 0.2, 1.0, seed + 1);
    trinmf::Matrix y(m, n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) y(i, j) = u[i] * v[j];
    return y;
}

inline trinmf::Matrix rank2_target(std::size_t m, std::size_t n, std::uint64_t seed) {
    const auto u1 = random_vector(m, 0.2, 1.0, seed);
    const auto v1 = random_vector(n, 0.2, 1.0, seed + 1);
    const auto u2 = random_vector(m, 0.2, 1.0, seed + 2);
    const auto v2 = random_vector(n, 0.2, 1.0, seed + 3);
    trinmf::Matrix y(m, n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) y(i, j) = u1[i] * v1[j] + u2[i] * v2[j];
    return y;
}

/// Synthetic grayscale test image in [0,1]: rectangles of several scales on a
/// smooth gradient plus two gaussian bumps. Deterministic.
inline trinmf::Matrix synthetic_image(std::size_t rows, std::size_t cols) {
    trinmf::Matrix y(rows, cols, 0.0);
    const double fr = static_cast<double>(rows), fc = static_cast<double>(cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double x = static_cast<double>(j) / fc, t = static_cast<double>(i) / fr;
            double v = 0.15 + 0.2 * x + 0.1 * t;
            if (t > 0.1 && t < 0.45 && x > 0.1 && x < 0.4) v += 0.35;
            if (t > 0.55 && t < 0.9 && x > 0.5 && x < 0.95) v += 0.25;
            if (t > 0.2 && t < 0.3 && x > 0.6 && x < 0.8) v += 0.3;
            v += 0.25 * std::exp(-((t - 0.7) * (t - 0.7) + (x - 0.25) * (x - 0.25)) / 0.01);
            v += 0.2 * std::exp(-((t - 0.3) * (t - 0.3) + (x - 0.75) * (x - 0.75)) / 0.005);
            y(i, j) = std::min(1.0, std::max(0.0, v));
        }
    return y;
}

/// Two well separated gaussian blobs, the stand-in for a sampling-method
/// index image.
inline trinmf::Matrix blob_image(std::size_t n, double amp1, double amp2) {
    trinmf::Matrix y(n, n, 0.0);
    const double c1 = static_cast<double>(n) * 0.25, c2 = static_cast<double>(n) * 0.75;
    const double w = static_cast<double>(n) * 0.085;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double fi = static_cast<double>(i), fj = static_cast<double>(j);
            const double d1 = (fi - c1) * (fi - c1) + (fj - c1) * (fj - c1);
            const double d2 = (fi - c2) * (fi - c2) + (fj - c2) * (fj - c2);
            y(i, j) = amp1 * std::exp(-d1 / (2 * w * w)) + amp2 * std::exp(-d2 / (2 * w * w));
        }
    return y;
}

/// Entrywise-loop Frobenius-squared oracle.
inline double frob2_oracle(const trinmf::Matrix& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j) * x(i, j);
    return s;
}

inline double l1_oracle(const trinmf::Matrix& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) s += std::abs(x(i, j));
    return s;
}

/// Four-nested-loop block-mean oracle with edge replication.
inline trinmf::Matrix restrict_oracle(const trinmf::Matrix& y, std::size_t block) {
    const std::size_t out_r = (y.rows() + block - 1) / block;
    const std::size_t out_c = (y.cols() + block - 1) / block;
    trinmf::Matrix out(out_r, out_c, 0.0);
    for (std::size_t bi = 0; bi < out_r; ++bi)
        for (std::size_t bj = 0; bj < out_c; ++bj) {
            double acc = 0.0;
            for (std::size_t di = 0; di < block; ++di)
                for (std::size_t dj = 0; dj < block; ++dj)
                    acc += y(std::min(bi * block + di, y.rows() - 1),
                             std::min(bj * block + dj, y.cols() - 1));
            out(bi, bj) = acc / static_cast<double>(block * block);
        }
    return out;
}

/// Naive O(n^4) orthonormal 2D DCT-II oracle for an 8x8 block.
inline trinmf::Matrix dct8_oracle(const trinmf::Matrix& block) {
    const double pi = std::acos(-1.0);
    trinmf::Matrix out(8, 8, 0.0);
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : 0.5;
            const double cv = v == 0 ? std::sqrt(1.0 / 8.0) : 0.5;
            double acc = 0.0;
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y)
                    acc += block(x, y) * std::cos(pi * (2 * x + 1) * u / 16.0) *
                           std::cos(pi * (2 * y + 1) * v / 16.0);
            out(u, v) = cu * cv * acc;
        }
    return out;
}

/// Singular values by power iteration on A^T A with deflation.
inline std::vector<double> singular_values_oracle(trinmf::Matrix a, std::uint64_t seed) {
    const std::size_t k = std::min(a.rows(), a.cols());
    std::vector<double> svals;
    for (std::size_t r = 0; r < k; ++r) {
        std::vector<double> v = random_vector(a.cols(), -1.0, 1.0, seed + r);
        double sigma = 0.0;
        for (int it = 0; it < 3000; ++it) {
            // w = A^T (A v)
            std::vector<double> av(a.rows(), 0.0);
            for (std::size_t i = 0; i < a.rows(); ++i)
                for (std::size_t j = 0; j < a.cols(); ++j) av[i] += a(i, j) * v[j];
            std::vector<double> w(a.cols(), 0.0);
            for (std::size_t i = 0; i < a.rows(); ++i)
                for (std::size_t j = 0; j < a.cols(); ++j) w[j] += a(i, j) * av[i];
            double nrm = 0.0;
            for (double x : w) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) break;
            for (auto& x : w) x /= nrm;
            v = w;
        }
        std::vector<double> av(a.rows(), 0.0);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) av[i] += a(i, j) * v[j];
        double av_norm = 0.0;
        for (double x : av) av_norm += x * x;
        sigma = std::sqrt(av_norm);
        svals.push_back(sigma);
        if (sigma > 0.0) {
            // deflate: A <- A - sigma u v^T with u = A v / sigma
            for (std::size_t i = 0; i < a.rows(); ++i)
                for (std::size_t j = 0; j < a.cols(); ++j)
                    a(i, j) -= av[i] * v[j];
        }
    }
    return svals;
}

inline double rel_frob_error(const trinmf::Matrix& approx, const trinmf::Matrix& exact) {
    return trinmf::frob_norm(approx - exact) / trinmf::frob_norm(exact);
}

} // namespace testsup
