#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "trinmf/matrix.hpp"
#include "trinmf/metrics.hpp"
#include "trinmf/multilevel.hpp"
#include "trinmf/quantize.hpp"

namespace trinmf {

// Thin SVD by one-sided Jacobi: orthogonalize column pairs until all mutual
// dot products vanish, read singular values off the column norms. Accurate
// and simple; the matrices here are small coarse-level images.

struct SvdFactors {
    Matrix U;               // M x k, orthonormal columns
    std::vector<double> S;  // k nonincreasing, >= 0
    Matrix V;               // N x k, orthonormal columns
};

struct SvdError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline SvdFactors jacobi_svd_tall(Matrix a) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix v = Matrix::identity(n);
    constexpr double kTol = 1e-12;
    constexpr int kMaxSweeps = 60;

    // columns this far below the dominant one are numerically null; rotating
    // them only chases roundoff and never meets the relative threshold
    double max_nrm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double nrm2 = 0.0;
        for (std::size_t k = 0; k < m; ++k) nrm2 += a(k, j) * a(k, j);
        max_nrm2 = std::max(max_nrm2, nrm2);
    }
    const double null_cutoff = max_nrm2 * 1e-28;

    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double aii = 0.0, ajj = 0.0, aij = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    aii += a(k, i) * a(k, i);
                    ajj += a(k, j) * a(k, j);
                    aij += a(k, i) * a(k, j);
                }
                if (aii <= null_cutoff || ajj <= null_cutoff) continue;
                if (std::abs(aij) <= kTol * std::sqrt(aii * ajj) || aij == 0.0) continue;
                converged = false;
                const double zeta = (ajj - aii) / (2.0 * aij);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < m; ++k) {
                    const double ai = a(k, i), aj = a(k, j);
                    a(k, i) = c * ai - s * aj;
                    a(k, j) = s * ai + c * aj;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vi = v(k, i), vj = v(k, j);
                    v(k, i) = c * vi - s * vj;
                    v(k, j) = s * vi + c * vj;
                }
            }
    }
    if (!converged) throw SvdError("svd_full: Jacobi sweeps did not converge");

    SvdFactors f;
    f.S.resize(n);
    f.U = Matrix(m, n, 0.0);
    f.V = v;
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j) {
        double nrm = 0.0;
        for (std::size_t k = 0; k < m; ++k) nrm += a(k, j) * a(k, j);
        f.S[j] = std::sqrt(nrm);
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return f.S[x] > f.S[y]; });
    Matrix u_sorted(m, n, 0.0), v_sorted(n, n, 0.0);
    std::vector<double> s_sorted(n);
    const double scale = *std::max_element(f.S.begin(), f.S.end());
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t src = order[jj];
        s_sorted[jj] = f.S[src];
        for (std::size_t k = 0; k < n; ++k) v_sorted(k, jj) = v(k, src);
        if (f.S[src] > scale * 1e-13 && f.S[src] > 0.0) {
            for (std::size_t k = 0; k < m; ++k) u_sorted(k, jj) = a(k, src) / f.S[src];
        }
    }
    // complete U's basis for (near-)zero singular directions so U stays
    // orthonormal column-wise
    for (std::size_t jj = 0; jj < n; ++jj) {
        double nrm = 0.0;
        for (std::size_t k = 0; k < m; ++k) nrm += u_sorted(k, jj) * u_sorted(k, jj);
        if (nrm > 0.5) continue;
        for (std::size_t cand = 0; cand < m; ++cand) {
            std::vector<double> e(m, 0.0);
            e[cand] = 1.0;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == jj) continue;
                double proj = 0.0;
                for (std::size_t k = 0; k < m; ++k) proj += e[k] * u_sorted(k, c);
                for (std::size_t k = 0; k < m; ++k) e[k] -= proj * u_sorted(k, c);
            }
            double enrm = 0.0;
            for (double x : e) enrm += x * x;
            if (enrm > 0.25) {
                enrm = std::sqrt(enrm);
                for (std::size_t k = 0; k < m; ++k) u_sorted(k, jj) = e[k] / enrm;
                break;
            }
        }
    }
    f.U = std::move(u_sorted);
    f.V = std::move(v_sorted);
    f.S = std::move(s_sorted);
    return f;
}

} // namespace detail

/// Thin SVD with S sorted nonincreasing and orthonormal U, V columns.
inline SvdFactors svd_full(const Matrix& y) {
    if (y.rows() >= y.cols()) return detail::jacobi_svd_tall(y);
    SvdFactors f = detail::jacobi_svd_tall(transpose(y));
    std::swap(f.U, f.V);
    return f;
}

inline Matrix svd_reconstruct(const SvdFactors& f) {
    Matrix us = f.U;
    for (std::size_t j = 0; j < f.S.size(); ++j)
        for (std::size_t i = 0; i < us.rows(); ++i) us(i, j) *= f.S[j];
    return us * transpose(f.V);
}

/// Level-s SVD baseline: restrict, full SVD of the coarse image, quantize the
/// three factors, reconstruct and prolong back. Optional channel noise is
/// applied to the quantized factors (derived seeds seed, seed+1, seed+2).
inline Matrix svd_level_baseline(const Matrix& y, std::size_t s, std::size_t r,
                                 double quant_step, const NoiseSpec& noise = {0.0, 0}) {
    const Matrix coarse = restrict_level(y, s, r);
    SvdFactors f = svd_full(coarse);
    Matrix u = quantize_roundtrip(f.U, quant_step);
    Matrix v = quantize_roundtrip(f.V, quant_step);
    Matrix sdiag(f.S.size(), f.S.size(), 0.0);
    for (std::size_t i = 0; i < f.S.size(); ++i)
        sdiag(i, i) = static_cast<double>(quantize_value(f.S[i], quant_step)) * quant_step;
    if (noise.sigma > 0.0) {
        u = mult_noise(u, {noise.sigma, noise.seed});
        sdiag = mult_noise(sdiag, {noise.sigma, noise.seed + 1});
        v = mult_noise(v, {noise.sigma, noise.seed + 2});
    }
    const Matrix recon = u * sdiag * transpose(v);
    return prolong_level(recon, s, r, y.rows(), y.cols());
}

/// Memory units of the quantized SVD triple under the archive counting rule:
/// one index unit per stored column/value vector plus its nonzero entries.
inline MemoryAccount svd_memory_account(const SvdFactors& f, double quant_step,
                                        std::size_t orig_rows, std::size_t orig_cols) {
    MemoryAccount acc;
    acc.original_values = orig_rows * orig_cols;
    for (std::size_t j = 0; j < f.U.cols(); ++j)
        acc.stored_values += 1 + detail::nnz_quantized(f.U, j, quant_step);
    for (std::size_t j = 0; j < f.V.cols(); ++j)
        acc.stored_values += 1 + detail::nnz_quantized(f.V, j, quant_step);
    acc.stored_values += 1;  // the S vector record
    for (double s : f.S)
        if (quantize_value(s, quant_step) != 0) acc.stored_values += 1;
    return acc;
}

} // namespace trinmf
