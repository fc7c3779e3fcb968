#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>

#include "trinmf/matrix.hpp"
#include "trinmf/quantize.hpp"
#include "trinmf/trifactor.hpp"

namespace trinmf {

struct NoiseSpec {
    double sigma = 0.25;
    std::uint64_t seed = 0;
};

// Memory accounting. One unit per stored nonzero quantized value plus one
// unit per stored index (column index of each stored U/V vector, the two
// indices of each kept sigma triple). The ratio divides by the dense
// original's entry count; entropy coding is out of scope.
struct MemoryAccount {
    std::size_t stored_values = 0;
    std::size_t original_values = 0;
};

inline double memory_ratio(const MemoryAccount& acc) {
    if (acc.original_values == 0)
        throw std::invalid_argument("memory_ratio: original_values must be positive");
    return static_cast<double>(acc.stored_values) / static_cast<double>(acc.original_values);
}

namespace detail {

inline std::size_t nnz_quantized(const Matrix& m, std::size_t col, double step) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (quantize_value(m(i, col), step) != 0) ++n;
    return n;
}

} // namespace detail

/// Units for the truncated tri-factor archive: each kept triple costs two
/// index units plus its nonzero value; each referenced U/V column costs one
/// index unit plus its nonzero entries.
inline MemoryAccount trifactor_memory_account(const TruncatedTriFactor& ttf, double quant_step,
                                              std::size_t orig_rows, std::size_t orig_cols) {
    MemoryAccount acc;
    acc.original_values = orig_rows * orig_cols;
    std::set<std::size_t> u_cols, v_cols;
    for (const auto& e : ttf.kept) {
        acc.stored_values += 2;  // (i, j)
        if (quantize_value(e.sigma, quant_step) != 0) acc.stored_values += 1;
        u_cols.insert(e.i);
        v_cols.insert(e.j);
    }
    for (std::size_t c : u_cols)
        acc.stored_values += 1 + detail::nnz_quantized(ttf.base.U, c, quant_step);
    for (std::size_t c : v_cols)
        acc.stored_values += 1 + detail::nnz_quantized(ttf.base.V, c, quant_step);
    return acc;
}

/// Entrywise multiplicative channel noise X (1 + sigma zeta), zeta i.i.d.
/// uniform on [-1, 1] from a generator seeded per call. sigma = 0 returns the
/// input bit-identically.
inline Matrix mult_noise(const Matrix& x, const NoiseSpec& spec) {
    if (spec.sigma < 0) throw std::invalid_argument("mult_noise: sigma must be >= 0");
    if (spec.sigma == 0.0) return x;
    std::mt19937_64 gen(spec.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix out = x;
    for (double& v : out.data()) v *= 1.0 + spec.sigma * dist(gen);
    return out;
}

/// Reconstruction after independent channel noise on U, the kept sigma
/// values and V (derived seeds: seed, seed+1, seed+2). Prolongation back to
/// the fine grid is the caller's job.
inline Matrix noisy_reconstruct(const TruncatedTriFactor& ttf, const NoiseSpec& spec) {
    TruncatedTriFactor noisy = ttf;
    noisy.base.U = mult_noise(ttf.base.U, {spec.sigma, spec.seed});
    noisy.base.V = mult_noise(ttf.base.V, {spec.sigma, spec.seed + 2});
    if (spec.sigma > 0.0) {
        std::mt19937_64 gen(spec.seed + 1);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& e : noisy.kept) e.sigma *= 1.0 + spec.sigma * dist(gen);
    }
    return reconstruct(noisy);
}

/// Affine-invariant relative L2 error: min over a, b of ||a I + b - Y||_F
/// divided by ||Y||_F, via the centered least-squares fit. A constant I gets
/// a = 0, b = mean(Y).
inline double affine_rel_error(const Matrix& image, const Matrix& reference) {
    require_same_shape(image, reference, "affine_rel_error");
    const double ref_norm = frob_norm(reference);
    if (ref_norm == 0.0)
        throw std::invalid_argument("affine_rel_error: reference is the zero matrix");
    const double mi = mean_entry(image);
    const double mr = mean_entry(reference);
    double cov = 0.0, var = 0.0;
    for (std::size_t idx = 0; idx < image.size(); ++idx) {
        const double di = image.data()[idx] - mi;
        cov += di * (reference.data()[idx] - mr);
        var += di * di;
    }
    const double a = var > 0.0 ? cov / var : 0.0;
    const double b = mr - a * mi;
    double err2 = 0.0;
    for (std::size_t idx = 0; idx < image.size(); ++idx) {
        const double d = a * image.data()[idx] + b - reference.data()[idx];
        err2 += d * d;
    }
    return std::sqrt(err2) / ref_norm;
}

/// Blockwise forward-difference gradient energy: sum over blocks of
/// ||grad Y_IJ||_F2^2 with no cross-block differences. Edge-replication
/// padding brings the dims up to a block multiple (padded differences are
/// zero and do not contribute).
inline double grad_energy(const Matrix& y, std::size_t block_size) {
    if (block_size == 0) throw std::invalid_argument("grad_energy: block_size must be positive");
    const std::size_t rows_pad = ((y.rows() + block_size - 1) / block_size) * block_size;
    const std::size_t cols_pad = ((y.cols() + block_size - 1) / block_size) * block_size;
    auto at = [&](std::size_t i, std::size_t j) {
        return y(std::min(i, y.rows() - 1), std::min(j, y.cols() - 1));
    };
    double acc = 0.0;
    for (std::size_t bi = 0; bi < rows_pad; bi += block_size)
        for (std::size_t bj = 0; bj < cols_pad; bj += block_size)
            for (std::size_t di = 0; di < block_size; ++di)
                for (std::size_t dj = 0; dj < block_size; ++dj) {
                    const std::size_t i = bi + di, j = bj + dj;
                    if (di + 1 < block_size) {
                        const double dv = at(i + 1, j) - at(i, j);
                        acc += dv * dv;
                    }
                    if (dj + 1 < block_size) {
                        const double dh = at(i, j + 1) - at(i, j);
                        acc += dh * dh;
                    }
                }
    return acc;
}

} // namespace trinmf
