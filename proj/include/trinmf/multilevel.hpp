#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "trinmf/matrix.hpp"
#include "trinmf/metrics.hpp"
#include "trinmf/quantize.hpp"
#include "trinmf/ssn.hpp"
#include "trinmf/trifactor.hpp"

namespace trinmf {

// Multi-level analysis: block-averaging restriction to a coarse grid,
// tri-factorization with a per-level rank schedule, truncation by sigma mass,
// quantization, and piecewise-constant prolongation back to the fine grid.

struct MlaConfig {
    std::size_t r = 2;           // scaling factor between levels
    std::size_t s_offset = 3;    // s_max = floor(log_r(min(N,M)) - s_offset)
    double K1 = 3.5;             // rank schedule gain
    double K2 = 0.95;            // sigma mass threshold for truncation
    double quant_step = 0.01;
    SsnConfig solver;

    void validate() const {
        if (r < 2) throw std::invalid_argument("MlaConfig: r must be >= 2");
        if (K2 <= 0.0 || K2 >= 1.0) throw std::invalid_argument("MlaConfig: K2 must be in (0,1)");
        if (K1 <= 0.0) throw std::invalid_argument("MlaConfig: K1 must be > 0");
        if (quant_step <= 0.0) throw std::invalid_argument("MlaConfig: quant_step must be > 0");
    }
};

struct LevelResult {
    std::size_t s = 0;
    std::size_t p = 0;
    std::size_t p_tilde = 0;
    TruncatedTriFactor factors;  // on the coarse grid, quantized values
    Matrix reconstruction;       // prolonged to the original M x N grid
    double memory_ratio = 0.0;
    double rel_error = 0.0;
    bool failed = false;
};

/// Mean over r^s x r^s blocks; partial blocks at the edges are filled by
/// replicating the last row/column. The mean is accumulated around the
/// block's first value so a constant block reproduces its value bit-exactly.
inline Matrix restrict_level(const Matrix& y, std::size_t s, std::size_t r) {
    if (s == 0) return y;
    std::size_t block = 1;
    for (std::size_t i = 0; i < s; ++i) block *= r;
    const std::size_t out_rows = (y.rows() + block - 1) / block;
    const std::size_t out_cols = (y.cols() + block - 1) / block;
    Matrix out(out_rows, out_cols, 0.0);
    for (std::size_t bi = 0; bi < out_rows; ++bi)
        for (std::size_t bj = 0; bj < out_cols; ++bj) {
            const double anchor = y(std::min(bi * block, y.rows() - 1),
                                    std::min(bj * block, y.cols() - 1));
            double acc = 0.0;
            for (std::size_t di = 0; di < block; ++di)
                for (std::size_t dj = 0; dj < block; ++dj) {
                    const std::size_t i = std::min(bi * block + di, y.rows() - 1);
                    const std::size_t j = std::min(bj * block + dj, y.cols() - 1);
                    acc += y(i, j) - anchor;
                }
            out(bi, bj) = anchor + acc / static_cast<double>(block * block);
        }
    return out;
}

/// Replicate each coarse entry over its r^s x r^s block, cropped to M x N.
/// No 1/r^2s weight: this prolongation is the exact inverse of the averaging
/// restriction on block-constant images.
inline Matrix prolong_level(const Matrix& z, std::size_t s, std::size_t r, std::size_t m,
                            std::size_t n) {
    if (s == 0) {
        if (z.rows() != m || z.cols() != n)
            throw std::invalid_argument("prolong_level: dimension mismatch");
        return z;
    }
    std::size_t block = 1;
    for (std::size_t i = 0; i < s; ++i) block *= r;
    if (z.rows() != (m + block - 1) / block || z.cols() != (n + block - 1) / block)
        throw std::invalid_argument("prolong_level: dimension mismatch");
    Matrix out(m, n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) = z(i / block, j / block);
    return out;
}

/// Per-level rank p(s) = round(K1 sqrt(max(N,M)/max(1, ln max(N,M)
/// - 2 s ln r)) r^(-s/2)), floored at 1. Natural logs, round half away
/// from zero.
inline std::size_t rank_schedule(std::size_t n, std::size_t m, std::size_t s, std::size_t r,
                                 double k1) {
    if (n < 2 || m < 2) throw std::invalid_argument("rank_schedule: dims must be >= 2");
    const double dim = static_cast<double>(std::max(n, m));
    const double den = std::max(1.0, std::log(dim) -
                                         2.0 * static_cast<double>(s) * std::log(static_cast<double>(r)));
    const double val = k1 * std::sqrt(dim / den) *
                       std::pow(static_cast<double>(r), -static_cast<double>(s) / 2.0);
    const long long rounded = std::llround(val);
    return rounded < 1 ? 1 : static_cast<std::size_t>(rounded);
}

/// Coarsest level: floor(log_r(min(N,M)) - offset), floored at 0.
inline std::size_t smax(std::size_t n, std::size_t m, std::size_t r, std::size_t offset) {
    if (std::min(n, m) < r) throw std::invalid_argument("smax: min dimension below r");
    const double v = std::log(static_cast<double>(std::min(n, m))) /
                         std::log(static_cast<double>(r)) -
                     static_cast<double>(offset);
    return v <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(v));
}

/// Run the full per-level pipeline for s = s_max down to 1. A solver failure
/// at one level flags that level and the remaining levels still run.
inline std::vector<LevelResult> mla_run(const Matrix& y, const MlaConfig& cfg) {
    cfg.validate();
    require_nonneg(y, "mla_run");
    const std::size_t s_top = smax(y.rows(), y.cols(), cfg.r, cfg.s_offset);
    std::vector<LevelResult> levels;
    for (std::size_t s = s_top; s >= 1; --s) {
        LevelResult lr;
        lr.s = s;
        try {
            const Matrix coarse = restrict_level(y, s, cfg.r);
            std::size_t p = rank_schedule(y.rows(), y.cols(), s, cfg.r, cfg.K1);
            p = std::min(p, std::min(coarse.rows(), coarse.cols()));
            lr.p = p;
            TriFactor tf = two_stage(coarse, p, cfg.solver);
            const auto sorted = sigma_sort(tf.Sigma);
            lr.p_tilde = select_p_tilde(sorted, cfg.K2);
            TruncatedTriFactor ttf = truncate_trifactor(tf, lr.p_tilde);
            // store the lossy (quantized) factors; everything downstream
            // (memory accounting, reconstruction, noise) sees these values
            ttf.base.U = quantize_roundtrip(ttf.base.U, cfg.quant_step);
            ttf.base.V = quantize_roundtrip(ttf.base.V, cfg.quant_step);
            ttf.base.Sigma = quantize_roundtrip(ttf.base.Sigma, cfg.quant_step);
            for (auto& e : ttf.kept)
                e.sigma = static_cast<double>(quantize_value(e.sigma, cfg.quant_step)) *
                          cfg.quant_step;
            lr.factors = ttf;
            lr.reconstruction = prolong_level(reconstruct(ttf), s, cfg.r, y.rows(), y.cols());
            lr.memory_ratio =
                memory_ratio(trifactor_memory_account(ttf, cfg.quant_step, y.rows(), y.cols()));
            lr.rel_error = affine_rel_error(lr.reconstruction, y);
        } catch (const SolverError&) {
            lr.failed = true;
        }
        levels.push_back(std::move(lr));
    }
    return levels;
}

} // namespace trinmf
