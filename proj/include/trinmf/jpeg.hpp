#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "trinmf/matrix.hpp"
#include "trinmf/metrics.hpp"

namespace trinmf {

// 8x8-block DCT codec with the standard quality-50 quantization table, used
// as the lossy-compression comparison baseline. Images live in [0,1]; blocks
// are scaled to the 8-bit range and level-shifted before the transform, as
// the usual codec pipeline does, so the Q50 table applies at its native
// scale.

inline const Matrix& q50() {
    static const Matrix table{{16, 11, 10, 16, 24, 40, 51, 61},
                              {12, 12, 14, 19, 26, 58, 60, 55},
                              {14, 13, 16, 24, 40, 57, 69, 56},
                              {14, 17, 22, 29, 51, 87, 80, 62},
                              {18, 22, 37, 56, 68, 109, 103, 77},
                              {24, 35, 55, 64, 81, 104, 113, 92},
                              {49, 64, 78, 87, 103, 121, 120, 101},
                              {72, 92, 95, 98, 112, 100, 103, 99}};
    return table;
}

/// The 64 (row, col) block positions in zigzag scan order.
inline const std::array<std::pair<int, int>, 64>& zigzag_order() {
    static const auto order = [] {
        std::array<std::pair<int, int>, 64> o{};
        int idx = 0;
        for (int d = 0; d <= 14; ++d) {
            if (d % 2 == 0) {
                for (int r = std::min(d, 7); r >= std::max(0, d - 7); --r)
                    o[idx++] = {r, d - r};
            } else {
                for (int r = std::max(0, d - 7); r <= std::min(d, 7); ++r)
                    o[idx++] = {r, d - r};
            }
        }
        return o;
    }();
    return order;
}

namespace detail {

inline const Matrix& dct8_basis() {
    static const Matrix basis = [] {
        Matrix b(8, 8, 0.0);
        const double pi = std::acos(-1.0);
        for (int k = 0; k < 8; ++k) {
            const double ck = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int n = 0; n < 8; ++n)
                b(k, n) = ck * std::cos(pi * (2.0 * n + 1.0) * k / 16.0);
        }
        return b;
    }();
    return basis;
}

} // namespace detail

/// Orthonormal 2D type-II DCT of an 8x8 block.
inline Matrix dct8_forward(const Matrix& block) {
    if (block.rows() != 8 || block.cols() != 8)
        throw std::invalid_argument("dct8_forward: block must be 8x8");
    const Matrix& b = detail::dct8_basis();
    return b * block * transpose(b);
}

inline Matrix dct8_inverse(const Matrix& coeffs) {
    if (coeffs.rows() != 8 || coeffs.cols() != 8)
        throw std::invalid_argument("dct8_inverse: block must be 8x8");
    const Matrix& b = detail::dct8_basis();
    return transpose(b) * coeffs * b;
}

struct JpegLevelOutput {
    Matrix image;
    MemoryAccount memory;  // nonzero kept quantized coefficients / original size
};

/// JPEG-style level baseline: per 8x8 block, DCT, Q50 quantization, keep only
/// the first 2^(3-s) zigzag coefficients, dequantize and invert. Levels
/// s in {0,1,2,3} keep 8, 4, 2, 1 coefficients. Optional multiplicative
/// channel noise perturbs the quantized coefficients.
inline JpegLevelOutput jpeg_level_baseline(const Matrix& y, std::size_t s,
                                           const NoiseSpec& noise = {0.0, 0}) {
    if (s > 3) throw std::invalid_argument("jpeg_level_baseline: s must be in {0,1,2,3}");
    const std::size_t keep = std::size_t{1} << (3 - s);
    const std::size_t rows_pad = ((y.rows() + 7) / 8) * 8;
    const std::size_t cols_pad = ((y.cols() + 7) / 8) * 8;
    const auto& q = q50();
    const auto& zz = zigzag_order();

    std::mt19937_64 gen(noise.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    JpegLevelOutput out;
    out.image = Matrix(y.rows(), y.cols(), 0.0);
    out.memory.original_values = y.rows() * y.cols();
    Matrix block(8, 8, 0.0);
    for (std::size_t bi = 0; bi < rows_pad; bi += 8)
        for (std::size_t bj = 0; bj < cols_pad; bj += 8) {
            for (std::size_t di = 0; di < 8; ++di)
                for (std::size_t dj = 0; dj < 8; ++dj) {
                    const std::size_t i = std::min(bi + di, y.rows() - 1);
                    const std::size_t j = std::min(bj + dj, y.cols() - 1);
                    block(di, dj) = y(i, j) * 255.0 - 128.0;
                }
            const Matrix coeffs = dct8_forward(block);
            Matrix kept(8, 8, 0.0);
            for (std::size_t z = 0; z < keep; ++z) {
                const auto [r, c] = zz[z];
                double qc = std::round(coeffs(r, c) / q(r, c));
                if (qc != 0.0) out.memory.stored_values += 1;
                if (noise.sigma > 0.0) qc *= 1.0 + noise.sigma * unif(gen);
                kept(r, c) = qc * q(r, c);
            }
            const Matrix rec = dct8_inverse(kept);
            for (std::size_t di = 0; di < 8; ++di)
                for (std::size_t dj = 0; dj < 8; ++dj) {
                    const std::size_t i = bi + di, j = bj + dj;
                    if (i < y.rows() && j < y.cols())
                        out.image(i, j) = (rec(di, dj) + 128.0) / 255.0;
                }
        }
    return out;
}

/// Per-block quantized DCT coefficients as CSV lines
/// "block_row,block_col,r,c,level" for debugging a codec run.
inline std::string dct_blocks_csv(const Matrix& y) {
    const std::size_t rows_pad = ((y.rows() + 7) / 8) * 8;
    const std::size_t cols_pad = ((y.cols() + 7) / 8) * 8;
    const auto& q = q50();
    std::string out = "block_row,block_col,r,c,level\n";
    Matrix block(8, 8, 0.0);
    for (std::size_t bi = 0; bi < rows_pad; bi += 8)
        for (std::size_t bj = 0; bj < cols_pad; bj += 8) {
            for (std::size_t di = 0; di < 8; ++di)
                for (std::size_t dj = 0; dj < 8; ++dj)
                    block(di, dj) = y(std::min(bi + di, y.rows() - 1),
                                      std::min(bj + dj, y.cols() - 1)) *
                                        255.0 -
                                    128.0;
            const Matrix coeffs = dct8_forward(block);
            for (std::size_t r = 0; r < 8; ++r)
                for (std::size_t c = 0; c < 8; ++c) {
                    const long long level =
                        std::llround(coeffs(r, c) / q(r, c));
                    out += std::to_string(bi / 8) + "," + std::to_string(bj / 8) + "," +
                           std::to_string(r) + "," + std::to_string(c) + "," +
                           std::to_string(level) + "\n";
                }
        }
    return out;
}

} // namespace trinmf
