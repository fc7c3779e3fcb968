#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "trinmf/matrix.hpp"

namespace trinmf {

struct QuantMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<std::int64_t> levels;

    std::int64_t operator()(std::size_t i, std::size_t j) const { return levels[i * cols + j]; }
};

/// Nearest lattice level of x on the grid {q * step}, half away from zero.
/// A one-step refinement absorbs the division rounding so the roundtrip error
/// never exceeds step/2.
inline std::int64_t quantize_value(double x, double step) {
    if (step <= 0.0) throw std::invalid_argument("quantize: step must be > 0");
    std::int64_t q = static_cast<std::int64_t>(std::llround(x / step));
    std::int64_t best = q;
    double best_err = std::abs(static_cast<double>(q) * step - x);
    for (std::int64_t cand : {q - 1, q + 1}) {
        const double err = std::abs(static_cast<double>(cand) * step - x);
        if (err < best_err ||
            (err == best_err && std::llabs(cand) > std::llabs(best))) {
            best = cand;
            best_err = err;
        }
    }
    return best;
}

inline QuantMatrix quantize(const Matrix& x, double step) {
    QuantMatrix q{x.rows(), x.cols(), {}};
    q.levels.reserve(x.size());
    for (double v : x.data()) q.levels.push_back(quantize_value(v, step));
    return q;
}

inline Matrix dequantize(const QuantMatrix& q, double step) {
    if (step <= 0.0) throw std::invalid_argument("dequantize: step must be > 0");
    Matrix m(q.rows, q.cols, 0.0);
    for (std::size_t idx = 0; idx < q.levels.size(); ++idx)
        m.data()[idx] = static_cast<double>(q.levels[idx]) * step;
    return m;
}

/// quantize -> dequantize in one go (the stored, lossy representation).
inline Matrix quantize_roundtrip(const Matrix& x, double step) {
    return dequantize(quantize(x, step), step);
}

} // namespace trinmf
