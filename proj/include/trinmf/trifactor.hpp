#pragma once

#include <algorithm>
#include <tuple>
#include <vector>

#include "trinmf/matrix.hpp"
#include "trinmf/ssn.hpp"

namespace trinmf {

// Two-stage nonnegative tri-factorization Y ~ U Sigma V^T. Sigma is the
// "generalized singular matrix": sparse but not necessarily diagonal; the
// entry sigma(i,j) weights the rank-one term u_i (x) v_j built from column i
// of U and column j of V.

struct TriFactor {
    Matrix U;      // M x p
    Matrix Sigma;  // p x p
    Matrix V;      // N x p
    std::size_t rank_p = 0;
};

struct SigmaEntry {
    std::size_t i = 0, j = 0;
    double sigma = 0.0;
};

struct TruncatedTriFactor {
    TriFactor base;
    std::vector<SigmaEntry> kept;  // sigma nonincreasing, (i,j) distinct
};

/// Factor Y in two stages: first Y ~ A0 V0^T, then A0^T ~ Sigma0^T U0^T, both
/// by the same Newton solver with shared (alpha, nu, gamma). The combined
/// triple approximates the joint minimizer without solving the coupled
/// three-factor problem. Stage diagnostics are exposed on request.
inline TriFactor two_stage(const Matrix& Y, std::size_t p, const SsnConfig& cfg,
                           SsnDiagnostics* stage1_diag = nullptr,
                           SsnDiagnostics* stage2_diag = nullptr) {
    if (p == 0) throw std::invalid_argument("two_stage: rank must be positive");
    // Stage 1: Y ~ A0 * P1 with P1 = V0^T (p x N)
    SsnResult stage1 = ssn_solve(Y, p, cfg);
    const Matrix V = transpose(stage1.P);  // N x p

    // Stage 2: A0^T ~ Sigma^T * U^T, so solve for the p x M matrix A0^T
    SsnConfig cfg2 = cfg;
    cfg2.seed = cfg.seed + 1;
    SsnResult stage2 = ssn_solve(transpose(stage1.A), p, cfg2);
    if (stage1_diag) *stage1_diag = stage1.diagnostics;
    if (stage2_diag) *stage2_diag = stage2.diagnostics;
    TriFactor tf;
    tf.Sigma = transpose(stage2.A);  // p x p
    tf.U = transpose(stage2.P);      // M x p
    tf.V = V;
    tf.rank_p = p;
    return tf;
}

/// All p^2 entries of Sigma ordered by value, largest first; ties broken by
/// (i, j) lexicographic so that archives are reproducible.
inline std::vector<SigmaEntry> sigma_sort(const Matrix& sigma) {
    std::vector<SigmaEntry> entries;
    entries.reserve(sigma.size());
    for (std::size_t i = 0; i < sigma.rows(); ++i)
        for (std::size_t j = 0; j < sigma.cols(); ++j)
            entries.push_back({i, j, sigma(i, j)});
    std::sort(entries.begin(), entries.end(), [](const SigmaEntry& a, const SigmaEntry& b) {
        if (a.sigma != b.sigma) return a.sigma > b.sigma;
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    return entries;
}

/// Smallest p_tilde whose sigma prefix sum strictly exceeds K2 times the
/// total; 1 when the total is zero.
inline std::size_t select_p_tilde(const std::vector<SigmaEntry>& sorted, double k2) {
    if (sorted.empty()) throw std::invalid_argument("select_p_tilde: empty list");
    if (k2 <= 0.0 || k2 >= 1.0) throw std::invalid_argument("select_p_tilde: K2 must be in (0,1)");
    double total = 0.0;
    for (const auto& e : sorted) total += e.sigma;
    if (total == 0.0) return 1;
    double acc = 0.0;
    for (std::size_t l = 0; l < sorted.size(); ++l) {
        acc += sorted[l].sigma;
        if (acc > k2 * total) return l + 1;
    }
    return sorted.size();
}

/// Keep the first p_tilde sorted entries of Sigma.
inline TruncatedTriFactor truncate_trifactor(const TriFactor& tf, std::size_t p_tilde) {
    const std::size_t p2 = tf.rank_p * tf.rank_p;
    if (p_tilde == 0 || p_tilde > p2)
        throw std::invalid_argument("truncate_trifactor: p_tilde out of range");
    TruncatedTriFactor t;
    t.base = tf;
    auto sorted = sigma_sort(tf.Sigma);
    t.kept.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(p_tilde));
    return t;
}

/// Sum of the kept rank-one terms: sum_l sigma_l u_{i_l} (x) v_{j_l}.
inline Matrix reconstruct(const TruncatedTriFactor& ttf) {
    const std::size_t m = ttf.base.U.rows(), n = ttf.base.V.rows();
    Matrix out(m, n, 0.0);
    for (const auto& e : ttf.kept) {
        if (e.sigma == 0.0) continue;
        for (std::size_t r = 0; r < m; ++r) {
            const double us = ttf.base.U(r, e.i) * e.sigma;
            if (us == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c)
                out(r, c) += us * ttf.base.V(c, e.j);
        }
    }
    return out;
}

/// Full product U Sigma V^T without truncation.
inline Matrix reconstruct_full(const TriFactor& tf) {
    return tf.U * tf.Sigma * transpose(tf.V);
}

/// Truncated Sigma as a dense p x p matrix (zeros off the kept entries).
inline Matrix truncated_sigma(const TruncatedTriFactor& ttf) {
    Matrix s(ttf.base.rank_p, ttf.base.rank_p, 0.0);
    for (const auto& e : ttf.kept) s(e.i, e.j) = e.sigma;
    return s;
}

/// Tri-factorization objective: fit plus l1 terms on Sigma, U, V and the
/// orthogonality deviations of U and V.
inline double tri_objective(const Matrix& Y, const Matrix& U, const Matrix& Sigma,
                            const Matrix& V, double alpha, double nu, double gamma) {
    const Matrix resid = Y - U * Sigma * transpose(V);
    const Matrix ou = transpose(U) * U - Matrix::identity(U.cols());
    const Matrix ov = transpose(V) * V - Matrix::identity(V.cols());
    return frob2_sq(resid) + alpha * l1_norm(Sigma) + nu * l1_norm(U) + nu * l1_norm(V) +
           gamma * l1_norm(ou) + gamma * l1_norm(ov);
}

} // namespace trinmf
