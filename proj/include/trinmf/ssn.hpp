#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trinmf/matrix.hpp"

namespace trinmf {

// Semi-smooth Newton solver with primal-dual active sets for
//
//   min_{A>=0, P>=0}  ||Y - A P||_F2^2 + alpha ||A||_F1 + nu ||P||_F1
//                     + gamma ||P P^T - I||_F1
//
// The l1 terms and the nonnegativity constraints are handled through their
// pointwise complementarity conditions; each iteration predicts active sets
// from the current primal-dual pair, pins the active entries to zero and
// solves the reduced stationarity systems row-by-row (for A) and
// column-by-column (for P).

struct SsnConfig {
    double alpha = 0.2;
    double nu = 0.02;
    double gamma = 0.02;
    double c1 = 1.0;
    double c2 = 1.0;
    std::size_t max_iter = 200;
    double obj_tol = 1e-8;
    double denom_floor = 1e-8;
    std::uint64_t seed = 1;
    // Simplifications for nonnegative data: fix lambda_A = lambda_P = 1 and
    // drop their active sets (valid because |x| = x for x >= 0).
    bool nonneg_duals_simplified = true;
    // Rescale rows of P to unit euclidean norm after each P update; with this
    // on, P P^T has unit diagonal, L >= 0 and lambda_L is fixed at 1.
    bool normalize_P_rows = true;
    // Keep the multiplier mu_A enforcing A >= 0. Turn off for sign-indefinite
    // data, in which case A is free and only the l1 machinery acts on it.
    bool enforce_A_nonneg = true;

    void validate() const {
        if (c1 <= 0 || c2 <= 0) throw std::invalid_argument("SsnConfig: c1, c2 must be > 0");
        if (denom_floor <= 0) throw std::invalid_argument("SsnConfig: denom_floor must be > 0");
        if (obj_tol <= 0) throw std::invalid_argument("SsnConfig: obj_tol must be > 0");
        if (max_iter == 0) throw std::invalid_argument("SsnConfig: max_iter must be > 0");
        if (alpha < 0 || nu < 0 || gamma < 0)
            throw std::invalid_argument("SsnConfig: regularization weights must be >= 0");
    }
};

// Boolean entry mask with matrix shape.
struct Mask {
    std::size_t rows = 0, cols = 0;
    std::vector<std::uint8_t> on;

    Mask() = default;
    Mask(std::size_t r, std::size_t c, bool value = false)
        : rows(r), cols(c), on(r * c, value ? 1 : 0) {}

    bool operator()(std::size_t i, std::size_t j) const { return on[i * cols + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v) { on[i * cols + j] = v ? 1 : 0; }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : on) n += v;
        return n;
    }
    bool operator==(const Mask&) const = default;
};

inline std::size_t mask_diff(const Mask& a, const Mask& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.on.size(); ++i) n += a.on[i] != b.on[i];
    return n;
}

inline Mask mask_not(const Mask& a) {
    Mask r = a;
    for (auto& v : r.on) v = v ? 0 : 1;
    return r;
}

inline Mask mask_or(const Mask& a, const Mask& b) {
    Mask r = a;
    for (std::size_t i = 0; i < r.on.size(); ++i) r.on[i] = (a.on[i] || b.on[i]) ? 1 : 0;
    return r;
}

struct SolverError : std::runtime_error {
    std::size_t iteration;
    explicit SolverError(const std::string& msg, std::size_t iter)
        : std::runtime_error(msg + " (iteration " + std::to_string(iter) + ")"),
          iteration(iter) {}
};

// All primal and dual iterates of one solver run, plus the active masks from
// the most recent step. Masks marked "active" pin the entry to zero in the
// next primal update; each inactive mask is the complement of its active one.
struct SsnState {
    Matrix A, P;
    Matrix mu_A, lambda_A;
    Matrix mu_P, lambda_P;
    Matrix L, R, lambda_L;
    Mask active_A1, active_A2, active_P1, active_P2, active_L;
    std::size_t iter = 0;

    Mask inactive_A1() const { return mask_not(active_A1); }
    Mask inactive_A2() const { return mask_not(active_A2); }
    Mask inactive_P1() const { return mask_not(active_P1); }
    Mask inactive_P2() const { return mask_not(active_P2); }
    Mask inactive_L() const { return mask_not(active_L); }
};

struct SsnDiagnostics {
    std::vector<double> objective_history;
    std::vector<std::size_t> active_set_change_history;
    bool converged = false;
    std::size_t iterations_used = 0;
};

// ---------------------------------------------------------------------------
// Complementarity residuals
// ---------------------------------------------------------------------------

/// Residual of the subdifferential condition lambda in d|.|(x), written as the
/// fixed point lambda = (lambda + c x)/max(1, |lambda + c x|). Zero exactly
/// when lambda is a valid subgradient of |.| at x.
inline double sign_residual(double lambda, double x, double c) {
    const double t = lambda + c * x;
    return lambda * std::max(1.0, std::abs(t)) - t;
}

/// Residual of the complementarity condition mu = min(mu + c x, 0) that
/// characterizes x >= 0 with multiplier mu <= 0. Zero iff mu <= 0, x >= 0 and
/// mu * x = 0.
inline double nonneg_residual(double mu, double x, double c) {
    return mu - std::min(mu + c * x, 0.0);
}

// ---------------------------------------------------------------------------
// Per-step building blocks
// ---------------------------------------------------------------------------

/// Multiplier estimate for the A >= 0 constraint at the current iterate:
/// mu_A = -2 A P P^T + 2 Y P^T - alpha lambda_A (minus the full gradient).
inline Matrix compute_mu_A(const Matrix& A, const Matrix& P, const Matrix& Y,
                           const Matrix& lambda_A, double alpha) {
    if (A.cols() != P.rows() || Y.rows() != A.rows() || Y.cols() != P.cols())
        throw std::invalid_argument("compute_mu_A: shape mismatch");
    require_same_shape(A, lambda_A, "compute_mu_A");
    const Matrix Pt = transpose(P);
    return (Y * Pt) * 2.0 - (A * (P * Pt)) * 2.0 - lambda_A * alpha;
}

/// Multiplier estimate for P >= 0. `ortho_force` is the subgradient term of
/// gamma ||P P^T - I||_F1 with respect to P, i.e. (lambda_L + lambda_L^T) P.
inline Matrix compute_mu_P(const Matrix& P, const Matrix& A, const Matrix& Y,
                           const Matrix& lambda_P, const Matrix& ortho_force,
                           double nu, double gamma) {
    if (A.cols() != P.rows() || Y.rows() != A.rows() || Y.cols() != P.cols())
        throw std::invalid_argument("compute_mu_P: shape mismatch");
    const Matrix At = transpose(A);
    return (At * Y) * 2.0 - ((At * A) * P) * 2.0 - lambda_P * nu - ortho_force * gamma;
}

/// Active masks of the two complementarity conditions at (X, mu, lambda).
///
/// The nonneg mask pins X(i,j) = 0 where mu + c1 X <= 0 (multiplier predicts
/// the constraint binds); entries with mu + c1 X > 0 are left free with
/// mu = 0. The l1 mask pins X(i,j) = 0 where |lambda + c2 X| <= 1 (the
/// subgradient absorbs the optimality condition at zero).
struct ActiveMasks {
    Mask nonneg;  // from mu:     pin where mu + c1 X <= 0
    Mask l1;      // from lambda: pin where |lambda + c2 X| <= 1
};

inline ActiveMasks active_masks(const Matrix& X, const Matrix& mu, const Matrix& lambda,
                                double c1, double c2) {
    require_same_shape(X, mu, "active_masks");
    require_same_shape(X, lambda, "active_masks");
    ActiveMasks m;
    m.nonneg = Mask(X.rows(), X.cols());
    m.l1 = Mask(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) {
            m.nonneg.set(i, j, mu(i, j) + c1 * X(i, j) <= 0.0);
            m.l1.set(i, j, std::abs(lambda(i, j) + c2 * X(i, j)) <= 1.0);
        }
    return m;
}

/// Entrywise Newton coefficients of the l1 complementarity linearization:
/// a = lambda / max(1,|lambda|), b = sign(lambda + c2 X), d = |lambda + c2 X|.
/// b is zeroed where |lambda + c2 X| < denom_floor.
struct NewtonCoeffs {
    Matrix a, b, d;
};

inline NewtonCoeffs newton_coeffs(const Matrix& lambda, const Matrix& X, double c2,
                                  double denom_floor) {
    require_same_shape(lambda, X, "newton_coeffs");
    NewtonCoeffs nc{Matrix(X.rows(), X.cols(), 0.0), Matrix(X.rows(), X.cols(), 0.0),
                    Matrix(X.rows(), X.cols(), 0.0)};
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) {
            const double lam = lambda(i, j);
            const double t = lam + c2 * X(i, j);
            nc.a(i, j) = lam / std::max(1.0, std::abs(lam));
            nc.b(i, j) = std::abs(t) < denom_floor ? 0.0 : (t > 0 ? 1.0 : -1.0);
            nc.d(i, j) = std::abs(t);
        }
    return nc;
}

/// Entrywise dual-recovery weight w = c2 (1 - a b) / max(d - 1, denom_floor),
/// so that lambda_next = w .* X_next + a.
inline Matrix dual_weight(const NewtonCoeffs& nc, double c2, double denom_floor) {
    Matrix w(nc.a.rows(), nc.a.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j)
            w(i, j) = c2 * (1.0 - nc.a(i, j) * nc.b(i, j)) /
                      std::max(nc.d(i, j) - 1.0, denom_floor);
    return w;
}

namespace detail {

constexpr double kSolveRegularization = 1e-10;

// One restricted stationarity solve for a row of A (or column of P):
//   [2 G_SS + reg_weight diag(w_S)] x = rhs_S,  G = P P^T (resp. A^T A).
inline void solve_restricted(const Matrix& gram, const std::vector<double>& rhs_full,
                             const std::vector<double>& weight_full, double reg_weight,
                             const std::vector<std::size_t>& free_idx,
                             std::vector<double>& out_full, const char* what,
                             std::size_t line_idx) {
    const std::size_t m = free_idx.size();
    if (m == 0) return;
    Matrix sys(m, m, 0.0);
    std::vector<double> rhs(m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b)
            sys(a, b) = 2.0 * gram(free_idx[a], free_idx[b]);
        sys(a, a) += reg_weight * weight_full[free_idx[a]] + kSolveRegularization;
        rhs[a] = rhs_full[free_idx[a]];
    }
    std::vector<double> x;
    try {
        x = solve_dense(std::move(sys), std::move(rhs));
    } catch (const std::runtime_error&) {
        throw SolverError(std::string("singular restricted system in ") + what + " " +
                              std::to_string(line_idx),
                          0);
    }
    for (std::size_t a = 0; a < m; ++a) out_full[free_idx[a]] = x[a];
}

// Restricted solve with sign refinement: entries of the solution that come
// out negative are moved into the pinned set and the system is re-solved, so
// the result is exactly zero there and the stationarity conditions hold on
// the surviving free set. This keeps the iterate nonnegative without leaving
// stale clamped values behind.
inline void solve_restricted_nonneg(const Matrix& gram, const std::vector<double>& rhs_full,
                                    const std::vector<double>& weight_full, double reg_weight,
                                    std::vector<std::size_t> free_idx,
                                    std::vector<double>& out_full, const char* what,
                                    std::size_t line_idx) {
    while (!free_idx.empty()) {
        for (std::size_t j : free_idx) out_full[j] = 0.0;
        solve_restricted(gram, rhs_full, weight_full, reg_weight, free_idx, out_full, what,
                         line_idx);
        std::vector<std::size_t> keep;
        keep.reserve(free_idx.size());
        for (std::size_t j : free_idx) {
            if (out_full[j] >= 0.0)
                keep.push_back(j);
            else
                out_full[j] = 0.0;
        }
        if (keep.size() == free_idx.size()) return;
        free_idx = std::move(keep);
    }
}

} // namespace detail

/// One Newton update of A with P fixed. Pinned entries (pin mask on) are set
/// to exactly zero; free entries solve, row by row,
///   0 = 2 A+ P P^T - 2 Y P^T + alpha lambda_A+
/// with lambda_A+ eliminated entrywise via lambda+ = w .* A+ + a. When
/// `coeffs` is absent (simplified duals), lambda_A+ is the constant 1 and the
/// alpha term moves to the right-hand side.
struct PrimalDualUpdate {
    Matrix X;       // A or P
    Matrix lambda;  // matching dual
};

inline PrimalDualUpdate solve_A(const Matrix& Y, const Matrix& P, const Mask& pin,
                                const std::optional<NewtonCoeffs>& coeffs, double alpha,
                                double c2, double denom_floor, bool clamp_nonneg = false) {
    const std::size_t n = Y.rows(), k = P.rows();
    if (pin.rows != n || pin.cols != k)
        throw std::invalid_argument("solve_A: mask shape mismatch");
    const Matrix Pt = transpose(P);
    const Matrix G = P * Pt;                 // k x k
    const Matrix YPt = Y * Pt;               // n x k
    Matrix A(n, k, 0.0);
    Matrix lambda(n, k, 1.0);
    Matrix w(n, k, 0.0);
    if (coeffs) w = dual_weight(*coeffs, c2, denom_floor);

    std::vector<double> rhs(k), weight(k), sol(k);
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i) {
        free_idx.clear();
        for (std::size_t j = 0; j < k; ++j) {
            sol[j] = 0.0;
            if (!pin(i, j)) free_idx.push_back(j);
            if (coeffs) {
                rhs[j] = 2.0 * YPt(i, j) - alpha * coeffs->a(i, j);
                weight[j] = w(i, j);
            } else {
                rhs[j] = 2.0 * YPt(i, j) - alpha;  // lambda_A = 1
                weight[j] = 0.0;
            }
        }
        if (clamp_nonneg)
            detail::solve_restricted_nonneg(G, rhs, weight, alpha, free_idx, sol,
                                            "solve_A row", i);
        else
            detail::solve_restricted(G, rhs, weight, alpha, free_idx, sol, "solve_A row", i);
        for (std::size_t j = 0; j < k; ++j) A(i, j) = sol[j];
    }
    if (coeffs) {
        // free entries follow the Newton relation; pinned entries absorb the
        // stationarity residual so |lambda| > 1 flags them for release
        const Matrix AG = A * G;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j)
                lambda(i, j) = pin(i, j)
                                   ? (alpha > 0.0
                                          ? (2.0 * YPt(i, j) - 2.0 * AG(i, j)) / alpha
                                          : 0.0)
                                   : w(i, j) * A(i, j) + coeffs->a(i, j);
    }
    return {std::move(A), std::move(lambda)};
}

/// One Newton update of P with A fixed. Columnwise analogue of solve_A with
/// the lagged orthogonality force gamma (lambda_L + lambda_L^T) P_prev on the
/// right-hand side. Optionally rescales rows of the result to unit norm.
inline PrimalDualUpdate solve_P(const Matrix& Y, const Matrix& A, const Matrix& ortho_force,
                                const Mask& pin, const std::optional<NewtonCoeffs>& coeffs,
                                double nu, double gamma, double c2, double denom_floor,
                                bool normalize_rows, bool clamp_nonneg = false) {
    const std::size_t k = A.cols(), m = Y.cols();
    if (pin.rows != k || pin.cols != m)
        throw std::invalid_argument("solve_P: mask shape mismatch");
    const Matrix At = transpose(A);
    const Matrix G = At * A;    // k x k
    const Matrix AtY = At * Y;  // k x m
    Matrix P(k, m, 0.0);
    Matrix lambda(k, m, 1.0);
    Matrix w(k, m, 0.0);
    if (coeffs) w = dual_weight(*coeffs, c2, denom_floor);

    std::vector<double> rhs(k), weight(k), sol(k);
    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < m; ++j) {
        free_idx.clear();
        for (std::size_t i = 0; i < k; ++i) {
            sol[i] = 0.0;
            if (!pin(i, j)) free_idx.push_back(i);
            const double force = gamma * ortho_force(i, j);
            if (coeffs) {
                rhs[i] = 2.0 * AtY(i, j) - nu * coeffs->a(i, j) - force;
                weight[i] = w(i, j);
            } else {
                rhs[i] = 2.0 * AtY(i, j) - nu - force;  // lambda_P = 1
                weight[i] = 0.0;
            }
        }
        if (clamp_nonneg)
            detail::solve_restricted_nonneg(G, rhs, weight, nu, free_idx, sol,
                                            "solve_P column", j);
        else
            detail::solve_restricted(G, rhs, weight, nu, free_idx, sol, "solve_P column", j);
        for (std::size_t i = 0; i < k; ++i) P(i, j) = sol[i];
    }
    if (coeffs) {
        const Matrix GP = G * P;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < m; ++j)
                lambda(i, j) = pin(i, j)
                                   ? (nu > 0.0 ? (2.0 * AtY(i, j) - 2.0 * GP(i, j) -
                                                  gamma * ortho_force(i, j)) /
                                                     nu
                                               : 0.0)
                                   : w(i, j) * P(i, j) + coeffs->a(i, j);
    }
    if (normalize_rows) {
        for (std::size_t i = 0; i < k; ++i) {
            double nrm = 0.0;
            for (std::size_t j = 0; j < m; ++j) nrm += P(i, j) * P(i, j);
            nrm = std::sqrt(nrm);
            if (nrm > 0.0)
                for (std::size_t j = 0; j < m; ++j) P(i, j) /= nrm;
        }
    }
    return {std::move(P), std::move(lambda)};
}

/// Orthogonality bookkeeping update: L+ = P+ P+^T - I (zeroed on the active
/// set), R+ from the secant relation R+ (P+ - P) = L+ - L in the
/// minimum-norm least-squares sense, and lambda_L+ recovered entrywise.
struct OrthoUpdate {
    Matrix L, R, lambda_L;
};

inline OrthoUpdate update_L(const Matrix& P_next, const Matrix& P_prev, const Matrix& L_prev,
                            const Mask& pin, const std::optional<NewtonCoeffs>& coeffs,
                            double c2, double denom_floor) {
    const std::size_t k = P_next.rows();
    require_same_shape(P_next, P_prev, "update_L");
    Matrix L = P_next * transpose(P_next) - Matrix::identity(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (pin(i, j)) L(i, j) = 0.0;

    // The secant relation fixes R only through the action of dP; the matrix
    // stand-in solves R (dP dP^T) = dL, the normal-equation reduction, which
    // is unique once regularized and exactly zero for a zero secant.
    const Matrix dP = P_next - P_prev;
    const Matrix dL = L - L_prev;
    Matrix R(k, k, 0.0);
    if (frob2_sq(dP) > 0.0) {
        Matrix gram = dP * transpose(dP);
        for (std::size_t i = 0; i < k; ++i) gram(i, i) += detail::kSolveRegularization;
        // R gram = dL row-wise; gram is symmetric
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<double> x = solve_dense(gram, row(dL, i));
            for (std::size_t j = 0; j < k; ++j) R(i, j) = x[j];
        }
    }

    Matrix lambda_L(k, k, 1.0);
    if (coeffs) {
        const Matrix w = dual_weight(*coeffs, c2, denom_floor);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                lambda_L(i, j) = w(i, j) * L(i, j) + coeffs->a(i, j);
    }
    return {std::move(L), std::move(R), std::move(lambda_L)};
}

/// Full objective J(A, P) = ||Y-AP||_F2^2 + alpha||A||_F1 + nu||P||_F1
/// + gamma||P P^T - I||_F1.
inline double ssn_objective(const Matrix& Y, const Matrix& A, const Matrix& P,
                            const SsnConfig& cfg) {
    const Matrix resid = Y - A * P;
    const Matrix ortho = P * transpose(P) - Matrix::identity(P.rows());
    return frob2_sq(resid) + cfg.alpha * l1_norm(A) + cfg.nu * l1_norm(P) +
           cfg.gamma * l1_norm(ortho);
}

/// Initial state: strictly positive A, P scaled to a deliberate undershoot
/// of ||Y||_F, unit dual starts for all lambdas, zero mu, L consistent with
/// P. Undershooting keeps the first gradient aligned with the data so no
/// component gets pinned before the first solve.
inline SsnState ssn_init(const Matrix& Y, std::size_t k, const SsnConfig& cfg) {
    constexpr double kInitUndershoot = 0.1;
    SsnState st;
    st.A = random_uniform(Y.rows(), k, 0.1, 1.0, cfg.seed);
    st.P = random_uniform(k, Y.cols(), 0.1, 1.0, cfg.seed + 0x9e3779b97f4a7c15ull);
    const double prod_norm = frob_norm(st.A * st.P);
    const double y_norm = frob_norm(Y);
    const double scale =
        prod_norm > 0.0 ? std::sqrt(kInitUndershoot * y_norm / prod_norm) : 0.0;
    st.A = st.A * scale;
    st.P = st.P * scale;
    st.lambda_A = Matrix(Y.rows(), k, 1.0);
    st.lambda_P = Matrix(k, Y.cols(), 1.0);
    st.lambda_L = Matrix(k, k, 1.0);
    st.mu_A = Matrix(Y.rows(), k, 0.0);
    st.mu_P = Matrix(k, Y.cols(), 0.0);
    st.L = st.P * transpose(st.P) - Matrix::identity(k);
    st.R = Matrix(k, k, 0.0);
    st.active_A1 = Mask(Y.rows(), k);
    st.active_A2 = Mask(Y.rows(), k);
    st.active_P1 = Mask(k, Y.cols());
    st.active_P2 = Mask(k, Y.cols());
    st.active_L = Mask(k, k);
    return st;
}

/// One full pass of the primal-dual active-set iteration (A update, P update,
/// orthogonality update), honoring the configured simplifications.
inline SsnState ssn_step(const SsnState& state, const Matrix& Y, const SsnConfig& cfg) {
    cfg.validate();
    const std::size_t k = state.A.cols();
    SsnState next = state;

    // multiplier estimates and the orthogonality force need the duals as
    // valid subgradients; pinned-entry duals can exceed [-1,1] to signal
    // release and must not leak into the gradients unclamped
    const auto as_subgradient = [](const Matrix& lam) {
        Matrix c = lam;
        for (double& v : c.data()) v /= std::max(1.0, std::abs(v));
        return c;
    };

    // --- A update ---
    next.mu_A = compute_mu_A(state.A, state.P, Y, as_subgradient(state.lambda_A), cfg.alpha);
    const ActiveMasks masks_A = active_masks(state.A, next.mu_A, state.lambda_A, cfg.c1, cfg.c2);
    Mask pin_A(Y.rows(), k, false);
    if (cfg.enforce_A_nonneg) pin_A = masks_A.nonneg;
    std::optional<NewtonCoeffs> coeffs_A;
    if (!cfg.nonneg_duals_simplified && cfg.alpha > 0.0) {
        coeffs_A = newton_coeffs(state.lambda_A, state.A, cfg.c2, cfg.denom_floor);
        pin_A = mask_or(pin_A, masks_A.l1);
        next.active_A2 = masks_A.l1;
    } else {
        next.active_A2 = Mask(Y.rows(), k, false);
    }
    next.active_A1 = cfg.enforce_A_nonneg ? masks_A.nonneg : Mask(Y.rows(), k, false);
    PrimalDualUpdate upd_A = solve_A(Y, state.P, pin_A, coeffs_A, cfg.alpha, cfg.c2,
                                     cfg.denom_floor, cfg.enforce_A_nonneg);
    next.A = std::move(upd_A.X);
    next.lambda_A = cfg.nonneg_duals_simplified ? Matrix(Y.rows(), k, 1.0)
                                                : std::move(upd_A.lambda);

    // --- P update ---
    const Matrix lambda_L_sub = as_subgradient(state.lambda_L);
    const Matrix ortho_force = (lambda_L_sub + transpose(lambda_L_sub)) * state.P;
    next.mu_P = compute_mu_P(state.P, next.A, Y, as_subgradient(state.lambda_P), ortho_force,
                             cfg.nu, cfg.gamma);
    const ActiveMasks masks_P = active_masks(state.P, next.mu_P, state.lambda_P, cfg.c1, cfg.c2);
    Mask pin_P = masks_P.nonneg;
    std::optional<NewtonCoeffs> coeffs_P;
    if (!cfg.nonneg_duals_simplified && cfg.nu > 0.0) {
        coeffs_P = newton_coeffs(state.lambda_P, state.P, cfg.c2, cfg.denom_floor);
        pin_P = mask_or(pin_P, masks_P.l1);
        next.active_P2 = masks_P.l1;
    } else {
        next.active_P2 = Mask(k, Y.cols(), false);
    }
    next.active_P1 = masks_P.nonneg;
    PrimalDualUpdate upd_P = solve_P(Y, next.A, ortho_force, pin_P, coeffs_P, cfg.nu,
                                     cfg.gamma, cfg.c2, cfg.denom_floor,
                                     /*normalize_rows=*/false, /*clamp_nonneg=*/true);
    next.P = std::move(upd_P.X);
    next.lambda_P = cfg.nonneg_duals_simplified ? Matrix(k, Y.cols(), 1.0)
                                                : std::move(upd_P.lambda);
    if (cfg.normalize_P_rows) {
        // unit P rows with the scale pushed into A's columns: P P^T gets a
        // unit diagonal while the product A P is untouched
        for (std::size_t i = 0; i < k; ++i) {
            double nrm = 0.0;
            for (std::size_t j = 0; j < Y.cols(); ++j) nrm += next.P(i, j) * next.P(i, j);
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) continue;
            for (std::size_t j = 0; j < Y.cols(); ++j) next.P(i, j) /= nrm;
            for (std::size_t r = 0; r < Y.rows(); ++r) next.A(r, i) *= nrm;
        }
    }

    // --- orthogonality update ---
    std::optional<NewtonCoeffs> coeffs_L;
    Mask pin_L(k, k, false);
    if (!cfg.normalize_P_rows && cfg.gamma > 0.0) {
        coeffs_L = newton_coeffs(state.lambda_L, state.L, cfg.c2, cfg.denom_floor);
        const ActiveMasks masks_L = active_masks(state.L, Matrix(k, k, 0.0), state.lambda_L,
                                                 cfg.c1, cfg.c2);
        pin_L = masks_L.l1;
    }
    next.active_L = pin_L;
    OrthoUpdate upd_L = update_L(next.P, state.P, state.L, pin_L, coeffs_L, cfg.c2,
                                 cfg.denom_floor);
    next.L = std::move(upd_L.L);
    next.R = std::move(upd_L.R);
    next.lambda_L = cfg.normalize_P_rows ? Matrix(k, k, 1.0) : std::move(upd_L.lambda_L);

    next.iter = state.iter + 1;
    return next;
}

struct SsnResult {
    Matrix A, P;
    SsnDiagnostics diagnostics;
};

/// Run the iteration from the seeded start until the active sets repeat, the
/// relative objective change drops below obj_tol, or max_iter is reached.
/// The optional observer sees every iterate (diagnostics, invariant checks).
inline SsnResult ssn_solve(const Matrix& Y, std::size_t k, const SsnConfig& cfg,
                           const std::function<void(const SsnState&)>& observer = {}) {
    cfg.validate();
    if (k == 0) throw std::invalid_argument("ssn_solve: rank must be positive");
    if (cfg.enforce_A_nonneg) require_nonneg(Y, "ssn_solve");

    SsnState state = ssn_init(Y, k, cfg);
    SsnDiagnostics diag;
    double prev_obj = ssn_objective(Y, state.A, state.P, cfg);

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        SsnState next = ssn_step(state, Y, cfg);

        const std::size_t changes =
            mask_diff(next.active_A1, state.active_A1) + mask_diff(next.active_A2, state.active_A2) +
            mask_diff(next.active_P1, state.active_P1) + mask_diff(next.active_P2, state.active_P2) +
            mask_diff(next.active_L, state.active_L);
        const double obj = ssn_objective(Y, next.A, next.P, cfg);
        if (!std::isfinite(obj))
            throw SolverError("ssn_solve: objective diverged", it + 1);
        diag.objective_history.push_back(obj);
        diag.active_set_change_history.push_back(changes);
        state = std::move(next);
        if (observer) observer(state);
        diag.iterations_used = it + 1;

        // it == 0 compares against the placeholder init masks and is skipped
        if (it > 0 && changes == 0) {
            diag.converged = true;  // active sets identical on two consecutive iterations
            break;
        }
        const double rel_change = std::abs(obj - prev_obj) / std::max(1.0, prev_obj);
        if (it > 0 && rel_change < cfg.obj_tol) {
            diag.converged = true;
            break;
        }
        prev_obj = obj;
    }
    return {std::move(state.A), std::move(state.P), std::move(diag)};
}

/// Diagnostics as a line-oriented text log: "iter objective active_changes".
inline std::string diagnostics_log(const SsnDiagnostics& d) {
    std::string out;
    for (std::size_t i = 0; i < d.objective_history.size(); ++i) {
        out += std::to_string(i + 1) + " " + std::to_string(d.objective_history[i]) + " " +
               std::to_string(d.active_set_change_history[i]) + "\n";
    }
    return out;
}

} // namespace trinmf
