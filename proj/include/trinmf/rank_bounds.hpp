#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace trinmf {

// Rank-selection machinery: how large the tri-factorization rank p should be
// for an M x N matrix so that a good sparse approximation exists with high
// probability. All bound arithmetic runs in log space; the direct products
// overflow doubles for dimensions in the hundreds.

struct RankParams {
    std::size_t N = 0, M = 0;
    double delta = 0.01;  // target objective value
    double K = 2.0;       // regularization slack constant, > 1
    double C3 = 1.0;      // covering constant (existential, not computed)
    double eta = 0.1;     // term-ratio threshold, in (0,1)

    void validate() const {
        if (N == 0 || M == 0) throw std::invalid_argument("RankParams: dims must be positive");
        if (delta <= 0) throw std::invalid_argument("RankParams: delta must be > 0");
        if (K <= 1) throw std::invalid_argument("RankParams: K must be > 1");
        if (C3 <= 0) throw std::invalid_argument("RankParams: C3 must be > 0");
        if (eta <= 0 || eta >= 1) throw std::invalid_argument("RankParams: eta must be in (0,1)");
    }
};

struct RegimeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Exponent mu(N, M, l) = l(l-1)/2 + MN - |N-M| - 1.
inline std::int64_t mu_coeff(std::size_t n, std::size_t m, std::size_t l) {
    if (n == 0 || m == 0 || l == 0) throw std::invalid_argument("mu_coeff: arguments must be >= 1");
    const auto ni = static_cast<std::int64_t>(n), mi = static_cast<std::int64_t>(m),
               li = static_cast<std::int64_t>(l);
    return li * (li - 1) / 2 + mi * ni - std::abs(ni - mi) - 1;
}

/// epsilon = delta / (K N M + min(N,M)^2).
inline double epsilon_of_delta(const RankParams& p) {
    p.validate();
    const double nm = static_cast<double>(p.N) * static_cast<double>(p.M);
    const double mn2 = std::pow(static_cast<double>(std::min(p.N, p.M)), 2.0);
    return p.delta / (p.K * nm + mn2);
}

/// ln(C3 epsilon), the quantity every bound is expressed in.
inline double log_c3_epsilon(const RankParams& p) {
    return std::log(p.C3) + std::log(epsilon_of_delta(p));
}

/// Optimal rank p = sqrt(max(M,N) / D) with the expanded denominator
/// D = ln(K N M + min(N,M)^2) - |ln delta| - ln C3. For delta >= 1 this D
/// equals |ln(C3 epsilon)| exactly; the expansion is the form whose
/// lower/upper sandwich sqrt(N/(2 ln N)) <= p <= sqrt(N/ln N) holds for
/// large square matrices.
inline double p_opt(const RankParams& p) {
    p.validate();
    if (p.C3 * epsilon_of_delta(p) >= 1.0)
        throw RegimeError("p_opt: C3 * epsilon must be < 1");
    const double nm = static_cast<double>(p.N) * static_cast<double>(p.M);
    const double mn2 = std::pow(static_cast<double>(std::min(p.N, p.M)), 2.0);
    const double denom = std::log(p.K * nm + mn2) - std::abs(std::log(p.delta)) - std::log(p.C3);
    if (denom <= 0.0)
        throw RegimeError("p_opt: denominator not positive in this parameter regime");
    return std::sqrt(static_cast<double>(std::max(p.N, p.M)) / denom);
}

/// ln of the l-th probability-bound term
///   a_l = (l^Lam - (l-1)^Lam) l! min(N,M) (C3 eps)^mu(N,M,l),  Lam = max(N,M),
/// with the power difference evaluated stably as
/// Lam ln l + log1p(-((l-1)/l)^Lam).
inline double log_term(std::size_t l, std::size_t n, std::size_t m, double log_c3eps) {
    if (l == 0) throw std::invalid_argument("log_term: l must be >= 1");
    const double lam = static_cast<double>(std::max(n, m));
    double lt_pow = 0.0;  // l = 1: 1^Lam - 0^Lam = 1
    if (l > 1) {
        const double ratio_log = lam * std::log(static_cast<double>(l - 1) / static_cast<double>(l));
        lt_pow = lam * std::log(static_cast<double>(l)) + std::log1p(-std::exp(ratio_log));
    }
    return lt_pow + std::lgamma(static_cast<double>(l) + 1.0) +
           std::log(static_cast<double>(std::min(n, m))) +
           static_cast<double>(mu_coeff(n, m, l)) * log_c3eps;
}

/// Ratio a_{l+1} / a_l, always positive, vanishing as l grows.
inline double term_ratio(std::size_t l, std::size_t n, std::size_t m, double log_c3eps) {
    return std::exp(log_term(l + 1, n, m, log_c3eps) - log_term(l, n, m, log_c3eps));
}

/// Smallest l such that the term ratio stays below eta from l to l_max.
/// Beyond this rank, growing p buys a negligible increase of the bound.
inline std::size_t p_hat(std::size_t n, std::size_t m, double eta, double log_c3eps,
                         std::size_t l_max) {
    if (eta <= 0.0 || eta >= 1.0) throw std::invalid_argument("p_hat: eta must be in (0,1)");
    if (l_max == 0) throw std::invalid_argument("p_hat: l_max must be >= 1");
    std::size_t last_above = 0;
    for (std::size_t l = 1; l <= l_max; ++l)
        if (term_ratio(l, n, m, log_c3eps) > eta) last_above = l;
    if (last_above == l_max)
        throw std::runtime_error("p_hat: ratio still above eta at l_max");
    return last_above + 1;
}

/// ln of sum_{l=1}^{p} a_l via log-sum-exp.
inline double log_bound_sum(std::size_t p, std::size_t n, std::size_t m, double log_c3eps) {
    if (p == 0) throw std::invalid_argument("log_bound_sum: p must be >= 1");
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(p);
    for (std::size_t l = 1; l <= p; ++l) {
        terms[l - 1] = log_term(l, n, m, log_c3eps);
        peak = std::max(peak, terms[l - 1]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - peak);
    return peak + std::log(acc);
}

/// ln of the single-term bound min(N,M) p^Lam (C3 eps)^mu(N,M,p).
inline double log_simple_bound(std::size_t p, std::size_t n, std::size_t m, double log_c3eps) {
    const double lam = static_cast<double>(std::max(n, m));
    return std::log(static_cast<double>(std::min(n, m))) + lam * std::log(static_cast<double>(p)) +
           static_cast<double>(mu_coeff(n, m, p)) * log_c3eps;
}

/// Stationary point of the single-term bound in p:
/// 3/4 + sqrt(1/16 + max(M,N)/|ln(C3 eps)|). Reference curve only.
inline double stationary_p_reference(std::size_t n, std::size_t m, double log_c3eps) {
    const double c = std::abs(log_c3eps);
    return 0.75 + std::sqrt(1.0 / 16.0 + static_cast<double>(std::max(n, m)) / c);
}

/// First zero of the term-ratio threshold cubic
///   -c p^3 + p^2 + (c - 2 N0 + 2) p - 1,  c = |ln(C3 eps)|,
/// located by bracket scan plus bisection on [1, 10 sqrt(N0)]. Empty when the
/// cubic has no sign change in the bracket.
inline std::optional<double> ratio_cubic_zero(double n0, double log_c3eps) {
    const double c = std::abs(log_c3eps);
    auto f = [&](double p) { return -c * p * p * p + p * p + (c - 2.0 * n0 + 2.0) * p - 1.0; };
    const double hi = 10.0 * std::sqrt(n0);
    const int steps = 4096;
    double prev_p = 1.0, prev_f = f(1.0);
    for (int i = 1; i <= steps; ++i) {
        const double p = 1.0 + (hi - 1.0) * static_cast<double>(i) / steps;
        const double fp = f(p);
        if (prev_f == 0.0) return prev_p;
        if ((prev_f < 0.0) != (fp < 0.0)) {
            double a = prev_p, b = p;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                if ((f(a) < 0.0) != (f(mid) < 0.0))
                    b = mid;
                else
                    a = mid;
            }
            return 0.5 * (a + b);
        }
        prev_p = p;
        prev_f = fp;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Monte-Carlo sandbox for the covering / near-orthogonality event
// ---------------------------------------------------------------------------

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

namespace detail {

/// Deterministic eps/2-net of the positive-orthant unit sphere: normalized
/// outer-shell points of the integer grid {0..m}^d with m ~ 4 sqrt(d)/eps.
inline std::vector<std::vector<double>> orthant_sphere_net(std::size_t d, double eps) {
    const std::size_t m = static_cast<std::size_t>(
        std::ceil(4.0 * std::sqrt(static_cast<double>(d)) / eps));
    std::vector<std::vector<double>> net;
    std::vector<std::size_t> idx(d, 0);
    // enumerate grid points with max coordinate == m
    while (true) {
        if (*std::max_element(idx.begin(), idx.end()) == m) {
            double norm = 0.0;
            for (auto v : idx) norm += static_cast<double>(v) * static_cast<double>(v);
            norm = std::sqrt(norm);
            std::vector<double> pt(d);
            for (std::size_t i = 0; i < d; ++i) pt[i] = static_cast<double>(idx[i]) / norm;
            net.push_back(std::move(pt));
        }
        std::size_t pos = 0;
        while (pos < d && idx[pos] == m) idx[pos++] = 0;
        if (pos == d) break;
        ++idx[pos];
    }
    return net;
}

inline double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

/// Heuristic lower estimate of the probability that n_points normalized
/// uniform samples in [0,1]^d admit p centers that eps-cover them and are
/// pairwise near-orthogonal within eps. Centers come greedily from a fixed
/// eps/2-net of the positive-orthant sphere, so success here implies the
/// event; failures may be false negatives. Use for trend checks, never for
/// constants.
inline McEstimate mc_cover_estimate(std::size_t d, std::size_t n_points, std::size_t p,
                                    double eps, std::size_t trials, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("mc_cover_estimate: d must be >= 2");
    if (trials == 0) throw std::invalid_argument("mc_cover_estimate: trials must be >= 1");
    if (p == 0) throw std::invalid_argument("mc_cover_estimate: p must be >= 1");
    if (eps <= 0) throw std::invalid_argument("mc_cover_estimate: eps must be > 0");
    const auto net = detail::orthant_sphere_net(d, eps);
    if (p > net.size())
        throw std::invalid_argument("mc_cover_estimate: p exceeds candidate net size");

    const double eps2 = eps * eps;
    std::size_t successes = 0;
    std::vector<std::vector<double>> samples(n_points, std::vector<double>(d));
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 gen(seed + t);  // per-trial seed keeps trials independent and replayable
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (auto& s : samples) {
            double norm = 0.0;
            do {
                norm = 0.0;
                for (auto& v : s) {
                    v = unif(gen);
                    norm += v * v;
                }
            } while (norm == 0.0);
            norm = std::sqrt(norm);
            for (auto& v : s) v /= norm;
        }
        std::vector<const std::vector<double>*> centers;
        bool ok = true;
        for (const auto& s : samples) {
            bool covered = false;
            for (const auto* c : centers)
                if (detail::dist2(s, *c) < eps2) { covered = true; break; }
            if (covered) continue;
            // nearest compatible net point, so the center choice does not
            // depend on the enumeration order of the net
            const std::vector<double>* found = nullptr;
            double best_d2 = eps2;
            if (centers.size() < p) {
                for (const auto& cand : net) {
                    const double d2 = detail::dist2(s, cand);
                    if (d2 >= best_d2) continue;
                    bool orth = true;
                    for (const auto* c : centers)
                        if (std::abs(detail::dot(cand, *c)) >= eps) { orth = false; break; }
                    if (orth) {
                        found = &cand;
                        best_d2 = d2;
                    }
                }
            }
            if (!found) { ok = false; break; }
            centers.push_back(found);
        }
        if (ok) ++successes;
    }
    McEstimate e;
    e.estimate = static_cast<double>(successes) / static_cast<double>(trials);
    e.stderr_ = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials));
    return e;
}

} // namespace trinmf
