#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "trinmf/rank_bounds.hpp"

using namespace trinmf;

namespace {

RankParams params(std::size_t n, std::size_t m, double delta, double k = 2.0, double c3 = 1.0,
                  double eta = 0.1) {
    RankParams p;
    p.N = n;
    p.M = m;
    p.delta = delta;
    p.K = k;
    p.C3 = c3;
    p.eta = eta;
    return p;
}

/// Exact integer power for the telescoping identity.
std::uint64_t ipow(std::uint64_t base, unsigned exp) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < exp; ++i) r *= base;
    return r;
}

} // namespace

TEST_CASE("mu_coeff formula") {
    CHECK(mu_coeff(4, 4, 2) == 16);
    CHECK(mu_coeff(2, 3, 1) == 4);
    SUBCASE("finite difference identity mu(l) - mu(l-1) = l - 1") {
        std::mt19937_64 gen(3);
        std::uniform_int_distribution<std::size_t> dim(1, 500), ll(2, 60);
        for (int t = 0; t < 100; ++t) {
            const std::size_t n = dim(gen), m = dim(gen), l = ll(gen);
            CHECK(mu_coeff(n, m, l) - mu_coeff(n, m, l - 1) ==
                  static_cast<std::int64_t>(l) - 1);
        }
    }
    SUBCASE("strictly increasing in l from l = 2") {
        for (std::size_t l = 2; l < 30; ++l)
            CHECK(mu_coeff(7, 9, l) > mu_coeff(7, 9, l - 1));
    }
}

TEST_CASE("epsilon_of_delta") {
    CHECK(epsilon_of_delta(params(1, 1, 1.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(epsilon_of_delta(params(100, 100, 0.01)) ==
          doctest::Approx(0.01 / 30000.0).epsilon(1e-15));
    SUBCASE("linear in delta") {
        const double e1 = epsilon_of_delta(params(37, 53, 0.004));
        const double e2 = epsilon_of_delta(params(37, 53, 0.008));
        CHECK(e2 == doctest::Approx(2.0 * e1).epsilon(1e-13));
    }
}

TEST_CASE("p_opt formula and regime") {
    SUBCASE("constructed round case: C3 eps = e^-4, max = 16 gives p = 2") {
        // delta chosen >= 1 so the two denominator forms coincide:
        // eps = delta / (2*256 + 256) = e^-4  =>  delta = 768 e^-4
        const double delta = 768.0 * std::exp(-4.0);
        const RankParams p = params(16, 16, delta);
        CHECK(p_opt(p) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(p.C3 * epsilon_of_delta(p) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
    }
    SUBCASE("sandwich holds for large square matrices") {
        for (std::size_t n : {std::size_t{10000}, std::size_t{1000000}}) {
            const double p = p_opt(params(n, n, 0.01));
            const double fn = static_cast<double>(n);
            CHECK(p >= std::sqrt(fn / (2.0 * std::log(fn))));
            CHECK(p <= std::sqrt(fn / std::log(fn)));
        }
    }
    SUBCASE("asymptotic agreement within 10% at N = 1e6") {
        const double p = p_opt(params(1000000, 1000000, 0.01));
        const double asym = std::sqrt(1e6 / (2.0 * std::log(1e6)));
        CHECK(std::abs(p - asym) / asym <= 0.10);
    }
    SUBCASE("pinned value for N = M = 256, delta = 0.01, K = 2, C3 = 1") {
        // independent high-precision evaluation: sqrt(256 / 7.583796991639...)
        CHECK(p_opt(params(256, 256, 0.01)) == doctest::Approx(5.810006699333421).epsilon(1e-12));
    }
    SUBCASE("regime violations throw") {
        CHECK_THROWS_AS(p_opt(params(2, 2, 1e9)), RegimeError);     // C3 eps >= 1
        CHECK_THROWS_AS(p_opt(params(2, 2, 1e-9)), RegimeError);    // denominator <= 0
    }
}

TEST_CASE("log_term stability and identities") {
    SUBCASE("l = 1 collapses to ln(min) + mu * log_c3eps") {
        const double lc = -3.7;
        CHECK(log_term(1, 5, 9, lc) ==
              doctest::Approx(std::log(5.0) + static_cast<double>(mu_coeff(5, 9, 1)) * lc)
                  .epsilon(1e-14));
    }
    SUBCASE("matches direct evaluation for small values") {
        // a_2(N=M=3, C3 eps = 0.1) = (2^3 - 1) * 2 * 3 * 0.1^9 = 4.2e-8
        const double direct = std::log(4.2e-8);
        CHECK(log_term(2, 3, 3, std::log(0.1)) == doctest::Approx(direct).epsilon(1e-10));
    }
    SUBCASE("telescoping, exact integer route") {
        for (unsigned lam = 1; lam <= 12; ++lam)
            for (std::uint64_t p = 1; p <= 6; ++p) {
                std::uint64_t sum = 0;
                for (std::uint64_t l = 1; l <= p; ++l) sum += ipow(l, lam) - ipow(l - 1, lam);
                CHECK(sum == ipow(p, lam));
            }
    }
    SUBCASE("telescoping, log-space route") {
        // strip the l! , min(N,M) and (C3 eps)^mu factors: sum of exp of the
        // power-difference part alone telescopes to p^Lam
        for (std::size_t lam : {3u, 7u, 10u})
            for (std::size_t p = 1; p <= 5; ++p) {
                double sum = 0.0;
                for (std::size_t l = 1; l <= p; ++l) {
                    const double lt = log_term(l, lam, 1, 0.0) -
                                      std::lgamma(static_cast<double>(l) + 1.0);
                    sum += std::exp(lt);  // min(N,M) = 1 and log_c3eps = 0 kill the rest
                }
                CHECK(sum == doctest::Approx(std::pow(static_cast<double>(p),
                                                      static_cast<double>(lam)))
                                 .epsilon(1e-9));
            }
    }
}

TEST_CASE("term_ratio") {
    SUBCASE("matches the closed-form ratio for small values") {
        // a_{l+1}/a_l = ((l+1)^Lam - l^Lam)/(l^Lam - (l-1)^Lam) (l+1) (C3 eps)^l
        const std::size_t n = 10, m = 10;
        const double c3e = 0.1;
        for (std::size_t l = 1; l <= 4; ++l) {
            const double lam = 10.0;
            const double num = std::pow(l + 1.0, lam) - std::pow(static_cast<double>(l), lam);
            const double den =
                std::pow(static_cast<double>(l), lam) - std::pow(l - 1.0, lam);
            const double closed = num / den * (l + 1.0) * std::pow(c3e, static_cast<double>(l));
            CHECK(term_ratio(l, n, m, std::log(c3e)) ==
                  doctest::Approx(closed).epsilon(1e-8));
        }
    }
    SUBCASE("ratio decays for large l") {
        const double lc = std::log(0.1);
        CHECK(term_ratio(50, 10, 10, lc) < term_ratio(5, 10, 10, lc));
    }
    SUBCASE("ratio at l = 1 is finite") {
        CHECK(std::isfinite(term_ratio(1, 10, 10, std::log(0.1))));
    }
}

TEST_CASE("p_hat threshold") {
    const RankParams p64 = params(64, 64, 0.01);
    const double lc64 = log_c3_epsilon(p64);

    SUBCASE("agrees with an exhaustive scan for N = M = 8") {
        const RankParams p8 = params(8, 8, 0.01);
        const double lc = log_c3_epsilon(p8);
        const std::size_t lmax = 40;
        const std::size_t got = p_hat(8, 8, 0.1, lc, lmax);
        std::size_t expect = 1;
        for (std::size_t l = 1; l <= lmax; ++l)
            if (term_ratio(l, 8, 8, lc) > 0.1) expect = l + 1;
        CHECK(got == expect);
    }
    SUBCASE("monotone in eta") {
        CHECK(p_hat(64, 64, 0.9, lc64, 60) <= p_hat(64, 64, 0.01, lc64, 60));
    }
    SUBCASE("within 4x of p_opt for N = M in {64, 256, 1024}") {
        for (std::size_t n : {std::size_t{64}, std::size_t{256}, std::size_t{1024}}) {
            const RankParams pr = params(n, n, 0.01);
            const double phat = static_cast<double>(p_hat(n, n, 0.1, log_c3_epsilon(pr), 80));
            const double popt = p_opt(pr);
            CHECK(phat <= 4.0 * popt);
            CHECK(popt <= 4.0 * phat);
        }
    }
    SUBCASE("unreachable threshold throws") {
        CHECK_THROWS_AS(p_hat(64, 64, 0.1, lc64, 1), std::runtime_error);
    }
}

TEST_CASE("bound ordering: full sum dominates the single-term bound") {
    for (std::size_t n : {std::size_t{16}, std::size_t{64}, std::size_t{128}})
        for (std::size_t p : {std::size_t{2}, std::size_t{4}, std::size_t{8}}) {
            const double lc = log_c3_epsilon(params(n, n, 0.01));
            CHECK(log_bound_sum(p, n, n, lc) >= log_simple_bound(p, n, n, lc) - 1e-9);
        }
}

TEST_CASE("ratio cubic zero and stationary reference") {
    SUBCASE("root bracketed for N0 = 2, c = 0.1") {
        const auto root = ratio_cubic_zero(2.0, -0.1);
        REQUIRE(root.has_value());
        CHECK(*root > 3.0);
        CHECK(*root < 4.0);
        const double c = 0.1, p = *root;
        const double f = -c * p * p * p + p * p + (c - 2.0 * 2.0 + 2.0) * p - 1.0;
        CHECK(std::abs(f) < 1e-8);
    }
    SUBCASE("no positive root reports empty") {
        CHECK_FALSE(ratio_cubic_zero(100.0, -5.0).has_value());
    }
    SUBCASE("stationary reference curve formula") {
        const double got = stationary_p_reference(100, 100, -4.0);
        CHECK(got == doctest::Approx(0.75 + std::sqrt(1.0 / 16.0 + 100.0 / 4.0)).epsilon(1e-14));
    }
}

TEST_CASE("mc_cover_estimate sandbox") {
    SUBCASE("degenerate eps covers everything") {
        const auto e = mc_cover_estimate(2, 4, 1, 2.0, 50, 1);
        CHECK(e.estimate == 1.0);
        CHECK(e.stderr_ == 0.0);
    }
    SUBCASE("estimates live in [0,1] with binomial stderr") {
        const auto e = mc_cover_estimate(2, 4, 2, 0.8, 200, 2);
        CHECK(e.estimate >= 0.0);
        CHECK(e.estimate <= 1.0);
        CHECK(e.stderr_ ==
              doctest::Approx(std::sqrt(e.estimate * (1 - e.estimate) / 200.0)).epsilon(1e-12));
    }
    SUBCASE("nondecreasing in p within two standard errors") {
        double prev = -1.0, prev_se = 0.0;
        for (std::size_t p = 1; p <= 3; ++p) {
            const auto e = mc_cover_estimate(2, 4, p, 0.8, 400, 3);
            if (prev >= 0.0) CHECK(e.estimate >= prev - 2.0 * (prev_se + e.stderr_));
            prev = e.estimate;
            prev_se = e.stderr_;
        }
    }
    SUBCASE("nondecreasing in eps within two standard errors") {
        double prev = -1.0, prev_se = 0.0;
        for (double eps : {0.5, 0.8, 1.1}) {
            const auto e = mc_cover_estimate(2, 4, 2, eps, 400, 4);
            if (prev >= 0.0) CHECK(e.estimate >= prev - 2.0 * (prev_se + e.stderr_));
            prev = e.estimate;
            prev_se = e.stderr_;
        }
    }
    SUBCASE("p beyond the net size is infeasible") {
        CHECK_THROWS_AS(mc_cover_estimate(2, 4, 100000, 0.5, 10, 5), std::invalid_argument);
    }
    SUBCASE("deterministic under a fixed seed") {
        const auto a = mc_cover_estimate(2, 4, 2, 0.8, 100, 6);
        const auto b = mc_cover_estimate(2, 4, 2, 0.8, 100, 6);
        CHECK(a.estimate == b.estimate);
    }
}
