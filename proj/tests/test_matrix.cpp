#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "test_support.hpp"
#include "trinmf/matrix.hpp"

using namespace trinmf;

TEST_CASE("frob2_sq basics") {
    CHECK(frob2_sq(Matrix(3, 3, 0.0)) == 0.0);
    CHECK(frob2_sq(Matrix{{3, 4}}) == doctest::Approx(25.0).epsilon(1e-15));

    const Matrix x = random_uniform(5, 7, -2.0, 2.0, 42);
    CHECK(frob2_sq(x) == doctest::Approx(testsup::frob2_oracle(x)).epsilon(1e-12));
    CHECK(frob2_sq(x) >= 0.0);
}

TEST_CASE("l1_norm basics") {
    CHECK(l1_norm(Matrix{{1, -2}, {3, 0}}) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(l1_norm(Matrix(2, 2, 0.0)) == 0.0);
    const Matrix x = random_uniform(4, 4, -5.0, 5.0, 11);
    CHECK(l1_norm(x) == doctest::Approx(testsup::l1_oracle(x)).epsilon(1e-12));
}

TEST_CASE("cauchy-schwarz relation between the norms") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix x = random_uniform(3, 5, -3.0, 3.0, seed);
        const double l1 = l1_norm(x);
        CHECK(frob2_sq(x) <= l1 * l1 + 1e-12);
    }
}

TEST_CASE("tensor product") {
    SUBCASE("basis vectors") {
        std::vector<double> e1{1, 0, 0}, e2{0, 1, 0};
        const Matrix t = tensor(e1, e2);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(t(i, j) == ((i == 0 && j == 1) ? 1.0 : 0.0));
    }
    SUBCASE("direct products") {
        std::vector<double> u{1, 2}, v{3, 4};
        const Matrix t = tensor(u, v);
        CHECK(t == Matrix{{3, 4}, {6, 8}});
    }
    SUBCASE("matches m x 1 times 1 x n product") {
        const auto u = testsup::random_vector(6, -1.0, 1.0, 3);
        const auto v = testsup::random_vector(4, -1.0, 1.0, 4);
        Matrix mu(6, 1, std::vector<double>(u));
        Matrix mv(1, 4, std::vector<double>(v));
        const Matrix prod = mu * mv;
        const Matrix t = tensor(u, v);
        CHECK(frob_norm(prod - t) < 1e-12);
    }
    SUBCASE("empty input throws") {
        std::vector<double> empty, v{1.0};
        CHECK_THROWS_AS(tensor(empty, v), std::invalid_argument);
    }
    SUBCASE("rank one: 2x2 minors vanish") {
        const auto u = testsup::random_vector(5, 0.1, 1.0, 5);
        const auto v = testsup::random_vector(7, 0.1, 1.0, 6);
        const Matrix t = tensor(u, v);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 6; ++j) {
                const double minor = t(i, j) * t(i + 1, j + 1) - t(i, j + 1) * t(i + 1, j);
                CHECK(std::abs(minor) < 1e-10);
            }
    }
}

TEST_CASE("constructors reject non-finite input") {
    std::vector<double> bad{1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(Matrix(1, 2, bad), std::invalid_argument);
    std::vector<double> inf{std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(Matrix(1, 1, inf), std::invalid_argument);
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("operations are pure and deterministic") {
    const Matrix x = random_uniform(4, 4, -1.0, 1.0, 99);
    const Matrix y = random_uniform(4, 4, -1.0, 1.0, 100);
    CHECK(x * y == x * y);
    CHECK(random_uniform(4, 4, -1.0, 1.0, 99) == x);
    CHECK(frob2_sq(x) == frob2_sq(x));
}

TEST_CASE("matmul and transpose sanity") {
    const Matrix a = random_uniform(3, 4, -1.0, 1.0, 7);
    const Matrix id = Matrix::identity(4);
    CHECK(frob_norm(a * id - a) == 0.0);
    const Matrix at = transpose(a);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) CHECK(at(j, i) == a(i, j));
    CHECK_THROWS_AS(a * a, std::invalid_argument);
}

TEST_CASE("solve_dense recovers known solutions") {
    Matrix a{{4, 1}, {1, 3}};
    std::vector<double> x_true{1.0, -2.0};
    std::vector<double> b{4.0 * 1 + 1 * -2, 1.0 * 1 + 3 * -2};
    const auto x = solve_dense(a, b);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK_THROWS(solve_dense(Matrix(2, 2, 0.0), {1.0, 1.0}));
}
