#include <doctest.h>

#include "lorma/theory.hpp"
#include "oracles.hpp"

using namespace lorma;

namespace {

Matrix stacked_identity_top(std::size_t n, std::size_t m) {
    Matrix out(n, m);
    for (std::size_t i = 0; i < m; ++i) out(i, i) = 1.0;
    return out;
}

Matrix stacked_identity_bottom(std::size_t n, std::size_t m) {
    Matrix out(n, m);
    for (std::size_t i = 0; i < m; ++i) out(n - m + i, i) = 1.0;
    return out;
}

}  // namespace

TEST_CASE("construct_premultiplier: m0 onto itself and scaled copies") {
    Rng rng(101);
    const Matrix m0 = oracles::gaussian_matrix(rng, 8, 3);
    const auto self = construct_premultiplier(m0, m0);
    CHECK(self.feasible);
    CHECK(self.residual < 1e-10);

    const auto doubled = construct_premultiplier(m0, 2.0 * m0);
    CHECK(doubled.feasible);
    CHECK(max_abs_diff(matmul(doubled.multiplier, m0), 2.0 * m0) < 1e-10);
}

TEST_CASE("construct_premultiplier: random targets are always reachable") {
    Rng rng(102);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix m0 = oracles::gaussian_matrix(rng, 8, 3);
        const Matrix target = oracles::gaussian_matrix(rng, 8, 3);
        const auto cert = construct_premultiplier(m0, target);
        CHECK(cert.feasible);
        CHECK(cert.residual < 1e-8);
    }
}

TEST_CASE("construct_premultiplier: rank-deficient base violates the hypothesis") {
    Rng rng(103);
    const Matrix deficient = oracles::random_low_rank(rng, 8, 3, 2);
    const Matrix target = oracles::gaussian_matrix(rng, 8, 3);
    CHECK_THROWS_AS((void)construct_premultiplier(deficient, target), RankError);
}

TEST_CASE("best_postmultiplier: the [I;0] -> [0;I] counterexample") {
    for (const std::size_t m : {1u, 2u, 4u, 8u}) {
        const std::size_t n = 2 * m;
        const auto cert = best_postmultiplier(stacked_identity_top(n, m),
                                              stacked_identity_bottom(n, m));
        CHECK(cert.residual ==
              doctest::Approx(std::sqrt(static_cast<double>(m))).epsilon(1e-10));
        CHECK_FALSE(cert.feasible);
    }
}

TEST_CASE("best_postmultiplier: reachable targets and the normal-equations oracle") {
    Rng rng(104);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m0 = oracles::gaussian_matrix(rng, 10, 4);
        const Matrix reachable = matmul(m0, oracles::gaussian_matrix(rng, 4, 4));
        const auto cert = best_postmultiplier(m0, reachable);
        CHECK(cert.feasible);
        CHECK(cert.residual < 1e-8);

        const Matrix target = oracles::gaussian_matrix(rng, 10, 4);
        const auto best = best_postmultiplier(m0, target);
        const Matrix oracle = oracles::normal_equations_lstsq(m0, target);
        CHECK(max_abs_diff(best.multiplier, oracle) < 1e-8);
    }
}

TEST_CASE("square_both_sides: identity target and random invertible pairs") {
    Rng rng(105);
    const Matrix m0 = oracles::gaussian_matrix(rng, 6, 6);
    const auto [pre, post] = square_both_sides(m0, Matrix::identity(6));
    // Pre-multiplier for target I is exactly the inverse.
    CHECK(max_abs_diff(matmul(pre.multiplier, m0), Matrix::identity(6)) < 1e-9);
    CHECK(pre.feasible);
    CHECK(post.feasible);

    for (int trial = 0; trial < 20; ++trial) {
        const Matrix base = oracles::gaussian_matrix(rng, 8, 8);
        const Matrix target = oracles::gaussian_matrix(rng, 8, 8);
        const auto [p, q] = square_both_sides(base, target);
        CHECK(p.residual < 1e-8);
        CHECK(q.residual < 1e-8);
    }
}

TEST_CASE("square_both_sides: diagonal base with a permutation target") {
    const Matrix d = Matrix::diagonal({1, 2, 3, 4});
    Matrix perm(4, 4);  // cyclic shift permutation
    for (std::size_t i = 0; i < 4; ++i) perm(i, (i + 1) % 4) = 1.0;
    const auto [pre, post] = square_both_sides(d, perm);

    // Hand oracle: pre = P D^-1, post = D^-1 P.
    Matrix d_inv = Matrix::diagonal({1.0, 0.5, 1.0 / 3.0, 0.25});
    CHECK(max_abs_diff(pre.multiplier, matmul(perm, d_inv)) < 1e-10);
    CHECK(max_abs_diff(post.multiplier, matmul(d_inv, perm)) < 1e-10);
}

TEST_CASE("square_both_sides: singular base is a rank error") {
    Rng rng(106);
    const Matrix singular = oracles::random_low_rank(rng, 6, 6, 3);
    CHECK_THROWS_AS((void)square_both_sides(singular, Matrix::identity(6)), RankError);
}

TEST_CASE("theory suite: all claims pass deterministically") {
    const auto first = run_theory_suite(2024);
    const auto second = run_theory_suite(2024);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].pass);
        CHECK(first[i].name == second[i].name);
        CHECK(first[i].detail == second[i].detail);
    }
}
