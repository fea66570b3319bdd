#include <doctest.h>

#include <numbers>
#include <sstream>

#include "lorma/metrics.hpp"
#include "oracles.hpp"

using namespace lorma;

TEST_CASE("frobenius_distance: basics and the summation oracle") {
    Rng rng(91);
    const Matrix m = oracles::gaussian_matrix(rng, 5, 5);
    CHECK(frobenius_distance(m, m) == 0.0);
    CHECK(frobenius_distance(Matrix::zeros(2, 2), Matrix::identity(2)) ==
          doctest::Approx(std::sqrt(2.0)));

    const Matrix a = oracles::gaussian_matrix(rng, 7, 4);
    const Matrix b = oracles::gaussian_matrix(rng, 7, 4);
    double acc = 0.0;
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const double d = a(i, j) - b(i, j);
            acc += d * d;
        }
    CHECK(frobenius_distance(a, b) == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
    CHECK_THROWS_AS((void)frobenius_distance(a, Matrix::zeros(4, 7)), ShapeError);
}

TEST_CASE("frobenius_distance: symmetry and the triangle inequality") {
    Rng rng(92);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = oracles::gaussian_matrix(rng, 6, 6);
        const Matrix b = oracles::gaussian_matrix(rng, 6, 6);
        const Matrix c = oracles::gaussian_matrix(rng, 6, 6);
        CHECK(frobenius_distance(a, b) == frobenius_distance(b, a));
        CHECK(frobenius_distance(a, c) <=
              frobenius_distance(a, b) + frobenius_distance(b, c) + 1e-12);
    }
}

TEST_CASE("flattened_cosine: alignment extremes and scale invariance") {
    Rng rng(93);
    const Matrix m = oracles::gaussian_matrix(rng, 4, 6);
    CHECK(flattened_cosine(m, m) == doctest::Approx(1.0));
    CHECK(flattened_cosine(m, -1.0 * m) == doctest::Approx(-1.0));

    Matrix e11(2, 2), e22(2, 2);
    e11(0, 0) = 1.0;
    e22(1, 1) = 1.0;
    CHECK(flattened_cosine(e11, e22) == 0.0);

    const Matrix other = oracles::gaussian_matrix(rng, 4, 6);
    CHECK(flattened_cosine(3.7 * m, other) ==
          doctest::Approx(flattened_cosine(m, other)).epsilon(1e-12));
    CHECK_THROWS_AS((void)flattened_cosine(Matrix::zeros(2, 2), e11), ConfigError);
}

TEST_CASE("top_r_singular_ssd: diagonal example and the gram oracle") {
    CHECK(top_r_singular_ssd(Matrix::diagonal({3, 1}), Matrix::diagonal({3, 1}), 2) ==
          doctest::Approx(0.0));
    CHECK(top_r_singular_ssd(Matrix::diagonal({3, 1}), Matrix::diagonal({2, 1}), 1) ==
          doctest::Approx(1.0));

    Rng rng(94);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = oracles::gaussian_matrix(rng, 8, 8);
        const Matrix b = oracles::gaussian_matrix(rng, 8, 8);
        const auto sa = oracles::singular_values_via_gram(a);
        const auto sb = oracles::singular_values_via_gram(b);
        double expected = 0.0;
        for (int i = 0; i < 5; ++i) {
            expected += (sa[i] - sb[i]) * (sa[i] - sb[i]);
        }
        CHECK(top_r_singular_ssd(a, b, 5) ==
              doctest::Approx(expected).epsilon(1e-8));
    }
    CHECK_THROWS_AS((void)top_r_singular_ssd(Matrix::identity(3),
                                             Matrix::identity(3), 4),
                    ConfigError);
}

TEST_CASE("top_r_eigen_ssd: diagonal example and the symmetric oracle") {
    CHECK(top_r_eigen_ssd(Matrix::diagonal({4, 1}), Matrix::diagonal({2, 1}), 1) ==
          doctest::Approx(4.0));
    CHECK(top_r_eigen_ssd(Matrix::diagonal({4, 1}), Matrix::diagonal({4, 1}), 2) ==
          doctest::Approx(0.0));

    Rng rng(95);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = oracles::gaussian_matrix(rng, 6, 6);
        a += a.transposed();
        Matrix b = oracles::gaussian_matrix(rng, 6, 6);
        b += b.transposed();
        const auto ea = oracles::symmetric_jacobi_eigenvalues(a);
        const auto eb = oracles::symmetric_jacobi_eigenvalues(b);
        double expected = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double diff = std::abs(ea[i]) - std::abs(eb[i]);
            expected += diff * diff;
        }
        CHECK(top_r_eigen_ssd(a, b, 4) == doctest::Approx(expected).epsilon(1e-8));
    }
    CHECK_THROWS_AS((void)top_r_eigen_ssd(Matrix::zeros(2, 3), Matrix::zeros(2, 3), 1),
                    ShapeError);
}

TEST_CASE("principal_angle_theta1: identical, orthogonal and 45-degree spans") {
    Rng rng(96);
    const Matrix m = oracles::gaussian_matrix(rng, 6, 4);
    CHECK(principal_angle_theta1(m, m, 2) == doctest::Approx(0.0).epsilon(1e-10));

    const Matrix e1 = Matrix::from_rows({{1}, {0}});
    const Matrix e2 = Matrix::from_rows({{0}, {1}});
    CHECK(principal_angle_theta1(e1, e2, 1) ==
          doctest::Approx(std::numbers::pi / 2));

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Matrix diag45 = Matrix::from_rows({{inv_sqrt2}, {inv_sqrt2}});
    CHECK(principal_angle_theta1(e1, diag45, 1) ==
          doctest::Approx(std::numbers::pi / 4));
}

TEST_CASE("principal_angle_theta1: symmetry, scaling invariance, rank guard") {
    Rng rng(97);
    const Matrix a = oracles::gaussian_matrix(rng, 8, 3);
    const Matrix b = oracles::gaussian_matrix(rng, 8, 3);
    CHECK(principal_angle_theta1(a, b, 2) ==
          doctest::Approx(principal_angle_theta1(b, a, 2)).epsilon(1e-10));
    CHECK(principal_angle_theta1(2.5 * a, b, 2) ==
          doctest::Approx(principal_angle_theta1(a, b, 2)).epsilon(1e-10));
    const Matrix low = oracles::random_low_rank(rng, 8, 3, 1);
    CHECK_THROWS_AS((void)principal_angle_theta1(a, low, 3), RankError);
}

TEST_CASE("compare_updates: self-comparison is the fixed point") {
    Rng rng(98);
    const Matrix dw = oracles::gaussian_matrix(rng, 8, 8);
    const UpdateComparison cmp = compare_updates(dw, dw, 4);
    CHECK(cmp.vs_test.frobenius == 0.0);
    CHECK(cmp.vs_test.cosine == doctest::Approx(1.0));
    CHECK(cmp.vs_test.sv_ssd_r == doctest::Approx(0.0));
    REQUIRE(cmp.vs_test.eig_ssd_r.has_value());
    CHECK(*cmp.vs_test.eig_ssd_r == doctest::Approx(0.0));
    CHECK(cmp.vs_test.theta1 == doctest::Approx(0.0).epsilon(1e-10));
    // The random baseline is norm-matched.
    CHECK(norm_matched_random(dw, 1).frobenius_norm() ==
          doctest::Approx(dw.frobenius_norm()));
}

TEST_CASE("compare_updates: non-square inputs skip the eigen metric") {
    Rng rng(99);
    const Matrix a = oracles::gaussian_matrix(rng, 6, 4);
    const Matrix b = oracles::gaussian_matrix(rng, 6, 4);
    const UpdateComparison cmp = compare_updates(a, b, 3);
    CHECK_FALSE(cmp.vs_test.eig_ssd_r.has_value());
    std::ostringstream csv;
    write_comparison_csv(cmp, csv);
    CHECK(csv.str().find("eig_ssd_r,NA,NA") != std::string::npos);
}

TEST_CASE("compare_updates: byte-identical csv on rerun") {
    Rng rng(100);
    const Matrix a = oracles::gaussian_matrix(rng, 8, 8);
    const Matrix b = oracles::gaussian_matrix(rng, 8, 8);
    std::ostringstream first, second;
    write_comparison_csv(compare_updates(a, b, 4), first);
    write_comparison_csv(compare_updates(a, b, 4), second);
    CHECK(first.str() == second.str());
    CHECK(first.str().rfind("metric,ref_vs_test,ref_vs_random\n", 0) == 0);
}
