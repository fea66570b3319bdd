#include <doctest.h>

#include "lorma/gradients.hpp"
#include "lorma/linalg.hpp"
#include "oracles.hpp"

using namespace lorma;

namespace {

AdapterState make_state(Rng& rng, AdapterVariant variant, MultiplySide side,
                        std::size_t d, std::size_t k, int r) {
    const Matrix w0 = oracles::gaussian_matrix(rng, d, k);
    AdapterState state = init_adapter(
        w0, AdapterConfig{variant, side, r, static_cast<double>(r), rng.fork_seed()});
    for (auto& v : state.b.data()) v += 0.1 * rng.gaussian();
    for (auto& v : state.a.data()) v += 0.1 * rng.gaussian();
    return state;
}

/// Finite-difference check of d_x for the probe loss 0.5 |forward - y|^2.
double fd_input_gradient_error(const AdapterState& state, Matrix x, const Matrix& y) {
    const Matrix residual = forward(state, x) - y;
    const GradientBundle bundle = backward(state, x, residual);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double saved = x(i, j);
            x(i, j) = saved + kGradCheckStep;
            Matrix diff = forward(state, x) - y;
            const double up = 0.5 * frobenius_inner(diff, diff);
            x(i, j) = saved - kGradCheckStep;
            diff = forward(state, x) - y;
            const double down = 0.5 * frobenius_inner(diff, diff);
            x(i, j) = saved;
            const double numeric = (up - down) / (2.0 * kGradCheckStep);
            const double an = bundle.d_x(i, j);
            const double denom =
                std::max({std::abs(an), std::abs(numeric), kGradCheckFloor});
            worst = std::max(worst, std::abs(an - numeric) / denom);
        }
    }
    return worst;
}

const AdapterVariant kAllVariants[] = {AdapterVariant::lora,
                                       AdapterVariant::lorma_naive,
                                       AdapterVariant::lorma_pi,
                                       AdapterVariant::lorma_plus};

}  // namespace

TEST_CASE("backward: zero upstream gives zero gradients") {
    Rng rng(71);
    for (const auto variant : kAllVariants) {
        const AdapterState state =
            make_state(rng, variant, MultiplySide::pre, 10, 10, 2);
        const Matrix x = oracles::gaussian_matrix(rng, 10, 3);
        const GradientBundle bundle = backward(state, x, Matrix::zeros(10, 3));
        CHECK(bundle.d_b.max_abs() == 0.0);
        CHECK(bundle.d_a.max_abs() == 0.0);
        CHECK(bundle.d_x.max_abs() == 0.0);
    }
}

TEST_CASE("backward: factor gradients match finite differences, all variants") {
    Rng rng(72);
    for (const auto variant : kAllVariants) {
        for (const auto side : {MultiplySide::pre, MultiplySide::post}) {
            if (variant == AdapterVariant::lora && side == MultiplySide::post) continue;
            for (int seed = 0; seed < 10; ++seed) {
                const AdapterState state = make_state(rng, variant, side, 12, 12, 2);
                const Matrix x = oracles::gaussian_matrix(rng, 12, 3);
                const Matrix y = oracles::gaussian_matrix(rng, 12, 3);
                const Matrix residual = forward(state, x) - y;
                const GradientBundle bundle = backward(state, x, residual);
                const GradCheckReport report =
                    compare_to_finite_differences(state, x, y, bundle);
                CAPTURE(to_string(variant));
                CAPTURE(to_string(side));
                CHECK(report.max_rel_error < 1e-4);
            }
        }
    }
}

TEST_CASE("backward: rectangular base weights, both tall and wide") {
    Rng rng(82);
    for (const auto variant : kAllVariants) {
        for (const auto side : {MultiplySide::pre, MultiplySide::post}) {
            if (variant == AdapterVariant::lora && side == MultiplySide::post) continue;
            for (const auto [d, k] : {std::pair<std::size_t, std::size_t>{12, 8},
                                      {8, 12}}) {
                const AdapterState state = make_state(rng, variant, side, d, k, 2);
                const Matrix x = oracles::gaussian_matrix(rng, k, 3);
                const Matrix y = oracles::gaussian_matrix(rng, d, 3);
                const Matrix residual = forward(state, x) - y;
                const GradientBundle bundle = backward(state, x, residual);
                const GradCheckReport report =
                    compare_to_finite_differences(state, x, y, bundle);
                CAPTURE(to_string(variant));
                CAPTURE(to_string(side));
                CAPTURE(d);
                CAPTURE(k);
                CHECK(report.max_rel_error < 1e-4);
                CHECK(fd_input_gradient_error(state, x, y) < 1e-4);
            }
        }
    }
}

TEST_CASE("backward: input gradient matches finite differences") {
    Rng rng(73);
    for (const auto variant : kAllVariants) {
        const AdapterState state = make_state(rng, variant, MultiplySide::pre, 12, 12, 2);
        const Matrix x = oracles::gaussian_matrix(rng, 12, 3);
        const Matrix y = oracles::gaussian_matrix(rng, 12, 3);
        CAPTURE(to_string(variant));
        CHECK(fd_input_gradient_error(state, x, y) < 1e-4);
    }
}

TEST_CASE("backward: pi-path adjoint identity") {
    Rng rng(74);
    for (const auto side : {MultiplySide::pre, MultiplySide::post}) {
        for (int trial = 0; trial < 10; ++trial) {
            const AdapterState state =
                make_state(rng, AdapterVariant::lorma_pi, side, 10, 10, 3);
            const Matrix x = oracles::gaussian_matrix(rng, 10, 4);
            const double s = state.config.scaling();

            // Random parameter direction v = (v_b, v_a) and output probe w.
            const Matrix vb =
                oracles::gaussian_matrix(rng, state.b.rows(), state.b.cols());
            const Matrix va =
                oracles::gaussian_matrix(rng, state.a.rows(), state.a.cols());
            const Matrix w = oracles::gaussian_matrix(rng, 10, 4);

            // Exact directional derivative of the bilinear forward map.
            const Matrix dP =
                inflate_pi(s * (matmul(vb, state.a) + matmul(state.b, va)));
            const Matrix jv = side == MultiplySide::pre
                                  ? matmul(dP, matmul(state.w0, x))
                                  : matmul(state.w0, matmul(dP, x));

            const GradientBundle bundle = backward(state, x, w);
            const double lhs = frobenius_inner(jv, w);
            const double rhs = frobenius_inner(vb, bundle.d_b) +
                               frobenius_inner(va, bundle.d_a);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("backward: gradient of the rearrangement is the rearranged gradient") {
    Rng rng(75);
    // For the pi path the parameter gradient must equal the plain product-rule
    // gradient computed on the deflated upstream; exact, by construction.
    const AdapterState state =
        make_state(rng, AdapterVariant::lorma_pi, MultiplySide::pre, 8, 8, 2);
    const Matrix x = oracles::gaussian_matrix(rng, 8, 2);
    const Matrix g = oracles::gaussian_matrix(rng, 8, 2);
    const GradientBundle bundle = backward(state, x, g);
    const Matrix u = matmul(state.w0, x);
    const double s = state.config.scaling();
    const Matrix d_product = deflate_pi(matmul(g, u.transposed()));
    CHECK(bundle.d_b == s * matmul(d_product, state.a.transposed()));
    CHECK(bundle.d_a == s * matmul(state.b.transposed(), d_product));
}

TEST_CASE("backward: linear in upstream") {
    Rng rng(76);
    const AdapterState state =
        make_state(rng, AdapterVariant::lorma_plus, MultiplySide::pre, 10, 10, 2);
    const Matrix x = oracles::gaussian_matrix(rng, 10, 3);
    const Matrix g1 = oracles::gaussian_matrix(rng, 10, 3);
    const Matrix g2 = oracles::gaussian_matrix(rng, 10, 3);
    const GradientBundle b1 = backward(state, x, g1);
    const GradientBundle b2 = backward(state, x, g2);
    const GradientBundle sum = backward(state, x, g1 + g2);
    CHECK(max_abs_diff(sum.d_b, b1.d_b + b2.d_b) < 1e-12);
    CHECK(max_abs_diff(sum.d_a, b1.d_a + b2.d_a) < 1e-12);
    CHECK(max_abs_diff(sum.d_x, b1.d_x + b2.d_x) < 1e-12);
}

TEST_CASE("backward: upstream shape mismatch is rejected") {
    Rng rng(77);
    const AdapterState state =
        make_state(rng, AdapterVariant::lora, MultiplySide::pre, 8, 8, 2);
    const Matrix x = oracles::gaussian_matrix(rng, 8, 3);
    CHECK_THROWS_AS((void)backward(state, x, Matrix::zeros(8, 4)), ShapeError);
}

TEST_CASE("grad_check: clean pass for plus and lora at d=16") {
    Rng rng(78);
    for (const auto variant : {AdapterVariant::lorma_plus, AdapterVariant::lora}) {
        const AdapterState state = make_state(rng, variant, MultiplySide::pre, 16, 16, 2);
        const Matrix x = oracles::gaussian_matrix(rng, 16, 3);
        const GradCheckReport report = grad_check(state, x, 99);
        CHECK(report.max_rel_error < 1e-4);
    }
}

TEST_CASE("grad_check: a corrupted gradient entry is pinpointed") {
    Rng rng(79);
    // Keep every true gradient entry well below 10 so a +0.1 corruption is
    // relatively large at its coordinate.
    const Matrix w0 = 0.25 * oracles::gaussian_matrix(rng, 10, 10);
    AdapterState state = init_adapter(
        w0, AdapterConfig{AdapterVariant::lorma_plus, MultiplySide::pre, 2, 2.0, 1});
    for (auto& v : state.b.data()) v += 0.05 * rng.gaussian();
    for (auto& v : state.a.data()) v += 0.05 * rng.gaussian();
    const Matrix x = 0.5 * oracles::gaussian_matrix(rng, 10, 3);
    const Matrix y = 0.5 * oracles::gaussian_matrix(rng, 10, 3);
    const Matrix residual = forward(state, x) - y;
    GradientBundle bundle = backward(state, x, residual);
    bundle.d_b(1, 1) += 0.1;
    const GradCheckReport report = compare_to_finite_differences(state, x, y, bundle);
    CHECK(report.max_rel_error > 1e-2);
    CHECK(report.worst_param == 'b');
    CHECK(report.worst_row == 1);
    CHECK(report.worst_col == 1);
}

TEST_CASE("grad_check: dimension guard") {
    Rng rng(80);
    const AdapterState state =
        make_state(rng, AdapterVariant::lora, MultiplySide::pre, 65, 65, 2);
    const Matrix x = oracles::gaussian_matrix(rng, 65, 2);
    CHECK_THROWS_AS((void)grad_check(state, x, 1), ConfigError);
}
