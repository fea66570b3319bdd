#include "lorma/gradients.hpp"

#include <algorithm>
#include <cmath>

#include "lorma/rng.hpp"

namespace lorma {

namespace {

void check_upstream_shape(const AdapterState& state, const Matrix& x,
                          const Matrix& upstream) {
    if (upstream.rows() != state.w0.rows() || upstream.cols() != x.cols()) {
        throw ShapeError("backward: upstream is " + std::to_string(upstream.rows()) +
                         "x" + std::to_string(upstream.cols()) + ", expected " +
                         std::to_string(state.w0.rows()) + "x" +
                         std::to_string(x.cols()));
    }
}

}  // namespace

GradientBundle backward(const AdapterState& state, const Matrix& x,
                        const Matrix& upstream) {
    check_upstream_shape(state, x, upstream);
    const double s = state.config.scaling();
    const Matrix& w0 = state.w0;
    const Matrix& b = state.b;
    const Matrix& a = state.a;
    const bool pre = state.config.side == MultiplySide::pre;
    const Matrix& g = upstream;

    switch (state.config.variant) {
        case AdapterVariant::lora: {
            const Matrix ax = matmul(a, x);
            const Matrix btg = matmul(b.transposed(), g);
            return {s * matmul(g, ax.transposed()),
                    s * matmul(btg, x.transposed()),
                    matmul(w0.transposed(), g) + s * matmul(a.transposed(), btg)};
        }
        case AdapterVariant::lorma_naive: {
            if (pre) {
                const Matrix u = matmul(w0, x);
                const Matrix au = matmul(a, u);
                const Matrix btg = matmul(b.transposed(), g);
                return {matmul(g, au.transposed()), matmul(btg, u.transposed()),
                        matmul(w0.transposed(), matmul(a.transposed(), btg))};
            }
            const Matrix v = matmul(w0.transposed(), g);
            const Matrix ax = matmul(a, x);
            const Matrix btv = matmul(b.transposed(), v);
            return {matmul(v, ax.transposed()), matmul(btv, x.transposed()),
                    matmul(a.transposed(), btv)};
        }
        case AdapterVariant::lorma_plus: {
            if (pre) {
                const Matrix u = matmul(w0, x);
                const Matrix au = matmul(a, u);
                const Matrix btg = matmul(b.transposed(), g);
                return {s * matmul(g, au.transposed()),
                        s * matmul(btg, u.transposed()),
                        matmul(w0.transposed(),
                               g + s * matmul(a.transposed(), btg))};
            }
            const Matrix v = matmul(w0.transposed(), g);
            const Matrix ax = matmul(a, x);
            const Matrix btv = matmul(b.transposed(), v);
            return {s * matmul(v, ax.transposed()), s * matmul(btv, x.transposed()),
                    v + s * matmul(a.transposed(), btv)};
        }
        case AdapterVariant::lorma_pi: {
            const Matrix multiplier = inflate_pi(s * matmul(b, a));
            if (pre) {
                const Matrix u = matmul(w0, x);
                // dL/dP = g u^T, then the rotation's adjoint maps it back to
                // the coordinates of the product BA.
                const Matrix d_product = deflate_pi(matmul(g, u.transposed()));
                return {s * matmul(d_product, a.transposed()),
                        s * matmul(b.transposed(), d_product),
                        matmul(w0.transposed(), matmul(multiplier.transposed(), g))};
            }
            const Matrix v = matmul(w0.transposed(), g);
            const Matrix d_product = deflate_pi(matmul(v, x.transposed()));
            return {s * matmul(d_product, a.transposed()),
                    s * matmul(b.transposed(), d_product),
                    matmul(multiplier.transposed(), v)};
        }
    }
    throw ConfigError("backward: unknown variant");
}

GradCheckReport compare_to_finite_differences(const AdapterState& state,
                                              const Matrix& x, const Matrix& y,
                                              const GradientBundle& bundle) {
    AdapterState probe = state;

    const auto loss = [&]() {
        const Matrix diff = forward(probe, x) - y;
        return 0.5 * frobenius_inner(diff, diff);
    };

    GradCheckReport report;
    const auto scan = [&](Matrix& param, const Matrix& analytic, char tag) {
        for (std::size_t i = 0; i < param.rows(); ++i) {
            for (std::size_t j = 0; j < param.cols(); ++j) {
                const double saved = param(i, j);
                param(i, j) = saved + kGradCheckStep;
                const double up = loss();
                param(i, j) = saved - kGradCheckStep;
                const double down = loss();
                param(i, j) = saved;
                const double numeric = (up - down) / (2.0 * kGradCheckStep);
                const double an = analytic(i, j);
                const double denom =
                    std::max({std::abs(an), std::abs(numeric), kGradCheckFloor});
                const double rel = std::abs(an - numeric) / denom;
                if (rel > report.max_rel_error) {
                    report.max_rel_error = rel;
                    report.worst_param = tag;
                    report.worst_row = i;
                    report.worst_col = j;
                }
            }
        }
    };
    scan(probe.b, bundle.d_b, 'b');
    scan(probe.a, bundle.d_a, 'a');
    return report;
}

GradCheckReport grad_check(const AdapterState& state, const Matrix& x,
                           std::uint64_t probe_seed) {
    if (state.w0.rows() > 64 || state.w0.cols() > 64) {
        throw ConfigError("grad_check: dimensions capped at 64");
    }
    Rng rng(probe_seed);
    Matrix y(state.w0.rows(), x.cols());
    for (auto& v : y.data()) v = rng.gaussian();

    const Matrix residual = forward(state, x) - y;
    const GradientBundle bundle = backward(state, x, residual);
    return compare_to_finite_differences(state, x, y, bundle);
}

}  // namespace lorma
