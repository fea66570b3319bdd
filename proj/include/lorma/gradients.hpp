#pragma once

#include <cstddef>

#include "lorma/adapter.hpp"
#include "lorma/matrix.hpp"

namespace lorma {

/// Gradients of a scalar loss with respect to the trainable factors and the
/// input. There is deliberately no w0 slot: the base weight is frozen.
struct GradientBundle {
    Matrix d_b;
    Matrix d_a;
    Matrix d_x;
};

/// Closed-form reverse pass for forward(state, x) given upstream = dL/dh.
/// The pi variants route upstream through deflate_pi, the exact adjoint of
/// the row rotation, before the product rule distributes to B and A.
GradientBundle backward(const AdapterState& state, const Matrix& x,
                        const Matrix& upstream);

struct GradCheckReport {
    double max_rel_error = 0.0;
    char worst_param = 'b';  // 'b' or 'a'
    std::size_t worst_row = 0;
    std::size_t worst_col = 0;
};

/// Central-difference step and the guard floor of the relative-error
/// denominator max(|analytic|, |numeric|, kGradCheckFloor).
inline constexpr double kGradCheckStep = 1e-4;
inline constexpr double kGradCheckFloor = 1e-8;

/// Compare a gradient bundle against central finite differences of the
/// quadratic probe loss L = 0.5 * |forward(state, x) - y|_F^2, perturbing
/// every entry of b and a.
GradCheckReport compare_to_finite_differences(const AdapterState& state,
                                              const Matrix& x, const Matrix& y,
                                              const GradientBundle& bundle);

/// Full check: computes the analytic bundle for a random probe target drawn
/// from `probe_seed` and compares it against finite differences. Dimensions
/// are capped at 64 to bound the cost.
GradCheckReport grad_check(const AdapterState& state, const Matrix& x,
                           std::uint64_t probe_seed);

}  // namespace lorma
