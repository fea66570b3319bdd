#include "lorma/inflation.hpp"

#include <cmath>
#include <string>

namespace lorma {

namespace {

void require_square(const Matrix& m, const char* op) {
    if (m.rows() != m.cols()) {
        throw ShapeError(std::string(op) + ": matrix must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

Matrix rotate_rows(const Matrix& m, bool right) {
    const std::size_t d = m.rows();
    Matrix out(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t shift = i % d;
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t dst = right ? (j + shift) % d : (j + d - shift) % d;
            out(i, dst) = m(i, j);
        }
    }
    return out;
}

}  // namespace

const char* to_string(InflationKind kind) {
    switch (kind) {
        case InflationKind::none: return "none";
        case InflationKind::permutation: return "permutation";
        case InflationKind::additive: return "additive";
    }
    return "?";
}

Matrix inflate_pi(const Matrix& m) {
    require_square(m, "inflate_pi");
    return rotate_rows(m, /*right=*/true);
}

Matrix deflate_pi(const Matrix& m) {
    require_square(m, "deflate_pi");
    return rotate_rows(m, /*right=*/false);
}

Matrix inflate_plus(const Matrix& ba, double scaling) {
    require_square(ba, "inflate_plus");
    if (!std::isfinite(scaling)) {
        throw ConfigError("inflate_plus: scaling must be finite");
    }
    Matrix out = scaling * ba;
    for (std::size_t i = 0; i < out.rows(); ++i) out(i, i) += 1.0;
    return out;
}

}  // namespace lorma
