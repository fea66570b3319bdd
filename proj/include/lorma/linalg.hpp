#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "lorma/matrix.hpp"

namespace lorma {

/// Thin SVD: m = u * diag(sigma) * vt with p = min(rows, cols) singular
/// values. u has orthonormal columns (rows x p), vt orthonormal rows
/// (p x cols), sigma non-increasing and non-negative.
struct SvdResult {
    Matrix u;
    std::vector<double> sigma;
    Matrix vt;

    Matrix reconstruct() const;
};

/// One-sided Jacobi SVD. Rotations stop once every column pair satisfies
/// |a_i . a_j| <= 1e-12 * |a_i| * |a_j|; throws NumericalError after 60
/// sweeps without convergence.
SvdResult svd(const Matrix& m);

/// Count of singular values above max(rows, cols) * eps * sigma_max.
/// The zero matrix has rank 0.
int numerical_rank(const Matrix& m);
int numerical_rank(const SvdResult& s, std::size_t rows, std::size_t cols);

/// Moore-Penrose inverse via SVD, any shape or rank.
Matrix pseudo_inverse(const Matrix& m);

/// M0^+ with M0^+ * M0 = I for a full-column-rank tall matrix. Throws
/// RankError (carrying the observed rank) when columns are dependent.
Matrix left_pseudo_inverse(const Matrix& m0);

/// All eigenvalues of a square matrix: Householder reduction to Hessenberg
/// form followed by Francis double-shift QR. Sorted by descending modulus;
/// complex conjugate pairs come out adjacent.
std::vector<std::complex<double>> eigenvalues(const Matrix& m);

/// Householder QR of a tall matrix: Q (rows x cols) with orthonormal
/// columns, R upper triangular with non-negative diagonal, QR = m.
std::pair<Matrix, Matrix> qr_decompose(const Matrix& m);

}  // namespace lorma
