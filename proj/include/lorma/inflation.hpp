#pragma once

#include "lorma/matrix.hpp"

namespace lorma {

enum class InflationKind { none, permutation, additive };

const char* to_string(InflationKind kind);

/// Permutation-based rank inflation: row i of a square matrix is rotated
/// cyclically RIGHT by i positions, so entry (i, j) lands at (i, (j+i) mod d).
/// A pure rearrangement: the multiset of entries (and hence the Frobenius
/// norm) is preserved exactly.
Matrix inflate_pi(const Matrix& m);

/// Inverse and adjoint of inflate_pi: row i rotated LEFT by i.
/// deflate_pi(inflate_pi(x)) == x bitwise.
Matrix deflate_pi(const Matrix& m);

/// Additive rank inflation: s * ba + I_d for square ba. The sum has rank at
/// least d - rank(ba).
Matrix inflate_plus(const Matrix& ba, double scaling);

}  // namespace lorma
