#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "lorma/matrix.hpp"

namespace lorma {

double frobenius_distance(const Matrix& w1, const Matrix& w2);

/// Cosine of the flattened matrices: <vec(w1), vec(w2)> / (|w1|_F |w2|_F).
/// Undefined (throws) when either matrix is all-zero.
double flattened_cosine(const Matrix& w1, const Matrix& w2);

/// Sum of squared differences between the top-r singular values.
double top_r_singular_ssd(const Matrix& w1, const Matrix& w2, int r);

/// Sum of squared differences between the moduli of the top-r eigenvalues
/// (sorted by descending modulus). Both matrices must be square.
double top_r_eigen_ssd(const Matrix& w1, const Matrix& w2, int r);

/// Smallest principal angle between the spans of the top-k left singular
/// vectors, in [0, pi/2]. Requires k <= numerical rank of each argument.
double principal_angle_theta1(const Matrix& w1, const Matrix& w2, int k);

struct MetricsReport {
    double frobenius = 0.0;
    double cosine = 0.0;
    double sv_ssd_r = 0.0;
    std::optional<double> eig_ssd_r;  // absent for non-square inputs
    double theta1 = 0.0;
    int r_used = 0;  // the k actually used for theta1
};

/// The five comparison statistics for one matrix pair. theta1 uses
/// min(r, rank(w1), rank(w2)) basis vectors; the eigenvalue SSD is skipped
/// (left empty) for non-square inputs.
MetricsReport compute_metrics(const Matrix& ref, const Matrix& test, int r);

struct UpdateComparison {
    MetricsReport vs_test;
    MetricsReport vs_random;
};

/// Metrics of ref against test, and of ref against a seeded random baseline
/// with Frobenius norm matched to ref.
UpdateComparison compare_updates(const Matrix& ref, const Matrix& test, int r,
                                 std::uint64_t baseline_seed = 0x52414e44ull);

/// A norm-matched i.i.d. Gaussian matrix, the "random" column of the report.
Matrix norm_matched_random(const Matrix& ref, std::uint64_t seed);

/// CSV with columns metric,ref_vs_test,ref_vs_random.
void write_comparison_csv(const UpdateComparison& cmp, std::ostream& out);

}  // namespace lorma
