#include "lorma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>

#include "lorma/io.hpp"
#include "lorma/linalg.hpp"
#include "lorma/rng.hpp"

namespace lorma {

double frobenius_distance(const Matrix& w1, const Matrix& w2) {
    require_same_shape(w1, w2, "frobenius_distance");
    return (w1 - w2).frobenius_norm();
}

double flattened_cosine(const Matrix& w1, const Matrix& w2) {
    require_same_shape(w1, w2, "flattened_cosine");
    const double n1 = w1.frobenius_norm();
    const double n2 = w2.frobenius_norm();
    if (n1 == 0.0 || n2 == 0.0) {
        throw ConfigError("flattened_cosine: undefined for an all-zero matrix");
    }
    return frobenius_inner(w1, w2) / (n1 * n2);
}

double top_r_singular_ssd(const Matrix& w1, const Matrix& w2, int r) {
    require_same_shape(w1, w2, "top_r_singular_ssd");
    if (r <= 0 || static_cast<std::size_t>(r) > std::min(w1.rows(), w1.cols())) {
        throw ConfigError("top_r_singular_ssd: r out of range");
    }
    const auto s1 = svd(w1).sigma;
    const auto s2 = svd(w2).sigma;
    double acc = 0.0;
    for (int i = 0; i < r; ++i) {
        const double diff = s1[i] - s2[i];
        acc += diff * diff;
    }
    return acc;
}

double top_r_eigen_ssd(const Matrix& w1, const Matrix& w2, int r) {
    if (w1.rows() != w1.cols() || w2.rows() != w2.cols()) {
        throw ShapeError("top_r_eigen_ssd: inputs must be square");
    }
    require_same_shape(w1, w2, "top_r_eigen_ssd");
    if (r <= 0 || static_cast<std::size_t>(r) > w1.rows()) {
        throw ConfigError("top_r_eigen_ssd: r out of range");
    }
    // eigenvalues() sorts by descending modulus; compare moduli so complex
    // conjugate pairs behave deterministically.
    const auto e1 = eigenvalues(w1);
    const auto e2 = eigenvalues(w2);
    double acc = 0.0;
    for (int i = 0; i < r; ++i) {
        const double diff = std::abs(e1[i]) - std::abs(e2[i]);
        acc += diff * diff;
    }
    return acc;
}

double principal_angle_theta1(const Matrix& w1, const Matrix& w2, int k) {
    if (w1.rows() != w2.rows()) {
        throw ShapeError("principal_angle_theta1: row counts differ");
    }
    if (k <= 0) throw ConfigError("principal_angle_theta1: k must be positive");
    const SvdResult s1 = svd(w1);
    const SvdResult s2 = svd(w2);
    const int r1 = numerical_rank(s1, w1.rows(), w1.cols());
    const int r2 = numerical_rank(s2, w2.rows(), w2.cols());
    if (k > r1 || k > r2) {
        throw RankError("principal_angle_theta1: k = " + std::to_string(k) +
                            " exceeds a numerical rank (" + std::to_string(r1) +
                            ", " + std::to_string(r2) + ")",
                        std::min(r1, r2));
    }
    // Orthonormal bases: the top-k left singular vectors.
    Matrix q1(w1.rows(), k), q2(w2.rows(), k);
    for (std::size_t i = 0; i < w1.rows(); ++i)
        for (int j = 0; j < k; ++j) {
            q1(i, j) = s1.u(i, j);
            q2(i, j) = s2.u(i, j);
        }
    const auto cross = svd(matmul(q1.transposed(), q2));
    const double largest = std::clamp(cross.sigma[0], -1.0, 1.0);
    return std::acos(largest);
}

namespace {

MetricsReport metrics_with_k(const Matrix& ref, const Matrix& test, int r, int k) {
    MetricsReport report;
    report.frobenius = frobenius_distance(ref, test);
    report.cosine = flattened_cosine(ref, test);
    report.sv_ssd_r = top_r_singular_ssd(ref, test, r);
    if (ref.rows() == ref.cols()) {
        report.eig_ssd_r = top_r_eigen_ssd(ref, test, r);
    }
    if (k < 1) throw RankError("compute_metrics: an argument has rank 0", 0);
    report.r_used = k;
    report.theta1 = principal_angle_theta1(ref, test, k);
    return report;
}

}  // namespace

MetricsReport compute_metrics(const Matrix& ref, const Matrix& test, int r) {
    require_same_shape(ref, test, "compute_metrics");
    const int k = std::min({r, numerical_rank(ref), numerical_rank(test)});
    return metrics_with_k(ref, test, r, k);
}

Matrix norm_matched_random(const Matrix& ref, std::uint64_t seed) {
    Rng rng(seed);
    Matrix random(ref.rows(), ref.cols());
    for (auto& v : random.data()) v = rng.gaussian();
    const double norm = random.frobenius_norm();
    if (norm > 0.0) random *= ref.frobenius_norm() / norm;
    return random;
}

UpdateComparison compare_updates(const Matrix& ref, const Matrix& test, int r,
                                 std::uint64_t baseline_seed) {
    require_same_shape(ref, test, "compare_updates");
    const Matrix random = norm_matched_random(ref, baseline_seed);
    // One shared subspace dimension keeps the two theta1 columns comparable.
    const int k = std::min({r, numerical_rank(ref), numerical_rank(test),
                            numerical_rank(random)});
    UpdateComparison cmp;
    cmp.vs_test = metrics_with_k(ref, test, r, k);
    cmp.vs_random = metrics_with_k(ref, random, r, k);
    return cmp;
}

void write_comparison_csv(const UpdateComparison& cmp, std::ostream& out) {
    const auto cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string("NA");
    };
    out << "metric,ref_vs_test,ref_vs_random\n";
    out << "frobenius," << format_double(cmp.vs_test.frobenius) << ','
        << format_double(cmp.vs_random.frobenius) << '\n';
    out << "cosine," << format_double(cmp.vs_test.cosine) << ','
        << format_double(cmp.vs_random.cosine) << '\n';
    out << "sv_ssd_r," << format_double(cmp.vs_test.sv_ssd_r) << ','
        << format_double(cmp.vs_random.sv_ssd_r) << '\n';
    out << "eig_ssd_r," << cell(cmp.vs_test.eig_ssd_r) << ','
        << cell(cmp.vs_random.eig_ssd_r) << '\n';
    out << "theta1," << format_double(cmp.vs_test.theta1) << ','
        << format_double(cmp.vs_random.theta1) << '\n';
}

}  // namespace lorma
