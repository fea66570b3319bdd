#include "lorma/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lorma/io.hpp"
#include "lorma/linalg.hpp"
#include "lorma/metrics.hpp"
#include "lorma/rng.hpp"

namespace lorma {

namespace {

bool feasible_for(double residual, const Matrix& m) {
    return residual < kFeasibilityRelTol * std::max(1.0, m.frobenius_norm());
}

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.gaussian();
    return m;
}

Matrix random_full_column_rank(Rng& rng, std::size_t n, std::size_t m) {
    Matrix out = gaussian_matrix(rng, n, m);
    while (numerical_rank(out) != static_cast<int>(m)) {
        out = gaussian_matrix(rng, n, m);
    }
    return out;
}

}  // namespace

ExistenceCertificate construct_premultiplier(const Matrix& m0, const Matrix& m) {
    require_same_shape(m0, m, "construct_premultiplier");
    if (m0.rows() < m0.cols()) {
        throw ShapeError("construct_premultiplier: m0 must be tall (n >= m)");
    }
    // left_pseudo_inverse enforces the theorem hypothesis R(m0) = cols.
    const Matrix pinv = left_pseudo_inverse(m0);
    ExistenceCertificate cert;
    cert.multiplier = matmul(m, pinv);
    cert.residual = frobenius_distance(matmul(cert.multiplier, m0), m);
    cert.feasible = feasible_for(cert.residual, m);
    return cert;
}

ExistenceCertificate best_postmultiplier(const Matrix& m0, const Matrix& m) {
    require_same_shape(m0, m, "best_postmultiplier");
    ExistenceCertificate cert;
    cert.multiplier = matmul(pseudo_inverse(m0), m);
    cert.residual = frobenius_distance(matmul(m0, cert.multiplier), m);
    cert.feasible = feasible_for(cert.residual, m);
    return cert;
}

std::pair<ExistenceCertificate, ExistenceCertificate> square_both_sides(
    const Matrix& m0, const Matrix& m) {
    if (m0.rows() != m0.cols()) {
        throw ShapeError("square_both_sides: m0 must be square");
    }
    require_same_shape(m0, m, "square_both_sides");
    const int rank = numerical_rank(m0);
    if (rank != static_cast<int>(m0.rows())) {
        throw RankError("square_both_sides: m0 is singular, observed rank " +
                            std::to_string(rank) + " of " +
                            std::to_string(m0.rows()),
                        rank);
    }
    const Matrix inverse = left_pseudo_inverse(m0);

    ExistenceCertificate pre;
    pre.multiplier = matmul(m, inverse);
    pre.residual = frobenius_distance(matmul(pre.multiplier, m0), m);
    pre.feasible = feasible_for(pre.residual, m);

    ExistenceCertificate post;
    post.multiplier = matmul(inverse, m);
    post.residual = frobenius_distance(matmul(m0, post.multiplier), m);
    post.feasible = feasible_for(post.residual, m);
    return {std::move(pre), std::move(post)};
}

std::vector<ClaimResult> run_theory_suite(std::uint64_t seed) {
    std::vector<ClaimResult> results;
    Rng rng(seed);

    {  // Existence of a pre-multiplier for every tall full-column-rank base.
        ClaimResult claim{"premultiplier_existence", true, ""};
        double worst = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t cols = 1 + rng.below(16);
            const std::size_t rows =
                std::min<std::size_t>(32, cols + 1 + rng.below(32 - cols));
            const Matrix m0 = random_full_column_rank(rng, rows, cols);
            const Matrix target = gaussian_matrix(rng, rows, cols);
            const auto cert = construct_premultiplier(m0, target);
            worst = std::max(worst, cert.residual);
            if (!cert.feasible) claim.pass = false;
        }
        std::ostringstream os;
        os << "200 random instances (n<=32), worst residual " << format_double(worst);
        claim.detail = os.str();
        results.push_back(std::move(claim));
    }

    {  // Post-side counterexample: residual is forced to sqrt(m).
        ClaimResult claim{"postmultiplier_counterexample", true, ""};
        std::ostringstream os;
        for (const std::size_t m : {1, 2, 4, 8}) {
            const std::size_t n = 2 * m;
            Matrix m0(n, m), target(n, m);
            for (std::size_t i = 0; i < m; ++i) {
                m0(i, i) = 1.0;
                target(n - m + i, i) = 1.0;
            }
            const auto cert = best_postmultiplier(m0, target);
            const double expected = std::sqrt(static_cast<double>(m));
            if (std::abs(cert.residual - expected) > 1e-10 || cert.feasible) {
                claim.pass = false;
            }
            os << "m=" << m << " residual " << format_double(cert.residual)
               << " (sqrt(m)=" << format_double(expected) << ") ";
        }
        claim.detail = os.str();
        results.push_back(std::move(claim));
    }

    {  // Reachable targets from the right are recovered exactly.
        ClaimResult claim{"postmultiplier_reachable", true, ""};
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix m0 = random_full_column_rank(rng, 12, 4);
            const Matrix reachable = matmul(m0, gaussian_matrix(rng, 4, 4));
            const auto cert = best_postmultiplier(m0, reachable);
            worst = std::max(worst, cert.residual);
            if (!cert.feasible) claim.pass = false;
        }
        claim.detail = "50 reachable targets, worst residual " + format_double(worst);
        results.push_back(std::move(claim));
    }

    {  // Square invertible base: both sides solvable.
        ClaimResult claim{"square_both_sides", true, ""};
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Matrix m0 = random_full_column_rank(rng, 8, 8);
            const Matrix target = gaussian_matrix(rng, 8, 8);
            const auto [pre, post] = square_both_sides(m0, target);
            worst = std::max({worst, pre.residual, post.residual});
            if (!pre.feasible || !post.feasible) claim.pass = false;
        }
        claim.detail = "100 invertible 8x8 instances, worst residual " +
                       format_double(worst);
        results.push_back(std::move(claim));
    }

    {  // Degrees of freedom: random tall targets are never post-reachable.
        ClaimResult claim{"post_side_degrees_of_freedom", true, ""};
        int reachable_count = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const Matrix m0 = random_full_column_rank(rng, 10, 3);
            const Matrix target = gaussian_matrix(rng, 10, 3);
            const auto cert = best_postmultiplier(m0, target);
            if (cert.residual < 1e-6) ++reachable_count;
        }
        claim.pass = reachable_count == 0;
        claim.detail = std::to_string(reachable_count) +
                       " of 100 random targets post-reachable (expect 0)";
        results.push_back(std::move(claim));
    }

    return results;
}

}  // namespace lorma
