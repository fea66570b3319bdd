#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lorma/matrix.hpp"

namespace lorma {

/// A constructive witness that some multiplier (nearly) realizes a desired
/// transformation, with the residual it leaves.
struct ExistenceCertificate {
    Matrix multiplier;
    double residual = 0.0;  // |multiplier*m0 - m|_F, or the post-side analogue
    bool feasible = false;  // residual < 1e-8 * max(1, |m|_F)
};

inline constexpr double kFeasibilityRelTol = 1e-8;

/// Pre-multiplier m * m0^+ for full-column-rank m0; always feasible when the
/// hypothesis holds. Throws RankError when m0 is column-deficient.
ExistenceCertificate construct_premultiplier(const Matrix& m0, const Matrix& m);

/// Least-squares post-multiplier argmin_X |m0 X - m|_F. Feasibility of the
/// certificate reports whether m is reachable from the right at all.
ExistenceCertificate best_postmultiplier(const Matrix& m0, const Matrix& m);

/// For invertible square m0: the exact pre-multiplier m * m0^-1 and
/// post-multiplier m0^-1 * m. Throws RankError when m0 is singular.
std::pair<ExistenceCertificate, ExistenceCertificate> square_both_sides(
    const Matrix& m0, const Matrix& m);

struct ClaimResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Runs the whole claim suite (existence theorem, post-side counterexample,
/// square two-sided solvability, degrees-of-freedom observation) with seeded
/// instances; output is deterministic.
std::vector<ClaimResult> run_theory_suite(std::uint64_t seed);

}  // namespace lorma
