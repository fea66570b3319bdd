#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lorma/adapter.hpp"

namespace lorma::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;
inline constexpr int kExitIo = 4;

inline constexpr std::uint64_t kDefaultTheorySeed = 0x1005EED;

/// Executes every experiment described by the given config files, fanning
/// out over files (never within a run) when jobs > 1. Writes per-run
/// loss/rank CSVs, a summary JSON, the adapter snapshot and the delta-W
/// snapshot, plus a comparison table when a config holds several adapters.
int cmd_run(const std::vector<std::filesystem::path>& config_paths, int jobs,
            std::ostream& out,
            const std::optional<std::filesystem::path>& output_override = {});

/// Finite-difference check of the closed-form backward pass. Exit 0 iff the
/// worst relative error stays below 1e-4.
int cmd_gradcheck(int dim, int r, AdapterVariant variant, MultiplySide side,
                  std::uint64_t seed, std::ostream& out);

/// Compares two matrix snapshots with the full metric suite (plus the
/// norm-matched random baseline) and emits the report CSV.
int cmd_analyze(const std::filesystem::path& ref_path,
                const std::filesystem::path& test_path, int r,
                const std::optional<std::filesystem::path>& csv_out,
                std::uint64_t baseline_seed, std::ostream& out);

/// Runs the theorem suite and prints one pass/fail row per claim.
int cmd_theory(std::uint64_t seed, std::ostream& out);

/// Rebuilds the convergence comparison table from stored run outputs
/// (an output root laid out by cmd_run).
int cmd_report(const std::filesystem::path& output_root, std::ostream& out);

}  // namespace lorma::cli
