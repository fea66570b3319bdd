// Experiment harness for low-rank adapter algebra: deterministic training
// runs from declarative configs, gradient checking, snapshot analysis and
// the multiplicative-existence theorem suite.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorma/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lorma - low-rank multiplicative adaptation workbench"};
    app.require_subcommand(1);

    // run
    std::vector<std::string> config_files;
    int jobs = 1;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "execute experiment config files");
    run->add_option("configs", config_files, "TOML or JSON experiment configs")
        ->required();
    run->add_option("--jobs,-j", jobs, "parallel config files (a run is never split)")
        ->envname("LORMA_JOBS")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "override the configured output directory");

    // gradcheck
    int dim = 16;
    int rank = 2;
    std::string variant = "lorma_plus";
    std::string side = "pre";
    std::uint64_t seed = 0;
    auto* gradcheck =
        app.add_subcommand("gradcheck", "finite-difference check of backward");
    gradcheck->add_option("--dim,-d", dim, "square weight dimension (<= 64)");
    gradcheck->add_option("--r", rank, "adapter rank");
    gradcheck->add_option("--variant", variant,
                          "lora | lorma_naive | lorma_pi | lorma_plus");
    gradcheck->add_option("--side", side, "pre | post");
    gradcheck->add_option("--seed", seed, "rng seed");

    // analyze
    std::string ref_path, test_path, analyze_out;
    int analyze_r = 4;
    std::uint64_t baseline_seed = 0x52414e44ull;
    auto* analyze =
        app.add_subcommand("analyze", "compare two matrix snapshots (LRMA format)");
    analyze->add_option("ref", ref_path, "reference snapshot")->required();
    analyze->add_option("test", test_path, "snapshot to compare against")->required();
    analyze->add_option("--r", analyze_r, "top-r for singular/eigen metrics");
    analyze->add_option("--out", analyze_out, "also write the CSV here");
    analyze->add_option("--baseline-seed", baseline_seed,
                        "seed of the norm-matched random baseline");

    // theory
    std::uint64_t theory_seed = lorma::cli::kDefaultTheorySeed;
    auto* theory = app.add_subcommand("theory", "run the existence-theorem suite");
    theory->add_option("--seed", theory_seed, "instance seed");

    // report
    std::string report_root;
    auto* report =
        app.add_subcommand("report", "rebuild the comparison table from run outputs");
    report->add_option("output_root", report_root, "directory written by `run`")
        ->required()
        ->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lorma::cli::kExitUsage;
    }

    try {
        if (run->parsed()) {
            std::vector<std::filesystem::path> paths(config_files.begin(),
                                                     config_files.end());
            std::optional<std::filesystem::path> override;
            if (!out_dir.empty()) override = out_dir;
            return lorma::cli::cmd_run(paths, jobs, std::cout, override);
        }
        if (gradcheck->parsed()) {
            return lorma::cli::cmd_gradcheck(dim, rank, lorma::parse_variant(variant),
                                             lorma::parse_side(side), seed, std::cout);
        }
        if (analyze->parsed()) {
            std::optional<std::filesystem::path> csv_out;
            if (!analyze_out.empty()) csv_out = analyze_out;
            return lorma::cli::cmd_analyze(ref_path, test_path, analyze_r, csv_out,
                                           baseline_seed, std::cout);
        }
        if (theory->parsed()) {
            return lorma::cli::cmd_theory(theory_seed, std::cout);
        }
        if (report->parsed()) {
            return lorma::cli::cmd_report(report_root, std::cout);
        }
    } catch (const lorma::Error& e) {
        std::cerr << "lorma: error: " << e.what() << "\n";
        return lorma::cli::kExitUsage;
    }
    return lorma::cli::kExitUsage;
}
