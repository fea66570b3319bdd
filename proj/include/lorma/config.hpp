#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorma/adapter.hpp"
#include "lorma/trainer.hpp"

namespace lorma {

const char* to_string(OptimizerKind k);
const char* to_string(ScheduleKind k);
const char* to_string(TaskKind k);
const char* to_string(TargetKind k);
OptimizerKind parse_optimizer_kind(const std::string& s);
ScheduleKind parse_schedule_kind(const std::string& s);
TaskKind parse_task_kind(const std::string& s);
TargetKind parse_target_kind(const std::string& s);

struct AdapterEntry {
    std::string name;  // defaults to the variant string
    AdapterConfig config;
    bool seed_pinned = false;  // adapter.seed came from the file, keep it fixed
};

/// One declarative experiment: a task, one or more adapters to run on it,
/// an optimizer, a schedule and a training budget. The unit of work of the
/// CLI `run` command.
struct ExperimentConfig {
    TaskSpec task;
    OptimizerSpec optimizer;
    LrSchedule schedule;  // total_steps is derived from the budget at run time
    int epochs = 125;
    int batch = 16;
    std::uint64_t seed = 0;
    int num_seeds = 1;  // runs use seed, seed+1, ..., seed+num_seeds-1
    std::filesystem::path output_dir = "out";
    std::vector<AdapterEntry> adapters;
};

/// Builds and validates a config from a parsed document (TOML or JSON both
/// normalize to the same JSON shape). Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);

/// Loads .toml or .json by extension.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical form of one run (config + adapter + concrete seed): keys are
/// emitted sorted, so the file's field order can never leak into the hash.
nlohmann::json canonical_run_json(const ExperimentConfig& config,
                                  const AdapterEntry& adapter,
                                  std::uint64_t run_seed);

/// FNV-1a 64-bit over the canonical JSON dump.
std::uint64_t run_hash(const ExperimentConfig& config, const AdapterEntry& adapter,
                       std::uint64_t run_seed);

std::string hash_hex(std::uint64_t value);

}  // namespace lorma
