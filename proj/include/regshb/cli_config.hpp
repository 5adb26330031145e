#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "regshb/harness.hpp"

namespace regshb {

// Built-in experiment profiles: "fredholm", "tomo", "schlieren".
std::vector<std::string> preset_names();
std::string preset_config_text(const std::string& name);

// Loads a config (from a preset name, a file path, or both absent -> error),
// applies KEY=VALUE overrides, validates strictly (unknown keys are rejected
// by name) and produces the experiment spec.
ExperimentSpec parse_config(const std::optional<std::string>& preset,
                            const std::optional<std::filesystem::path>& config_path,
                            const std::vector<std::string>& overrides);

struct SolveOptions {
    std::string solver_name;          // empty: first configured solver
    std::optional<double> noise_level;  // default: first configured level
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = ".";
};

struct BenchOptions {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t workers = 0;  // 0: resolve from env / hardware
    std::filesystem::path out_dir = ".";
};

int cmd_solve(const ExperimentSpec& spec, const SolveOptions& opts);
int cmd_bench(const ExperimentSpec& spec, const BenchOptions& opts);
int cmd_check(std::uint64_t seed);
int cmd_export_problem(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

std::size_t resolve_workers(std::size_t requested);

}  // namespace regshb
