#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabsol/benchmark.hpp"

namespace tabsol {

/// Parsed run configuration. Text form is one `section.key = value` per line,
/// '#' starts a comment, unknown or repeated keys are rejected.
struct RunConfig {
  BenchmarkSetup setup;

  // "sol_hw" runs the emulated learning block; the others select a
  // real-valued rule (sol, lms, opium_full, opium_normalized).
  std::string trainer = "sol_hw";
  TrainerKind trainer_kind;
  Schedule schedule{500, ShuffleMode::Random, 1};

  unsigned bits = 13;
  AddNoSchedule add_no{{0, 0}};

  std::string sweep_kind = "bits";
  std::vector<unsigned> sweep_bits{4, 6, 8, 11, 13};
  std::optional<std::vector<std::size_t>> sweep_hidden_counts;
  std::optional<std::size_t> sweep_seeds;
  std::uint64_t sweep_base_seed = 1;
  std::size_t sweep_epochs = 200;
  double sweep_threshold = 3.0;
  std::size_t sweep_max_epochs = 3000;
  std::size_t sweep_iterations = 60000;
  AddNoSchedule sweep_schedule = default_step_schedule();

  std::size_t vector_count = 1000;
  std::uint64_t vector_seed = 1;

  std::string eval_model;  // relative paths resolve against the output directory

  std::string trace_file = "trace.csv";
  std::string model_file = "model.json";
  std::string eval_file = "eval.csv";
  std::string sweep_file = "sweep.csv";
  std::string schedule_variable_file = "schedule_variable.csv";
  std::string schedule_fixed_file = "schedule_fixed.csv";
  std::string vectors_file = "vectors.txt";

  /// Hidden counts for a shuffle or capacity sweep, defaulted per kind.
  std::vector<std::size_t> hidden_counts_for(std::string_view kind) const;
  std::size_t seeds_for(std::string_view kind) const;
};

/// Throws ConfigError on syntax errors, unknown keys or invalid values.
RunConfig parse_run_config(std::string_view text);

/// Reads and parses a config file. Throws IoError when it cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);

/// Replaces every seed in the config (network, schedule, sweep, vectors).
void override_seeds(RunConfig& config, std::uint64_t seed);

/// "0:3, 2000:0" -> {{0, 3}, {2000, 0}}; a bare integer means {{0, value}}.
AddNoSchedule parse_add_no_schedule(std::string_view text);

}  // namespace tabsol
