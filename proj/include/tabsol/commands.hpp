#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "tabsol/config.hpp"

namespace tabsol {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  std::size_t jobs = 1;
  std::optional<std::string> model;       // eval: overrides eval.model
  std::optional<std::string> sweep_kind;  // sweep: overrides sweep.kind
  std::optional<std::size_t> count;       // vectors: overrides vectors.count
};

/// Each command writes its files under options.out_dir and a short summary to
/// `log`. Errors propagate as exceptions.
void cmd_train(const RunConfig& config, const CommandOptions& options, std::ostream& log);
void cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& log);
void cmd_sweep(const RunConfig& config, const CommandOptions& options, std::ostream& log);
void cmd_vectors(const RunConfig& config, const CommandOptions& options, std::ostream& log);

/// Loads the config, applies TABSOL_SEED, runs `command` and maps failures to
/// exit codes: 2 config or input, 3 numeric, 4 I/O.
int run_cli(const std::string& command, const std::filesystem::path& config_path,
            const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace tabsol
