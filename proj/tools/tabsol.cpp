#include <iostream>

#include <CLI11.hpp>

#include "tabsol/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sign-based online learning for trainable analogue blocks"};
  app.require_subcommand(1);

  std::string config_path;
  tabsol::CommandOptions options;
  std::string out_dir = ".";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--jobs", options.jobs, "worker threads for sweeps")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* train = app.add_subcommand("train", "train a readout and save the model");
  add_common(train);
  auto* eval = app.add_subcommand("eval", "evaluate a saved model on the target grid");
  add_common(eval);
  eval->add_option("--model", options.model, "model file (overrides eval.model)");
  auto* sweep = app.add_subcommand("sweep", "run a benchmark sweep");
  add_common(sweep);
  sweep->add_option("--kind", options.sweep_kind, "bits, shuffle, capacity or schedule");
  auto* vectors = app.add_subcommand("vectors", "export learning-block test vectors");
  add_common(vectors);
  vectors->add_option("--count", options.count, "number of vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tabsol::kExitConfig;
  }

  options.out_dir = out_dir;
  const std::string command = app.get_subcommands().front()->get_name();
  return tabsol::run_cli(command, config_path, options, std::cout, std::cerr);
}
