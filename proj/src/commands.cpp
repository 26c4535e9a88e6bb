#include "tabsol/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <ostream>
#include <string_view>

#include "tabsol/errors.hpp"
#include "tabsol/io.hpp"

namespace tabsol {

namespace {

void report(std::ostream& log, std::string_view label, double rms_value,
            double percent) {
  log << label << ": rms=" << format_double(rms_value)
      << " nA, percent=" << format_double(percent) << "\n";
}

double residual_rms(const Dataset& data, const std::vector<double>& pred) {
  std::vector<double> r(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) r[k] = pred[k] - data.targets[k];
  return rms(r);
}

SweepOptions sweep_options(const RunConfig& config, const CommandOptions& options,
                           std::string_view kind) {
  SweepOptions s;
  s.setup = config.setup;
  s.base_seed = config.sweep_base_seed;
  s.n_seeds = config.seeds_for(kind);
  s.epochs = config.sweep_epochs;
  s.bits = config.bits;
  s.threshold_percent = config.sweep_threshold;
  s.max_epochs = config.sweep_max_epochs;
  s.jobs = options.jobs;
  return s;
}

std::uint64_t parse_seed_env(const char* text) {
  const std::string_view s(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("TABSOL_SEED must be a non-negative integer, got '" +
                      std::string(s) + "'");
  return value;
}

}  // namespace

void cmd_train(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const TabNetwork net(config.setup.network);
  const Dataset data = gen_target(config.setup.target, config.setup.points);
  const double current = config.setup.readout_current;

  TrainingTrace trace;
  Model model{net, current, OutputWeights::zeros(1, net.hidden_count())};
  if (config.trainer == "sol_hw") {
    HwRunOptions run;
    run.bits = config.bits;
    run.add_no = config.add_no;
    run.epochs = config.schedule.epochs;
    run.mode = config.schedule.mode;
    run.shuffle_seed = config.schedule.seed;
    HwRunResult result = train_hardware(net, data, current, run);
    trace = std::move(result.trace);
    model.readout = std::move(result.dlbs);
  } else {
    auto [weights, t] = train_real(net, config.trainer_kind, data, current, config.schedule);
    trace = std::move(t);
    model.readout = std::move(weights);
  }

  const auto pred = predict_grid(net, model.weights(), data.inputs, current);
  write_file_atomic(options.out_dir / config.trace_file, trace_csv(trace));
  save_model(options.out_dir / config.model_file, model);
  report(log, "train", residual_rms(data, pred), percent_rms_error(pred, data.targets));
}

void cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  // --model is taken as given; eval.model is relative to the output directory,
  // where train writes its model.
  std::filesystem::path path;
  if (options.model) path = *options.model;
  else if (!config.eval_model.empty()) path = options.out_dir / config.eval_model;
  if (path.empty()) throw ConfigError("eval needs a model path (eval.model or --model)");
  const Model model = load_model(path);
  const Dataset data = gen_target(config.setup.target, config.setup.points);
  const auto pred =
      predict_grid(model.network, model.weights(), data.inputs, model.readout_current);
  write_file_atomic(options.out_dir / config.eval_file, eval_csv(data, pred));
  report(log, "eval", residual_rms(data, pred), percent_rms_error(pred, data.targets));
}

void cmd_sweep(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const std::string kind = options.sweep_kind ? *options.sweep_kind : config.sweep_kind;
  if (kind == "schedule") {
    const auto cmp = run_step_schedule(config.setup, config.sweep_schedule,
                                       config.sweep_iterations, config.sweep_base_seed,
                                       config.bits);
    write_file_atomic(options.out_dir / config.schedule_variable_file,
                      trace_csv(cmp.variable));
    write_file_atomic(options.out_dir / config.schedule_fixed_file, trace_csv(cmp.fixed));
    if (!cmp.variable.empty()) {
      log << "schedule: variable final rms=" << format_double(cmp.variable.back().rms_error)
          << " nA, fixed final rms=" << format_double(cmp.fixed.back().rms_error)
          << " nA\n";
    }
    return;
  }

  const SweepOptions s = sweep_options(config, options, kind);
  SweepResult result;
  if (kind == "bits") {
    result = sweep_bits(s, config.sweep_bits);
  } else if (kind == "shuffle") {
    result = sweep_shuffle(s, config.hidden_counts_for(kind));
  } else if (kind == "capacity") {
    result = sweep_capacity(s, config.hidden_counts_for(kind));
  } else {
    throw ConfigError("unknown sweep kind '" + kind +
                      "' (expected bits, shuffle, capacity or schedule)");
  }
  write_file_atomic(options.out_dir / config.sweep_file, sweep_csv(result));
  for (const auto& row : result.summary) {
    log << kind << " " << row.swept_value << ": mean_rms=" << format_double(row.mean_rms)
        << " median_percent=" << format_double(row.median_percent);
    if (kind == "capacity") {
      log << " converged=" << row.converged << "/" << row.runs << " median_epochs=";
      if (row.median_epochs) log << format_double(*row.median_epochs);
      else log << "none";
    }
    log << "\n";
  }
}

void cmd_vectors(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const std::size_t count = options.count ? *options.count : config.vector_count;
  const auto vectors = random_vectors(count, config.bits, config.vector_seed);
  std::string text;
  for (const auto& v : vectors) text += format_vector(v);
  write_file_atomic(options.out_dir / config.vectors_file, text);
  log << "vectors: wrote " << count << " lines\n";
}

int run_cli(const std::string& command, const std::filesystem::path& config_path,
            const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.jobs == 0) throw ConfigError("--jobs must be >= 1");
    RunConfig config = load_run_config(config_path);
    if (const char* env = std::getenv("TABSOL_SEED"))
      override_seeds(config, parse_seed_env(env));

    if (command == "train") cmd_train(config, options, out);
    else if (command == "eval") cmd_eval(config, options, out);
    else if (command == "sweep") cmd_sweep(config, options, out);
    else if (command == "vectors") cmd_vectors(config, options, out);
    else throw ConfigError("unknown command '" + command + "'");
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "tabsol: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    err << "tabsol: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "tabsol: numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "tabsol: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "tabsol: I/O error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace tabsol
