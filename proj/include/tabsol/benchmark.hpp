#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabsol/data.hpp"
#include "tabsol/dlb.hpp"
#include "tabsol/network.hpp"
#include "tabsol/trainers.hpp"

namespace tabsol {

enum class TargetKind { Sine, Cube, Sinc, Complex };

std::string_view to_string(TargetKind kind);
TargetKind target_kind_from_string(std::string_view name);

/// Output values are in nanoamperes, inputs in volts on [-1, 1].
struct TargetFunction {
  TargetKind kind = TargetKind::Sinc;
  double amplitude = 100.0;
  double arg_scale = 6.0 * 3.14159265358979323846;

  /// Sine: s = pi, Sinc: s = 6 pi, Cube and Complex: s = 1.
  static TargetFunction defaults(TargetKind kind);

  void validate() const;
  double operator()(double x) const;
};

/// sin(z) / z with the removable singularity filled in.
double sinc(double z);

/// n_points evenly spaced inputs on [-1, 1] and their targets.
Dataset gen_target(const TargetFunction& fn, std::size_t n_points = 200);

/// Encoder used by every benchmark: unit-magnitude input weights with random
/// sign, small bias mismatch, offsets over the input range, tanh gain 8.
NetworkConfig benchmark_network(std::size_t hidden_count, std::uint64_t seed);

/// Everything a harness run needs besides the learning-rule options.
struct BenchmarkSetup {
  NetworkConfig network = benchmark_network(100, 0);
  TargetFunction target;
  std::size_t points = 200;
  // Output current represented by one unit of W.h. Training runs on
  // targets / readout_current; reported errors are converted back to nA.
  double readout_current = 100.0;

  void validate() const;
};

struct AddNoStep {
  std::size_t iteration = 0;
  unsigned add_no = 0;
};

/// add_no in force at each iteration; entries sorted by iteration.
using AddNoSchedule = std::vector<AddNoStep>;

/// Throws ConfigError unless iterations strictly increase and add_no <= 7.
void validate_schedule(const AddNoSchedule& schedule);
unsigned add_no_at(const AddNoSchedule& schedule, std::size_t iteration);

/// Coarse-then-fine steps: add_no 3 until iteration 2000, then 0.
AddNoSchedule default_step_schedule();

struct HwRunOptions {
  unsigned bits = 13;
  AddNoSchedule add_no{{0, 0}};
  std::size_t epochs = 200;
  // 0 means epochs * n. Otherwise the run stops after this many presentations.
  std::size_t iterations = 0;
  ShuffleMode mode = ShuffleMode::Random;
  std::uint64_t shuffle_seed = 0;
  // When set, training stops at the first epoch boundary whose full-grid
  // percent error is at or below the threshold.
  std::optional<double> stop_at_percent;
};

struct HwRunResult {
  DlbArray dlbs{1, 13};
  TrainingTrace trace;                // errors in output units (nA)
  std::vector<double> epoch_percent;  // full-grid test error after each epoch
  double final_rms = 0.0;             // full-grid test RMS after training
  double final_percent = 0.0;
  std::optional<std::size_t> epochs_to_threshold;
};

/// SOL training on the emulated learning block, W starts at zero.
HwRunResult train_hardware(const TabNetwork& net, const Dataset& data,
                           double readout_current, const HwRunOptions& options);

/// Real-valued rules through train_online with the same output scaling.
std::pair<OutputWeights, TrainingTrace> train_real(const TabNetwork& net,
                                                   const TrainerKind& trainer,
                                                   const Dataset& data,
                                                   double readout_current,
                                                   const Schedule& schedule);

/// Readout of precomputed activations (one row per input), in output units.
std::vector<double> grid_predictions(const Matrix& H,
                                     const OutputWeights& weights,
                                     double readout_current);

/// Grid predictions in output units for a real-valued readout.
std::vector<double> predict_grid(const TabNetwork& net,
                                 const OutputWeights& weights,
                                 std::span<const double> inputs,
                                 double readout_current);

struct SweepRecord {
  std::string swept_value;
  std::uint64_t seed = 0;
  double final_rms = 0.0;
  double final_percent = 0.0;
  // Capacity sweeps only. converged == false marks a run that hit max_epochs.
  bool tracks_threshold = false;
  bool converged = false;
  std::size_t epochs_to_threshold = 0;
};

struct SweepSummary {
  std::string swept_value;
  std::size_t runs = 0;
  double mean_rms = 0.0;
  double var_rms = 0.0;  // sample variance over seeds
  double mean_percent = 0.0;
  double var_percent = 0.0;
  double median_percent = 0.0;
  std::size_t converged = 0;
  std::optional<double> median_epochs;  // nullopt when the median run did not converge
};

struct SweepResult {
  std::string kind;
  std::vector<SweepRecord> records;
  std::vector<SweepSummary> summary;  // one per swept value, in sweep order
  std::optional<std::size_t> min_converging_hidden;

  const SweepSummary& at(std::string_view swept_value) const;
};

struct SweepOptions {
  BenchmarkSetup setup;
  std::uint64_t base_seed = 1;
  std::size_t n_seeds = 5;
  std::size_t epochs = 200;
  unsigned bits = 13;
  double threshold_percent = 3.0;
  std::size_t max_epochs = 3000;
  std::size_t jobs = 1;
};

/// Counter-width sweep at setup.network.hidden_count, add_no = 0.
SweepResult sweep_bits(const SweepOptions& options,
                       std::span<const unsigned> bits_list);

/// Random vs ordered presentation. Swept values are "<L>:random" and
/// "<L>:ordered"; both modes of a replicate share the same network.
SweepResult sweep_shuffle(const SweepOptions& options,
                          std::span<const std::size_t> hidden_counts);

/// Epochs to reach threshold_percent, capped at max_epochs.
SweepResult sweep_capacity(const SweepOptions& options,
                           std::span<const std::size_t> hidden_counts);

struct ScheduleComparison {
  AddNoSchedule schedule;
  TrainingTrace variable;
  TrainingTrace fixed;  // constant add_no equal to the schedule's last entry
};

ScheduleComparison run_step_schedule(const BenchmarkSetup& setup,
                                     const AddNoSchedule& schedule,
                                     std::size_t iterations,
                                     std::uint64_t seed, unsigned bits = 13);

/// First iteration (once a full epoch window exists) at which the running
/// RMS is at or below `level`.
std::optional<std::size_t> iterations_to_reach(const TrainingTrace& trace,
                                               double level, std::size_t window);

/// Seeds of one sweep cell: the network and the presentation order draw from
/// separate streams of base_seed + replicate.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t replicate);
std::uint64_t network_seed(std::uint64_t cell);
std::uint64_t shuffle_seed(std::uint64_t cell);

}  // namespace tabsol
