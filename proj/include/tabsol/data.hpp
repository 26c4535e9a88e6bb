#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tabsol {

/// SISO training set: inputs in volts, targets in the caller's output unit.
struct Dataset {
  std::vector<double> inputs;
  std::vector<double> targets;

  std::size_t size() const { return inputs.size(); }
};

/// sqrt(mean(v^2)). Throws InputError on an empty sequence.
double rms(std::span<const double> values);

/// 100 * rms(pred - target) / rms(target). Throws InputError on length
/// mismatch, empty input, or a zero-RMS target.
double percent_rms_error(std::span<const double> pred,
                         std::span<const double> target);

enum class ShuffleMode { Random, Ordered };

struct Schedule {
  std::size_t epochs = 0;
  ShuffleMode mode = ShuffleMode::Random;
  std::uint64_t seed = 0;
};

/// Flat presentation order: Ordered repeats 0..n-1 each epoch, Random draws an
/// independent seeded permutation per epoch. Length is epochs * n.
std::vector<std::size_t> make_schedule(const Schedule& schedule, std::size_t n);

struct TraceRecord {
  std::size_t iteration = 0;
  std::size_t epoch = 0;
  double error = 0.0;          // RMS over outputs of the pre-update error
  double rms_error = 0.0;      // running RMS over the most recent epoch
  double percent_error = 0.0;  // 100 * rms_error / rms(targets)
};

using TrainingTrace = std::vector<TraceRecord>;

/// Accumulates the running-RMS window that every training loop records.
class TraceRecorder {
 public:
  TraceRecorder(std::size_t window, double target_rms);

  void record(std::size_t iteration, std::size_t epoch, double error);

  TrainingTrace& trace() { return trace_; }
  TrainingTrace take() { return std::move(trace_); }

 private:
  std::size_t window_;
  double target_rms_;
  std::vector<double> squares_;  // ring buffer of the last `window_` errors
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  TrainingTrace trace_;
};

}  // namespace tabsol
