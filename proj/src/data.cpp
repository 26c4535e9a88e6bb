#include "tabsol/data.hpp"

#include <cmath>
#include <numeric>
#include <span>

#include "tabsol/errors.hpp"
#include "tabsol/random.hpp"

namespace tabsol {

double rms(std::span<const double> values) {
  if (values.empty()) throw InputError("rms of an empty sequence");
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum / static_cast<double>(values.size()));
}

double percent_rms_error(std::span<const double> pred,
                         std::span<const double> target) {
  if (pred.size() != target.size())
    throw InputError("prediction and target lengths differ");
  if (target.empty()) throw InputError("percent error of empty sequences");
  const double target_rms = rms(target);
  if (!(target_rms > 0.0)) throw InputError("target RMS is zero");
  std::vector<double> residual(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) residual[i] = pred[i] - target[i];
  return 100.0 * rms(residual) / target_rms;
}

std::vector<std::size_t> make_schedule(const Schedule& schedule, std::size_t n) {
  std::vector<std::size_t> order;
  order.reserve(schedule.epochs * n);
  std::vector<std::size_t> epoch(n);
  Rng rng(schedule.seed);
  for (std::size_t e = 0; e < schedule.epochs; ++e) {
    std::iota(epoch.begin(), epoch.end(), std::size_t{0});
    if (schedule.mode == ShuffleMode::Random)
      rng.shuffle(std::span<std::size_t>(epoch));
    order.insert(order.end(), epoch.begin(), epoch.end());
  }
  return order;
}

TraceRecorder::TraceRecorder(std::size_t window, double target_rms)
    : window_(window == 0 ? 1 : window),
      target_rms_(target_rms),
      squares_(window_, 0.0) {}

void TraceRecorder::record(std::size_t iteration, std::size_t epoch,
                           double error) {
  squares_[head_] = error * error;
  head_ = (head_ + 1) % window_;
  if (filled_ < window_) ++filled_;
  // Summed fresh each time: a running total drifts over 10^5 iterations.
  double sum = 0.0;
  for (std::size_t i = 0; i < filled_; ++i) sum += squares_[i];
  const double running = std::sqrt(sum / static_cast<double>(filled_));
  const double percent = target_rms_ > 0.0 ? 100.0 * running / target_rms_ : 0.0;
  trace_.push_back({iteration, epoch, error, running, percent});
}

}  // namespace tabsol
