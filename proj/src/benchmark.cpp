#include "tabsol/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "tabsol/errors.hpp"
#include "tabsol/random.hpp"

namespace tabsol {

namespace {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results are written
// by index, so the outcome never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::vector<SweepSummary> summarize(const std::vector<SweepRecord>& records,
                                    const std::vector<std::string>& order) {
  std::vector<SweepSummary> out;
  for (const auto& value : order) {
    std::vector<double> rms, pct, epochs;
    SweepSummary s;
    s.swept_value = value;
    bool tracks = false;
    for (const auto& r : records) {
      if (r.swept_value != value) continue;
      rms.push_back(r.final_rms);
      pct.push_back(r.final_percent);
      tracks = tracks || r.tracks_threshold;
      if (r.tracks_threshold) {
        if (r.converged) ++s.converged;
        epochs.push_back(r.converged ? static_cast<double>(r.epochs_to_threshold)
                                     : std::numeric_limits<double>::infinity());
      }
    }
    s.runs = rms.size();
    s.mean_rms = mean_of(rms);
    s.var_rms = sample_variance(rms);
    s.mean_percent = mean_of(pct);
    s.var_percent = sample_variance(pct);
    s.median_percent = median_of(pct);
    if (tracks) {
      const double m = median_of(epochs);
      if (std::isfinite(m)) s.median_epochs = m;
    }
    out.push_back(std::move(s));
  }
  return out;
}

Dataset scaled(const Dataset& data, double factor) {
  Dataset out = data;
  for (double& t : out.targets) t *= factor;
  return out;
}

}  // namespace

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Sine: return "sine";
    case TargetKind::Cube: return "cube";
    case TargetKind::Sinc: return "sinc";
    case TargetKind::Complex: return "complex";
  }
  return "unknown";
}

TargetKind target_kind_from_string(std::string_view name) {
  if (name == "sine") return TargetKind::Sine;
  if (name == "cube") return TargetKind::Cube;
  if (name == "sinc") return TargetKind::Sinc;
  if (name == "complex") return TargetKind::Complex;
  throw ConfigError("unknown target kind '" + std::string(name) + "'");
}

TargetFunction TargetFunction::defaults(TargetKind kind) {
  TargetFunction fn;
  fn.kind = kind;
  switch (kind) {
    case TargetKind::Sine: fn.arg_scale = std::numbers::pi; break;
    case TargetKind::Sinc: fn.arg_scale = 6.0 * std::numbers::pi; break;
    case TargetKind::Cube:
    case TargetKind::Complex: fn.arg_scale = 1.0; break;
  }
  return fn;
}

void TargetFunction::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw ConfigError("target amplitude must be finite and > 0");
  if (!std::isfinite(arg_scale) || arg_scale == 0.0)
    throw ConfigError("target arg_scale must be finite and nonzero");
}

double sinc(double z) { return z == 0.0 ? 1.0 : std::sin(z) / z; }

double TargetFunction::operator()(double x) const {
  const double z = arg_scale * x;
  switch (kind) {
    case TargetKind::Sine: return amplitude * std::sin(z);
    case TargetKind::Cube: return amplitude * z * z * z;
    case TargetKind::Sinc: return amplitude * sinc(z);
    case TargetKind::Complex: return amplitude * (std::sin(z) + z * z * z + sinc(z));
  }
  return 0.0;
}

Dataset gen_target(const TargetFunction& fn, std::size_t n_points) {
  fn.validate();
  if (n_points < 2) throw ConfigError("a target grid needs at least 2 points");
  Dataset data;
  data.inputs.resize(n_points);
  data.targets.resize(n_points);
  const double step = 2.0 / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = i + 1 == n_points ? 1.0 : -1.0 + step * static_cast<double>(i);
    data.inputs[i] = x;
    data.targets[i] = fn(x);
  }
  return data;
}

NetworkConfig benchmark_network(std::size_t hidden_count, std::uint64_t seed) {
  NetworkConfig c;
  c.input_dim = 1;
  c.output_dim = 1;
  c.hidden_count = hidden_count;
  c.weight_range = 1.0;
  c.weight_floor = 1.0;
  c.bias_range = 0.05;
  c.offset_span = 1.0;
  c.activation_gain = 8.0;
  c.seed = seed;
  return c;
}

void BenchmarkSetup::validate() const {
  network.validate();
  target.validate();
  if (network.input_dim != 1 || network.output_dim != 1)
    throw ConfigError("benchmarks are single-input single-output");
  if (points < 2) throw ConfigError("target.points must be >= 2");
  if (!(readout_current > 0.0) || !std::isfinite(readout_current))
    throw ConfigError("readout current must be finite and > 0");
}

void validate_schedule(const AddNoSchedule& schedule) {
  if (schedule.empty()) throw ConfigError("add_no schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i].add_no > kMaxAddNo)
      throw ConfigError("add_no must be in [0, 7]");
    if (i > 0 && schedule[i].iteration <= schedule[i - 1].iteration)
      throw ConfigError("add_no schedule iterations must strictly increase");
  }
}

unsigned add_no_at(const AddNoSchedule& schedule, std::size_t iteration) {
  unsigned value = schedule.empty() ? 0 : schedule.front().add_no;
  for (const auto& step : schedule) {
    if (step.iteration > iteration) break;
    value = step.add_no;
  }
  return value;
}

AddNoSchedule default_step_schedule() { return {{0, 3}, {2000, 0}}; }

HwRunResult train_hardware(const TabNetwork& net, const Dataset& data,
                           double readout_current, const HwRunOptions& options) {
  validate_schedule(options.add_no);
  if (data.size() == 0) throw InputError("dataset is empty");
  if (net.output_dim() != 1) throw InputError("hardware training is SISO");
  if (!(readout_current > 0.0)) throw ConfigError("readout current must be > 0");

  const std::size_t n = data.size();
  const Matrix H = net.hidden_matrix(data.inputs);
  const double inv_scale = 1.0 / readout_current;
  const double target_rms = rms(data.targets);

  HwRunResult result;
  result.dlbs = DlbArray(net.hidden_count(), options.bits,
                         static_cast<std::uint8_t>(add_no_at(options.add_no, 0)));

  const std::size_t total =
      options.iterations > 0 ? options.iterations : options.epochs * n;
  const std::size_t epochs = (total + n - 1) / n;
  Schedule schedule{epochs, options.mode, options.shuffle_seed};
  const auto order = make_schedule(schedule, n);

  TraceRecorder recorder(n, target_rms);
  recorder.trace().reserve(total);
  auto evaluate = [&] {
    const std::vector<double> grid =
        grid_predictions(H, result.dlbs.weights(), readout_current);
    result.final_percent =
        target_rms > 0.0 ? percent_rms_error(grid, data.targets) : 0.0;
    std::vector<double> residual(n);
    for (std::size_t k = 0; k < n; ++k) residual[k] = grid[k] - data.targets[k];
    result.final_rms = rms(residual);
  };

  for (std::size_t it = 0; it < total; ++it) {
    const unsigned add_no = add_no_at(options.add_no, it);
    if (add_no != result.dlbs.add_no()) result.dlbs.set_add_no(add_no);
    const std::size_t k = order[it];
    const Vector h = H.row(static_cast<Eigen::Index>(k)).transpose();
    const StepRecord rec = sol_hw_step_h(result.dlbs, h, data.targets[k] * inv_scale);
    recorder.record(it, it / n, readout_current * std::abs(rec.error(0)));

    if ((it + 1) % n == 0) {
      evaluate();
      result.epoch_percent.push_back(result.final_percent);
      if (options.stop_at_percent && result.final_percent <= *options.stop_at_percent) {
        result.epochs_to_threshold = (it + 1) / n;
        break;
      }
    }
  }
  if (total == 0 || total % n != 0) evaluate();
  result.trace = recorder.take();
  return result;
}

std::pair<OutputWeights, TrainingTrace> train_real(const TabNetwork& net,
                                                   const TrainerKind& trainer,
                                                   const Dataset& data,
                                                   double readout_current,
                                                   const Schedule& schedule) {
  if (!(readout_current > 0.0)) throw ConfigError("readout current must be > 0");
  auto [weights, trace] =
      train_online(net, trainer, scaled(data, 1.0 / readout_current), schedule);
  for (auto& r : trace) {
    r.error *= readout_current;
    r.rms_error *= readout_current;
  }
  return {std::move(weights), std::move(trace)};
}

std::vector<double> grid_predictions(const Matrix& H,
                                     const OutputWeights& weights,
                                     double readout_current) {
  std::vector<double> out(static_cast<std::size_t>(H.rows()));
  for (Eigen::Index k = 0; k < H.rows(); ++k)
    out[static_cast<std::size_t>(k)] =
        readout_current * readout(weights, H.row(k).transpose())(0);
  return out;
}

std::vector<double> predict_grid(const TabNetwork& net,
                                 const OutputWeights& weights,
                                 std::span<const double> inputs,
                                 double readout_current) {
  return grid_predictions(net.hidden_matrix(inputs), weights, readout_current);
}

const SweepSummary& SweepResult::at(std::string_view swept_value) const {
  for (const auto& s : summary)
    if (s.swept_value == swept_value) return s;
  throw InputError("no sweep summary for '" + std::string(swept_value) + "'");
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t replicate) {
  return base_seed + replicate;
}
std::uint64_t network_seed(std::uint64_t cell) { return mix_seed(cell, 0); }
std::uint64_t shuffle_seed(std::uint64_t cell) { return mix_seed(cell, 1); }

SweepResult sweep_bits(const SweepOptions& options,
                       std::span<const unsigned> bits_list) {
  options.setup.validate();
  if (bits_list.empty()) throw ConfigError("bits sweep needs at least one width");
  for (unsigned b : bits_list)
    if (b < 1 || b > kMaxCounterBits) throw ConfigError("counter width out of range");

  const Dataset data = gen_target(options.setup.target, options.setup.points);
  const std::size_t cells = bits_list.size() * options.n_seeds;
  std::vector<SweepRecord> records(cells);
  parallel_for(cells, options.jobs, [&](std::size_t c) {
    const unsigned bits = bits_list[c / options.n_seeds];
    const std::uint64_t seed = cell_seed(options.base_seed, c % options.n_seeds);
    NetworkConfig cfg = options.setup.network;
    cfg.seed = network_seed(seed);
    const TabNetwork net(cfg);
    HwRunOptions run;
    run.bits = bits;
    run.epochs = options.epochs;
    run.shuffle_seed = shuffle_seed(seed);
    const HwRunResult res = train_hardware(net, data, options.setup.readout_current, run);
    records[c] = {std::to_string(bits), seed, res.final_rms, res.final_percent};
  });

  SweepResult out;
  out.kind = "bits";
  std::vector<std::string> order;
  for (unsigned b : bits_list) order.push_back(std::to_string(b));
  out.summary = summarize(records, order);
  out.records = std::move(records);
  return out;
}

SweepResult sweep_shuffle(const SweepOptions& options,
                          std::span<const std::size_t> hidden_counts) {
  options.setup.validate();
  if (hidden_counts.empty()) throw ConfigError("shuffle sweep needs hidden counts");
  const Dataset data = gen_target(options.setup.target, options.setup.points);
  const std::size_t cells = hidden_counts.size() * options.n_seeds * 2;
  std::vector<SweepRecord> records(cells);
  parallel_for(cells, options.jobs, [&](std::size_t c) {
    const std::size_t mode_index = c % 2;
    const std::size_t replicate = (c / 2) % options.n_seeds;
    const std::size_t hidden = hidden_counts[c / (2 * options.n_seeds)];
    const std::uint64_t seed = cell_seed(options.base_seed, replicate);
    NetworkConfig cfg = options.setup.network;
    cfg.hidden_count = hidden;
    cfg.seed = network_seed(seed);
    const TabNetwork net(cfg);
    HwRunOptions run;
    run.bits = options.bits;
    run.epochs = options.epochs;
    run.mode = mode_index == 0 ? ShuffleMode::Random : ShuffleMode::Ordered;
    run.shuffle_seed = shuffle_seed(seed);
    const HwRunResult res = train_hardware(net, data, options.setup.readout_current, run);
    records[c] = {std::to_string(hidden) + (mode_index == 0 ? ":random" : ":ordered"),
                  seed, res.final_rms, res.final_percent};
  });

  SweepResult out;
  out.kind = "shuffle";
  std::vector<std::string> order;
  for (std::size_t h : hidden_counts) {
    order.push_back(std::to_string(h) + ":random");
    order.push_back(std::to_string(h) + ":ordered");
  }
  out.summary = summarize(records, order);
  out.records = std::move(records);
  return out;
}

SweepResult sweep_capacity(const SweepOptions& options,
                           std::span<const std::size_t> hidden_counts) {
  options.setup.validate();
  if (hidden_counts.empty()) throw ConfigError("capacity sweep needs hidden counts");
  if (!(options.threshold_percent > 0.0))
    throw ConfigError("threshold percent must be > 0");
  const Dataset data = gen_target(options.setup.target, options.setup.points);
  const std::size_t cells = hidden_counts.size() * options.n_seeds;
  std::vector<SweepRecord> records(cells);
  parallel_for(cells, options.jobs, [&](std::size_t c) {
    const std::size_t hidden = hidden_counts[c / options.n_seeds];
    const std::uint64_t seed = cell_seed(options.base_seed, c % options.n_seeds);
    NetworkConfig cfg = options.setup.network;
    cfg.hidden_count = hidden;
    cfg.seed = network_seed(seed);
    const TabNetwork net(cfg);
    HwRunOptions run;
    run.bits = options.bits;
    run.epochs = options.max_epochs;
    run.shuffle_seed = shuffle_seed(seed);
    run.stop_at_percent = options.threshold_percent;
    const HwRunResult res = train_hardware(net, data, options.setup.readout_current, run);
    SweepRecord r{std::to_string(hidden), seed, res.final_rms, res.final_percent};
    r.tracks_threshold = true;
    r.converged = res.epochs_to_threshold.has_value();
    r.epochs_to_threshold = res.epochs_to_threshold.value_or(options.max_epochs);
    records[c] = r;
  });

  SweepResult out;
  out.kind = "capacity";
  std::vector<std::string> order;
  for (std::size_t h : hidden_counts) order.push_back(std::to_string(h));
  out.summary = summarize(records, order);
  out.records = std::move(records);
  std::optional<std::size_t> smallest;
  for (std::size_t i = 0; i < hidden_counts.size(); ++i)
    if (out.summary[i].median_epochs &&
        (!smallest || hidden_counts[i] < *smallest))
      smallest = hidden_counts[i];
  out.min_converging_hidden = smallest;
  return out;
}

ScheduleComparison run_step_schedule(const BenchmarkSetup& setup,
                                     const AddNoSchedule& schedule,
                                     std::size_t iterations, std::uint64_t seed,
                                     unsigned bits) {
  setup.validate();
  validate_schedule(schedule);
  if (iterations == 0) throw ConfigError("schedule run needs iterations > 0");
  const Dataset data = gen_target(setup.target, setup.points);
  NetworkConfig cfg = setup.network;
  cfg.seed = network_seed(seed);
  const TabNetwork net(cfg);

  HwRunOptions run;
  run.bits = bits;
  run.iterations = iterations;
  run.shuffle_seed = shuffle_seed(seed);

  ScheduleComparison out;
  out.schedule = schedule;
  run.add_no = schedule;
  out.variable = train_hardware(net, data, setup.readout_current, run).trace;
  run.add_no = {{0, schedule.back().add_no}};
  out.fixed = train_hardware(net, data, setup.readout_current, run).trace;
  return out;
}

std::optional<std::size_t> iterations_to_reach(const TrainingTrace& trace,
                                               double level, std::size_t window) {
  const std::size_t start = window == 0 ? 0 : window - 1;
  for (std::size_t i = start; i < trace.size(); ++i)
    if (trace[i].rms_error <= level) return trace[i].iteration;
  return std::nullopt;
}

}  // namespace tabsol
