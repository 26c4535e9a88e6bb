#include "tabsol/network.hpp"

#include <cmath>
#include <string>

#include "tabsol/errors.hpp"
#include "tabsol/random.hpp"

namespace tabsol {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::string dims(Eigen::Index got, std::size_t want) {
  return "got " + std::to_string(got) + ", expected " + std::to_string(want);
}

}  // namespace

void NetworkConfig::validate() const {
  if (input_dim < 1 || hidden_count < 1 || output_dim < 1)
    throw ConfigError("network dimensions must all be >= 1");
  if (!finite(weight_range) || !finite(weight_floor) || !finite(bias_range) ||
      !finite(offset_span) || !finite(activation_gain))
    throw ConfigError("network ranges must be finite");
  if (!(activation_gain > 0.0))
    throw ConfigError("activation_gain must be > 0");
  if (weight_range < 0.0 || bias_range < 0.0 || offset_span < 0.0)
    throw ConfigError("weight_range, bias_range and offset_span must be >= 0");
  if (weight_floor < 0.0 || weight_floor > weight_range)
    throw ConfigError("weight_floor must lie in [0, weight_range]");
  if (hidden_count > 1 && !(offset_span > 0.0))
    throw ConfigError("offset_span must be > 0 so that offsets are distinct");
}

Vector systematic_offsets(std::size_t count, double span) {
  Vector offsets(static_cast<Eigen::Index>(count));
  if (count == 1) {
    offsets(0) = 0.0;
    return offsets;
  }
  const double step = 2.0 * span / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    offsets(static_cast<Eigen::Index>(i)) = -span + step * static_cast<double>(i);
  // Pin the last point so the span is exactly symmetric.
  offsets(static_cast<Eigen::Index>(count - 1)) = span;
  return offsets;
}

TabNetwork::TabNetwork(const NetworkConfig& config) : config_(config) {
  config_.validate();
  const auto L = static_cast<Eigen::Index>(config_.hidden_count);
  const auto m = static_cast<Eigen::Index>(config_.input_dim);
  Rng rng(config_.seed);

  input_weights_.resize(L, m);
  const double spread = config_.weight_range - config_.weight_floor;
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double u = rng.uniform(-1.0, 1.0);
      const double magnitude = config_.weight_floor + std::abs(u) * spread;
      input_weights_(i, j) = u < 0.0 ? -magnitude : magnitude;
    }
  }
  biases_.resize(L);
  for (Eigen::Index i = 0; i < L; ++i)
    biases_(i) = rng.uniform(-config_.bias_range, config_.bias_range);
  offsets_ = systematic_offsets(config_.hidden_count, config_.offset_span);
}

TabNetwork::TabNetwork(const NetworkConfig& config, Matrix input_weights,
                       Vector biases, Vector offsets)
    : config_(config),
      input_weights_(std::move(input_weights)),
      biases_(std::move(biases)),
      offsets_(std::move(offsets)) {
  config_.validate();
  const auto L = static_cast<Eigen::Index>(config_.hidden_count);
  const auto m = static_cast<Eigen::Index>(config_.input_dim);
  if (input_weights_.rows() != L || input_weights_.cols() != m)
    throw ConfigError("input weight matrix shape does not match config");
  if (biases_.size() != L || offsets_.size() != L)
    throw ConfigError("bias/offset length does not match hidden_count");
  if (!input_weights_.allFinite() || !biases_.allFinite() ||
      !offsets_.allFinite())
    throw ConfigError("network parameters must be finite");
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = i + 1; j < L; ++j)
      if (offsets_(i) == offsets_(j))
        throw ConfigError("systematic offsets must be pairwise distinct");
}

void TabNetwork::check_input(const Vector& x) const {
  if (x.size() != static_cast<Eigen::Index>(config_.input_dim))
    throw InputError("input length mismatch: " + dims(x.size(), config_.input_dim));
  if (!x.allFinite()) throw InputError("input must be finite");
}

Vector TabNetwork::pre_activations(const Vector& x) const {
  check_input(x);
  return input_weights_ * x + biases_ + offsets_;
}

Vector TabNetwork::hidden_activations(const Vector& x) const {
  Vector h = pre_activations(x);
  for (Eigen::Index i = 0; i < h.size(); ++i)
    h(i) = std::tanh(config_.activation_gain * h(i));
  return h;
}

Matrix TabNetwork::hidden_matrix(std::span<const double> inputs) const {
  if (config_.input_dim != 1)
    throw InputError("hidden_matrix takes scalar inputs (input_dim must be 1)");
  Matrix H(static_cast<Eigen::Index>(inputs.size()),
           static_cast<Eigen::Index>(config_.hidden_count));
  Vector x(1);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    x(0) = inputs[k];
    H.row(static_cast<Eigen::Index>(k)) = hidden_activations(x).transpose();
  }
  return H;
}

TabNetwork init_network(const NetworkConfig& config) { return TabNetwork(config); }

Vector hidden_activations(const TabNetwork& net, const Vector& x) {
  return net.hidden_activations(x);
}

Vector readout(const OutputWeights& weights, const Vector& h) {
  const Matrix& W = weights.matrix;
  if (W.cols() != h.size())
    throw InputError("readout width mismatch: " +
                     dims(h.size(), static_cast<std::size_t>(W.cols())));
  // Plain index-order sum: the emulator and the float rules must agree
  // to the last bit on identical weights.
  Vector y(W.rows());
  for (Eigen::Index k = 0; k < W.rows(); ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < W.cols(); ++i) acc += W(k, i) * h(i);
    y(k) = acc;
  }
  return y;
}

Vector predict(const TabNetwork& net, const OutputWeights& weights,
               const Vector& x) {
  if (weights.matrix.rows() != static_cast<Eigen::Index>(net.output_dim()) ||
      weights.matrix.cols() != static_cast<Eigen::Index>(net.hidden_count()))
    throw InputError("output weights shape does not match network");
  return readout(weights, net.hidden_activations(x));
}

}  // namespace tabsol
