#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace tabsol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Hardware sign convention: 1 is negative, 0 is positive (zero included).
using Bit = std::uint8_t;

struct NetworkConfig {
  std::size_t input_dim = 1;
  std::size_t hidden_count = 100;
  std::size_t output_dim = 1;
  // Input weights are drawn with magnitude uniform on [weight_floor,
  // weight_range] and a fair random sign. weight_floor = 0 is the plain
  // symmetric uniform draw on [-weight_range, weight_range].
  double weight_range = 1.0;
  double weight_floor = 0.0;
  double bias_range = 1.0;
  double offset_span = 1.0;
  double activation_gain = 1.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Frozen random encoder: h_i = tanh(gain * (w_i . x + b_i + o_i)).
class TabNetwork {
 public:
  /// Draws weights and biases from config.seed; offsets are evenly spaced.
  explicit TabNetwork(const NetworkConfig& config);

  /// Explicit parameters (model loading, hand-built test networks).
  TabNetwork(const NetworkConfig& config, Matrix input_weights, Vector biases,
             Vector offsets);

  const NetworkConfig& config() const { return config_; }
  const Matrix& input_weights() const { return input_weights_; }
  const Vector& biases() const { return biases_; }
  const Vector& offsets() const { return offsets_; }

  std::size_t input_dim() const { return config_.input_dim; }
  std::size_t hidden_count() const { return config_.hidden_count; }
  std::size_t output_dim() const { return config_.output_dim; }

  Vector pre_activations(const Vector& x) const;
  Vector hidden_activations(const Vector& x) const;

  /// Activations for a batch of SISO inputs, one row per input (n x L).
  Matrix hidden_matrix(std::span<const double> inputs) const;

 private:
  void check_input(const Vector& x) const;

  NetworkConfig config_;
  Matrix input_weights_;  // L x m
  Vector biases_;
  Vector offsets_;
};

struct OutputWeights {
  Matrix matrix;  // K x L

  static OutputWeights zeros(std::size_t output_dim, std::size_t hidden_count) {
    return {Matrix::Zero(static_cast<Eigen::Index>(output_dim),
                         static_cast<Eigen::Index>(hidden_count))};
  }
};

TabNetwork init_network(const NetworkConfig& config);

/// L evenly spaced values on [-span, span]; a single neuron sits at 0.
Vector systematic_offsets(std::size_t count, double span);

Vector hidden_activations(const TabNetwork& net, const Vector& x);

/// weights.matrix * hidden_activations(net, x).
Vector predict(const TabNetwork& net, const OutputWeights& weights,
               const Vector& x);

/// Readout of precomputed activations; shared by the float and emulated paths.
Vector readout(const OutputWeights& weights, const Vector& h);

inline Bit sign_bit(double v) { return v < 0.0 ? 1 : 0; }

/// Maps a sign bit onto {+1, -1}.
inline double sign_value(Bit b) { return b ? -1.0 : 1.0; }

}  // namespace tabsol
