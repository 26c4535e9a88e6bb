#pragma once

#include <string_view>
#include <utility>

#include "tabsol/data.hpp"
#include "tabsol/network.hpp"

namespace tabsol {

/// Running inverse autocorrelation for the recursive pseudoinverse rule.
struct OpiumState {
  Matrix theta;  // L x L, symmetric
  double init_scale = 1e8;

  /// theta_0 = init_scale * I.
  static OpiumState initial(std::size_t hidden_count, double init_scale);
};

enum class TrainerTag { OpiumFull, OpiumNormalized, LmsConstantGain, SolSign };

std::string_view to_string(TrainerTag tag);
TrainerTag trainer_tag_from_string(std::string_view name);

struct TrainerKind {
  TrainerTag tag = TrainerTag::SolSign;
  double gain = 8192.0;      // N for the constant-gain rules
  double init_scale = 1e8;   // c for the OPIUM variants

  /// Per-rule defaults: c = 1 for the normalized rule, 1e8 otherwise.
  static TrainerKind defaults(TrainerTag tag);

  void validate() const;
};

struct StepRecord {
  Vector h;
  Vector y_target;
  Vector y_pred;
  Vector error;  // y_target - y_pred
  Vector phi;
  double normalizer = 0.0;  // scalar denominator of phi (N_var, N, or 1 + h'θh)
};

/// Full recursive pseudoinverse update. Throws NumericError when theta or the
/// weights stop being finite.
StepRecord opium_step(OpiumState& state, OutputWeights& weights,
                      const Vector& h, const Vector& y);

/// phi = h / (1/c + h'h).
StepRecord opium_normalized_step(OutputWeights& weights, const Vector& h,
                                 const Vector& y, double init_scale);

/// W += e (h / N)'.
StepRecord lms_step(OutputWeights& weights, const Vector& h, const Vector& y,
                    double gain);

/// w_ki += sign(e_k) sign(h_i) / N; zero counts as positive.
StepRecord sol_step(OutputWeights& weights, const Vector& h, const Vector& y,
                    double gain);

/// Minimum-norm least squares W' = pinv(H) Y. H is n x L, Y is n x K.
OutputWeights svd_batch_solve(const Matrix& H, const Matrix& Y,
                              double rcond = 1e-12);

/// Drives one step rule over a SISO dataset, starting from W = 0.
std::pair<OutputWeights, TrainingTrace> train_online(const TabNetwork& net,
                                                     const TrainerKind& trainer,
                                                     const Dataset& data,
                                                     const Schedule& schedule);

}  // namespace tabsol
