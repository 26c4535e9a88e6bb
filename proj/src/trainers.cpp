#include "tabsol/trainers.hpp"

#include <cmath>
#include <string>

#include "tabsol/errors.hpp"

namespace tabsol {

namespace {

void check_shapes(const OutputWeights& weights, const Vector& h,
                  const Vector& y) {
  if (weights.matrix.cols() != h.size())
    throw InputError("activation length " + std::to_string(h.size()) +
                     " does not match readout width " +
                     std::to_string(weights.matrix.cols()));
  if (weights.matrix.rows() != y.size())
    throw InputError("target length " + std::to_string(y.size()) +
                     " does not match readout height " +
                     std::to_string(weights.matrix.rows()));
}

StepRecord begin_step(const OutputWeights& weights, const Vector& h,
                      const Vector& y) {
  check_shapes(weights, h, y);
  StepRecord rec;
  rec.h = h;
  rec.y_target = y;
  rec.y_pred = readout(weights, h);
  rec.error = y - rec.y_pred;
  return rec;
}

// W += e phi'
void apply_outer(OutputWeights& weights, const Vector& e, const Vector& phi) {
  for (Eigen::Index k = 0; k < weights.matrix.rows(); ++k)
    for (Eigen::Index i = 0; i < weights.matrix.cols(); ++i)
      weights.matrix(k, i) += e(k) * phi(i);
}

double error_magnitude(const Vector& e) {
  return e.size() == 0 ? 0.0 : std::sqrt(e.squaredNorm() / static_cast<double>(e.size()));
}

}  // namespace

OpiumState OpiumState::initial(std::size_t hidden_count, double init_scale) {
  if (!(init_scale > 0.0) || !std::isfinite(init_scale))
    throw ConfigError("init_scale must be finite and > 0");
  const auto L = static_cast<Eigen::Index>(hidden_count);
  return {init_scale * Matrix::Identity(L, L), init_scale};
}

std::string_view to_string(TrainerTag tag) {
  switch (tag) {
    case TrainerTag::OpiumFull: return "opium_full";
    case TrainerTag::OpiumNormalized: return "opium_normalized";
    case TrainerTag::LmsConstantGain: return "lms";
    case TrainerTag::SolSign: return "sol";
  }
  return "unknown";
}

TrainerTag trainer_tag_from_string(std::string_view name) {
  if (name == "opium_full") return TrainerTag::OpiumFull;
  if (name == "opium_normalized") return TrainerTag::OpiumNormalized;
  if (name == "lms") return TrainerTag::LmsConstantGain;
  if (name == "sol") return TrainerTag::SolSign;
  throw ConfigError("unknown trainer kind '" + std::string(name) + "'");
}

TrainerKind TrainerKind::defaults(TrainerTag tag) {
  TrainerKind kind;
  kind.tag = tag;
  if (tag == TrainerTag::OpiumNormalized) kind.init_scale = 1.0;
  return kind;
}

void TrainerKind::validate() const {
  if (!(gain > 0.0) || !std::isfinite(gain))
    throw ConfigError("trainer gain must be finite and > 0");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale))
    throw ConfigError("trainer init_scale must be finite and > 0");
}

StepRecord opium_step(OpiumState& state, OutputWeights& weights,
                      const Vector& h, const Vector& y) {
  StepRecord rec = begin_step(weights, h, y);
  const Eigen::Index L = h.size();
  if (state.theta.rows() != L || state.theta.cols() != L)
    throw InputError("theta shape does not match hidden layer");

  const Vector theta_h = state.theta * h;
  const double denom = 1.0 + h.dot(theta_h);
  if (!std::isfinite(denom) || !(denom > 0.0))
    throw NumericError("OPIUM denominator 1 + h'θh = " + std::to_string(denom) +
                       " (θ lost positive definiteness)");
  rec.phi = theta_h / denom;
  rec.normalizer = denom;

  // θ -= (θh)(θh)' / denom, filled symmetrically so θ stays exactly symmetric.
  Matrix theta = state.theta;
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = i; j < L; ++j) {
      const double v = theta(i, j) - (theta_h(i) * theta_h(j)) / denom;
      theta(i, j) = v;
      theta(j, i) = v;
    }
  }
  OutputWeights next = weights;
  apply_outer(next, rec.error, rec.phi);
  if (!theta.allFinite() || !next.matrix.allFinite())
    throw NumericError("OPIUM update produced non-finite values");
  state.theta = std::move(theta);
  weights = std::move(next);
  return rec;
}

StepRecord opium_normalized_step(OutputWeights& weights, const Vector& h,
                                 const Vector& y, double init_scale) {
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be > 0");
  StepRecord rec = begin_step(weights, h, y);
  rec.normalizer = 1.0 / init_scale + h.squaredNorm();
  rec.phi = h / rec.normalizer;
  apply_outer(weights, rec.error, rec.phi);
  return rec;
}

StepRecord lms_step(OutputWeights& weights, const Vector& h, const Vector& y,
                    double gain) {
  if (!(gain > 0.0)) throw ConfigError("gain must be > 0");
  StepRecord rec = begin_step(weights, h, y);
  rec.normalizer = gain;
  rec.phi = h / gain;
  apply_outer(weights, rec.error, rec.phi);
  return rec;
}

StepRecord sol_step(OutputWeights& weights, const Vector& h, const Vector& y,
                    double gain) {
  if (!(gain > 0.0)) throw ConfigError("gain must be > 0");
  StepRecord rec = begin_step(weights, h, y);
  rec.normalizer = gain;
  rec.phi = h / gain;
  const double step = 1.0 / gain;
  for (Eigen::Index k = 0; k < weights.matrix.rows(); ++k) {
    const double se = sign_value(sign_bit(rec.error(k)));
    for (Eigen::Index i = 0; i < weights.matrix.cols(); ++i)
      weights.matrix(k, i) += se * sign_value(sign_bit(h(i))) * step;
  }
  return rec;
}

OutputWeights svd_batch_solve(const Matrix& H, const Matrix& Y, double rcond) {
  if (H.rows() < 1 || H.cols() < 1) throw InputError("H must be non-empty");
  if (H.rows() != Y.rows())
    throw InputError("H and Y must have the same number of rows");
  if (!H.allFinite() || !Y.allFinite())
    throw InputError("H and Y must be finite");

  Eigen::JacobiSVD<Matrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw NumericError("SVD did not converge");
  const Vector& sigma = svd.singularValues();
  const double cutoff = sigma.size() > 0 ? rcond * sigma(0) : 0.0;
  Vector inv = Vector::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff) inv(i) = 1.0 / sigma(i);

  // W' = V Σ⁺ U' Y
  const Matrix wt =
      svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * Y);
  if (!wt.allFinite()) throw NumericError("pseudoinverse solution is not finite");
  return {wt.transpose()};
}

std::pair<OutputWeights, TrainingTrace> train_online(const TabNetwork& net,
                                                     const TrainerKind& trainer,
                                                     const Dataset& data,
                                                     const Schedule& schedule) {
  trainer.validate();
  if (data.size() == 0) throw InputError("dataset is empty");
  if (data.targets.size() != data.inputs.size())
    throw InputError("dataset inputs and targets differ in length");
  if (net.output_dim() != 1)
    throw InputError("train_online drives SISO datasets (output_dim must be 1)");

  const std::size_t n = data.size();
  const Matrix H = net.hidden_matrix(data.inputs);
  OutputWeights weights = OutputWeights::zeros(1, net.hidden_count());
  OpiumState opium;
  if (trainer.tag == TrainerTag::OpiumFull)
    opium = OpiumState::initial(net.hidden_count(), trainer.init_scale);

  const auto order = make_schedule(schedule, n);
  TraceRecorder recorder(n, rms(data.targets));
  recorder.trace().reserve(order.size());
  Vector y(1);
  for (std::size_t it = 0; it < order.size(); ++it) {
    const std::size_t k = order[it];
    const Vector h = H.row(static_cast<Eigen::Index>(k)).transpose();
    y(0) = data.targets[k];
    StepRecord rec;
    switch (trainer.tag) {
      case TrainerTag::OpiumFull:
        rec = opium_step(opium, weights, h, y);
        break;
      case TrainerTag::OpiumNormalized:
        rec = opium_normalized_step(weights, h, y, trainer.init_scale);
        break;
      case TrainerTag::LmsConstantGain:
        rec = lms_step(weights, h, y, trainer.gain);
        break;
      case TrainerTag::SolSign:
        rec = sol_step(weights, h, y, trainer.gain);
        break;
    }
    recorder.record(it, it / n, error_magnitude(rec.error));
  }
  return {std::move(weights), recorder.take()};
}

}  // namespace tabsol
