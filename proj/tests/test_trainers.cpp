#include <doctest.h>

#include <cmath>

#include "tabsol/benchmark.hpp"
#include "tabsol/errors.hpp"
#include "tabsol/random.hpp"
#include "tabsol/trainers.hpp"

using namespace tabsol;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("opium hand example") {
  OpiumState s = OpiumState::initial(2, 1.0);
  OutputWeights w = OutputWeights::zeros(1, 2);
  const StepRecord rec = opium_step(s, w, vec({1.0, 0.0}), vec({1.0}));
  CHECK(rec.phi(0) == 0.5);
  CHECK(rec.phi(1) == 0.0);
  CHECK(w.matrix(0, 0) == 0.5);
  CHECK(w.matrix(0, 1) == 0.0);
  CHECK(s.theta(0, 0) == 0.5);
  CHECK(s.theta(1, 1) == 1.0);
  CHECK(s.theta(0, 1) == 0.0);
  CHECK(rec.error(0) == 1.0);
}

TEST_CASE("opium with zero error or zero activation") {
  OpiumState s = OpiumState::initial(2, 1.0);
  OutputWeights w{Matrix::Zero(1, 2)};
  w.matrix << 2.0, -1.0;
  const Vector h = vec({0.5, 0.25});
  opium_step(s, w, h, vec({2.0 * 0.5 - 0.25}));
  CHECK(w.matrix(0, 0) == 2.0);
  CHECK(w.matrix(0, 1) == -1.0);
  CHECK(s.theta(0, 0) < 1.0);

  OpiumState s2 = OpiumState::initial(2, 1.0);
  const StepRecord rec = opium_step(s2, w, Vector::Zero(2), vec({5.0}));
  CHECK(rec.phi.isZero());
  CHECK(s2.theta == Matrix::Identity(2, 2));
  CHECK(w.matrix(0, 0) == 2.0);
}

TEST_CASE("opium rejects a lost positive definite theta") {
  OpiumState s{-Matrix::Identity(1, 1), 1.0};
  OutputWeights w = OutputWeights::zeros(1, 1);
  CHECK_THROWS_AS(opium_step(s, w, vec({1.0}), vec({1.0})), NumericError);
  CHECK(w.matrix(0, 0) == 0.0);
  CHECK_THROWS_AS(opium_step(s, w, vec({1.0, 2.0}), vec({1.0})), InputError);
}

TEST_CASE("theta stays symmetric over 1e4 steps") {
  Rng rng(11);
  const Eigen::Index L = 12;
  OpiumState s = OpiumState::initial(static_cast<std::size_t>(L), 1e8);
  OutputWeights w = OutputWeights::zeros(1, static_cast<std::size_t>(L));
  for (int n = 0; n < 10000; ++n) {
    const Vector h = random_matrix(rng, L, 1);
    opium_step(s, w, h, vec({rng.uniform(-1.0, 1.0)}));
  }
  CHECK((s.theta - s.theta.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(s.theta.allFinite());
}

TEST_CASE("normalized opium examples") {
  OutputWeights w = OutputWeights::zeros(1, 3);
  const StepRecord rec = opium_normalized_step(w, vec({1.0, 0.0, 0.0}), vec({1.0}), 1.0);
  CHECK(rec.phi(0) == 0.5);
  CHECK(rec.phi(1) == 0.0);
  CHECK(w.matrix(0, 0) == 0.5);
  CHECK(rec.normalizer == 2.0);

  OutputWeights w0 = OutputWeights::zeros(1, 2);
  CHECK(opium_normalized_step(w0, Vector::Zero(2), vec({3.0}), 1.0).phi.isZero());
  CHECK(w0.matrix.isZero());

  // With c large the gain is h / h'h, so doubling h halves |phi|.
  const Vector h = vec({0.3, -0.4, 0.1});
  OutputWeights a = OutputWeights::zeros(1, 3), b = OutputWeights::zeros(1, 3);
  const double n1 = opium_normalized_step(a, h, vec({1.0}), 1e15).phi.norm();
  const double n2 = opium_normalized_step(b, 2.0 * h, vec({1.0}), 1e15).phi.norm();
  CHECK(n2 == doctest::Approx(n1 / 2.0).epsilon(1e-12));
}

TEST_CASE("lms examples") {
  OutputWeights w = OutputWeights::zeros(1, 2);
  lms_step(w, vec({0.5, 0.5}), vec({1.0}), 8192.0);
  CHECK(w.matrix(0, 0) == 6.103515625e-5);

  OutputWeights z{Matrix::Ones(1, 2)};
  lms_step(z, vec({0.5, 0.5}), vec({1.0}), 8192.0);
  CHECK(z.matrix == Matrix::Ones(1, 2));

  OutputWeights a = OutputWeights::zeros(1, 2), b = OutputWeights::zeros(1, 2);
  lms_step(a, vec({0.3, -0.2}), vec({1.0}), 10.0);
  lms_step(b, vec({0.3, -0.2}), vec({2.0}), 10.0);
  CHECK(b.matrix(0, 0) == doctest::Approx(2.0 * a.matrix(0, 0)));
  CHECK(b.matrix(0, 1) == doctest::Approx(2.0 * a.matrix(0, 1)));
}

TEST_CASE("lms descends on the presented sample") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector h = random_matrix(rng, 6, 1);
    const Vector y = vec({rng.uniform(-2.0, 2.0)});
    OutputWeights w{random_matrix(rng, 1, 6)};
    const double gain = h.squaredNorm() / rng.uniform(0.05, 1.95);
    const double before = (y - w.matrix * h).squaredNorm();
    lms_step(w, h, y, gain);
    const double after = (y - w.matrix * h).squaredNorm();
    CHECK(after < before);
  }
}

TEST_CASE("sol examples and step norm") {
  OutputWeights w = OutputWeights::zeros(1, 1);
  sol_step(w, vec({-0.3}), vec({2.0}), 8192.0);
  CHECK(w.matrix(0, 0) == -1.0 / 8192.0);
  OutputWeights v{Matrix::Constant(1, 1, 0.5)};
  const StepRecord rec = sol_step(v, vec({-0.9}), vec({-0.55}), 8192.0);
  CHECK(rec.error(0) == doctest::Approx(-0.1));
  CHECK(v.matrix(0, 0) == 0.5 + 1.0 / 8192.0);

  Rng rng(8);
  OutputWeights r = OutputWeights::zeros(2, 5);
  for (int n = 0; n < 500; ++n) {
    const Matrix before = r.matrix;
    Vector h = random_matrix(rng, 5, 1);
    if (n % 7 == 0) h(0) = 0.0;
    sol_step(r, h, random_matrix(rng, 2, 1), 64.0);
    const Matrix delta = (r.matrix - before).cwiseAbs();
    CHECK(delta.minCoeff() == doctest::Approx(1.0 / 64.0).epsilon(1e-9));
    CHECK(delta.maxCoeff() == doctest::Approx(1.0 / 64.0).epsilon(1e-9));
  }
}

TEST_CASE("svd solve examples") {
  CHECK(svd_batch_solve(Matrix::Identity(2, 2), Matrix::Identity(2, 2)).matrix ==
        Matrix::Identity(2, 2));
  CHECK(svd_batch_solve(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 4.0))
            .matrix(0, 0) == doctest::Approx(2.0));

  Rng rng(21);
  const Matrix H = random_matrix(rng, 50, 10);
  const Matrix Y = random_matrix(rng, 50, 1);
  const Matrix Wt = svd_batch_solve(H, Y).matrix.transpose();
  const double resid = (H.transpose() * (H * Wt - Y)).norm();
  CHECK(resid <= 1e-8 * H.norm() * Y.norm());
  // Independent oracle: the normal equations solved by Cholesky.
  const Matrix normal = (H.transpose() * H).llt().solve(H.transpose() * Y);
  CHECK((normal - Wt).cwiseAbs().maxCoeff() <= 1e-10);

  CHECK_THROWS_AS(svd_batch_solve(Matrix(0, 2), Matrix(0, 1)), InputError);
  CHECK_THROWS_AS(svd_batch_solve(Matrix::Ones(3, 2), Matrix::Ones(2, 1)), InputError);
}

TEST_CASE("svd truncates a rank-deficient system to the minimum norm solution") {
  Matrix H(3, 2);
  H << 1, 1, 2, 2, 3, 3;
  const Matrix Y = (Matrix(3, 1) << 2, 4, 6).finished();
  const Matrix W = svd_batch_solve(H, Y).matrix;
  CHECK(W(0, 0) == doctest::Approx(1.0));
  CHECK(W(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("opium converges to the pseudoinverse solution") {
  Rng rng(4);
  const Eigen::Index L = 5, n = 40;
  const Matrix H = random_matrix(rng, n, L);
  const Matrix Y = random_matrix(rng, n, 1);
  OpiumState s = OpiumState::initial(static_cast<std::size_t>(L), 1e8);
  OutputWeights w = OutputWeights::zeros(1, static_cast<std::size_t>(L));
  for (int epoch = 0; epoch < 5; ++epoch)
    for (Eigen::Index k = 0; k < n; ++k)
      opium_step(s, w, H.row(k).transpose(), Y.row(k).transpose());
  const Matrix ref = (H.transpose() * H).llt().solve(H.transpose() * Y).transpose();
  const double dist = (w.matrix - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
  CHECK(dist <= 1e-3);
}

TEST_CASE("train_online plumbing") {
  const TabNetwork net(benchmark_network(20, 2));
  const Dataset data = gen_target(TargetFunction::defaults(TargetKind::Sine), 50);

  auto [w0, t0] = train_online(net, TrainerKind{}, data, {0, ShuffleMode::Random, 1});
  CHECK(w0.matrix.isZero());
  CHECK(t0.empty());

  TrainerKind lms = TrainerKind::defaults(TrainerTag::LmsConstantGain);
  lms.gain = 20.0;
  const Dataset scaled{data.inputs, [&] {
                         std::vector<double> t;
                         for (double v : data.targets) t.push_back(v / 100.0);
                         return t;
                       }()};
  auto [w1, t1] = train_online(net, lms, scaled, {30, ShuffleMode::Random, 1});
  auto [w2, t2] = train_online(net, lms, scaled, {30, ShuffleMode::Random, 1});
  CHECK(w1.matrix == w2.matrix);
  REQUIRE(t1.size() == 1500);
  CHECK(t1.back().rms_error == t2.back().rms_error);
  CHECK(t1.back().rms_error < t1[49].rms_error);
  for (std::size_t i = 1; i < t1.size(); ++i) CHECK(t1[i].iteration > t1[i - 1].iteration);

  for (TrainerTag tag : {TrainerTag::OpiumFull, TrainerTag::OpiumNormalized,
                         TrainerTag::SolSign}) {
    auto [w, t] = train_online(net, TrainerKind::defaults(tag), scaled,
                               {3, ShuffleMode::Ordered, 0});
    CHECK(t.size() == 150);
    CHECK(w.matrix.allFinite());
  }
}

TEST_CASE("trainer kinds") {
  CHECK(trainer_tag_from_string("opium_full") == TrainerTag::OpiumFull);
  CHECK(to_string(TrainerTag::SolSign) == "sol");
  CHECK(TrainerKind::defaults(TrainerTag::OpiumNormalized).init_scale == 1.0);
  CHECK(TrainerKind::defaults(TrainerTag::OpiumFull).init_scale == 1e8);
  CHECK_THROWS_AS(trainer_tag_from_string("adam"), ConfigError);
  TrainerKind bad;
  bad.gain = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
