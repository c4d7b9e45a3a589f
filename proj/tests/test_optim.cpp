// test_optim.cpp - schedules, epsilon policies, Adam variants (scale
// invariance, small-angle, parameter scaling), clipping, and step semantics.

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "widthlab/numerics.hpp"
#include "widthlab/optim.hpp"

using namespace widthlab;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = scale * gauss(rng);
  return x;
}

double mat_rms(const Eigen::MatrixXd& x) {
  return rms_norm(x.data(), static_cast<size_t>(x.size()));
}

}  // namespace

TEST_CASE("optimizer kinds map onto the symbolic scaling regimes") {
  CHECK(scaling_kind(NumericOptimizer::SGD) == OptimizerKind::SGD);
  CHECK(scaling_kind(NumericOptimizer::Adam) == OptimizerKind::Adam);
  CHECK(scaling_kind(NumericOptimizer::AdamAtan2) == OptimizerKind::Adam);
  CHECK(scaling_kind(NumericOptimizer::AdamPS) == OptimizerKind::AdafactorFamily);
  CHECK(std::string(numeric_optimizer_name(NumericOptimizer::AdamPS)) == "adam_ps");
}

TEST_CASE("config validation rejects out-of-range hyperparameters") {
  OptimizerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.beta1 = 0.9;
  cfg.atan2_b = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.atan2_b = 1.0;
  cfg.update_clip_rms = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.update_clip_rms.reset();
  cfg.epsilon_policy.mode = EpsilonMode::PerLayer;  // no gradient exponents
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("effective learning rate follows the width power law and schedule") {
  LearningRateSchedule s;
  s.base_lr = 0.1;
  s.base_width = 256;
  s.c = {Rat(1), Rat(1), Rat(1)};

  // n = b: the width factor is 1.
  CHECK(effective_lr(s, LayerRole::Hidden, 256, 1) == doctest::Approx(0.1).epsilon(1e-12));

  // n = 4b with gamma = 2: 0.1 * 2 * (1/4).
  s.gamma_hidden = 2.0;
  CHECK(effective_lr(s, LayerRole::Hidden, 1024, 1) == doctest::Approx(0.05).epsilon(1e-12));

  // c = 0 is width-independent.
  s.c = {Rat(0), Rat(0), Rat(0)};
  s.gamma_hidden = 1.0;
  for (int n : {128, 512, 2048}) {
    CHECK(effective_lr(s, LayerRole::Hidden, n, 1) == doctest::Approx(0.1).epsilon(1e-12));
  }

  // Linear warmup then flat.
  s.warmup_steps = 10;
  s.total_steps = 100;
  CHECK(schedule_multiplier(s, 5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(schedule_multiplier(s, 10) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(schedule_multiplier(s, 100) == doctest::Approx(1.0).epsilon(1e-12));

  // Cosine decay from 1 to 0 over the post-warmup span.
  s.decay = DecayKind::Cosine;
  CHECK(schedule_multiplier(s, 10) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(schedule_multiplier(s, 55) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(schedule_multiplier(s, 100) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("per-layer epsilon tracks the gradient exponent") {
  EpsilonPolicy policy;
  policy.mode = EpsilonMode::PerLayer;
  policy.base_epsilon = 1e-12;
  policy.base_width = 1024;
  GradientExponents g;
  g.g_embedding = Rat(1);
  g.g_hidden = rat(3, 2);
  g.g_readout = Rat(0);
  policy.gradient_exponents = g;

  // MFP hidden at n = 4096: 1e-12 * 4^{-1.5} = 1.25e-13.
  CHECK(per_layer_epsilon(policy, LayerRole::Hidden, 4096) ==
        doctest::Approx(1.25e-13).epsilon(1e-12));
  // n = b: the base epsilon for any exponent.
  CHECK(per_layer_epsilon(policy, LayerRole::Embedding, 1024) ==
        doctest::Approx(1e-12).epsilon(1e-12));
  // g = 0: width-independent.
  CHECK(per_layer_epsilon(policy, LayerRole::Readout, 4096) ==
        doctest::Approx(1e-12).epsilon(1e-12));

  policy.gradient_exponents.reset();
  CHECK_THROWS_AS(per_layer_epsilon(policy, LayerRole::Hidden, 512), std::invalid_argument);
  policy.mode = EpsilonMode::Constant;
  CHECK_THROWS_AS(per_layer_epsilon(policy, LayerRole::Hidden, 512), std::invalid_argument);
}

TEST_CASE("adam_update: zero first moment gives a zero update for all variants") {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  const Eigen::MatrixXd v = random_matrix(4, 4, 11).array().square();
  for (NumericOptimizer kind :
       {NumericOptimizer::Adam, NumericOptimizer::AdamPS, NumericOptimizer::AdamAtan2}) {
    OptimizerConfig cfg;
    cfg.kind = kind;
    const Eigen::MatrixXd u = adam_update(m, v, cfg, 1e-9);
    CHECK(u.cwiseAbs().maxCoeff() == 0.0);
  }

  OptimizerConfig cfg;
  CHECK_THROWS_AS(adam_update(m, Eigen::MatrixXd::Zero(3, 4), cfg, 1e-9),
                  std::invalid_argument);
}

TEST_CASE("Adam-atan2 is scale invariant; plain Adam with epsilon is not") {
  const Eigen::MatrixXd m = random_matrix(6, 6, 21, 1e-2);
  const Eigen::MatrixXd v = random_matrix(6, 6, 22, 1e-2).array().square();

  OptimizerConfig atan2_cfg;
  atan2_cfg.kind = NumericOptimizer::AdamAtan2;
  const Eigen::MatrixXd base = adam_update(m, v, atan2_cfg, 0.0);
  for (double lambda : {1e-8, 1.0, 1e8}) {
    const Eigen::MatrixXd scaled =
        adam_update(lambda * m, (lambda * lambda) * v, atan2_cfg, 0.0);
    CHECK((scaled - base).cwiseAbs().maxCoeff() < 1e-12);
  }

  // Plain Adam with eps = 1e-9: at lambda = 1e-8 the scaled sqrt(v) falls to
  // the epsilon scale and the update shrinks by far more than 0.1% relative.
  OptimizerConfig adam_cfg;
  adam_cfg.kind = NumericOptimizer::Adam;
  const double eps = 1e-9;
  const Eigen::MatrixXd plain = adam_update(m, v, adam_cfg, eps);
  const double lambda = 1e-8;
  const Eigen::MatrixXd shrunk = adam_update(lambda * m, (lambda * lambda) * v, adam_cfg, eps);
  const double rel = ((shrunk - plain).cwiseAbs().array() / plain.cwiseAbs().array()).maxCoeff();
  CHECK(rel > 1e-3);
}

TEST_CASE("Adam-atan2 matches plain division in the small-angle regime") {
  OptimizerConfig cfg;
  cfg.kind = NumericOptimizer::AdamAtan2;
  for (double ratio : {1e-8, 1e-6}) {
    Eigen::MatrixXd m(1, 3), v(1, 3);
    m << ratio, -ratio, 0.5 * ratio;
    v << 1.0, 1.0, 1.0;
    const Eigen::MatrixXd u = adam_update(m, v, cfg, 0.0);
    const double tol = (ratio <= 1e-8) ? 1e-15 : 1e-12;
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(u(0, j) - m(0, j)) <= tol * std::abs(m(0, j)));
    }
  }
}

TEST_CASE("update clipping caps the block RMS and leaves small updates untouched") {
  OptimizerConfig cfg;
  cfg.kind = NumericOptimizer::Adam;
  cfg.update_clip_rms = 0.5;
  const Eigen::MatrixXd m = random_matrix(8, 8, 31);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(8, 8, 1e-30);

  // With v ~ 0 the raw update is m / eps-ish; huge, so it must be clipped.
  const Eigen::MatrixXd clipped = adam_update(m, v, cfg, 1e-9);
  CHECK(mat_rms(clipped) <= 0.5 + 1e-12);

  // A small update passes through bitwise.
  OptimizerConfig loose = cfg;
  loose.update_clip_rms = 1e9;
  const Eigen::MatrixXd v2 = Eigen::MatrixXd::Ones(8, 8);
  const Eigen::MatrixXd small = adam_update(m, v2, loose, 1e-9);
  OptimizerConfig unclipped = cfg;
  unclipped.update_clip_rms.reset();
  const Eigen::MatrixXd reference = adam_update(m, v2, unclipped, 1e-9);
  CHECK((small - reference).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Adam with epsilon = 0 is gradient-scale invariant from step 1") {
  const Eigen::MatrixXd g0 = random_matrix(5, 5, 41);
  const double lambda = 1e-8;

  const auto run = [&](double scale, double base_eps) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
    OptimizerConfig cfg;
    cfg.kind = NumericOptimizer::Adam;
    cfg.epsilon_policy.mode = base_eps == 0.0 ? EpsilonMode::None : EpsilonMode::Constant;
    cfg.epsilon_policy.base_epsilon = base_eps;
    LearningRateSchedule sched;
    sched.base_lr = 0.1;
    OptimizerState state;
    for (int t = 1; t <= 5; ++t) {
      Eigen::MatrixXd g = scale * g0 * (1.0 + 0.1 * t);  // vary over steps
      std::vector<ParamBlock> blocks = {{"w", LayerRole::Hidden, &w, &g}};
      step(blocks, state, cfg, sched, 256, t);
    }
    return w;
  };

  const Eigen::MatrixXd w_base = run(1.0, 0.0);
  const Eigen::MatrixXd w_scaled = run(lambda, 0.0);
  const double rel =
      ((w_scaled - w_base).cwiseAbs().array() / w_base.cwiseAbs().array()).maxCoeff();
  CHECK(rel < 1e-12);

  // With a constant epsilon the same scaling visibly changes the trajectory:
  // sqrt(v) ~ lambda drops to the epsilon scale.
  const Eigen::MatrixXd e_base = run(1e-1, 1e-9);
  const Eigen::MatrixXd e_scaled = run(1e-1 * lambda, 1e-9);
  const double rel_eps =
      ((e_scaled - e_base).cwiseAbs().array() / e_base.cwiseAbs().array()).maxCoeff();
  CHECK(rel_eps > 1e-3);
}

TEST_CASE("step: vanilla SGD, momentum accumulation, and divergence error") {
  Eigen::MatrixXd w = random_matrix(3, 3, 51);
  const Eigen::MatrixXd w0 = w;
  Eigen::MatrixXd g = random_matrix(3, 3, 52);

  OptimizerConfig cfg;
  cfg.kind = NumericOptimizer::SGD;
  cfg.beta1 = 0.0;
  LearningRateSchedule sched;
  sched.base_lr = 1.0;
  OptimizerState state;
  std::vector<ParamBlock> blocks = {{"w", LayerRole::Hidden, &w, &g}};
  step(blocks, state, cfg, sched, 256, 1);
  CHECK((w - (w0 - g)).cwiseAbs().maxCoeff() == 0.0);

  // beta1 = 0.9: the second step applies m2 = 0.9 g + g = 1.9 g.
  Eigen::MatrixXd w2 = w0;
  OptimizerConfig mom = cfg;
  mom.beta1 = 0.9;
  OptimizerState state2;
  std::vector<ParamBlock> blocks2 = {{"w", LayerRole::Hidden, &w2, &g}};
  step(blocks2, state2, mom, sched, 256, 1);
  step(blocks2, state2, mom, sched, 256, 2);
  CHECK((w2 - (w0 - g - 1.9 * g)).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXd bad = g;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  std::vector<ParamBlock> blocks3 = {{"w_hidden_2", LayerRole::Hidden, &w2, &bad}};
  OptimizerState state3;
  try {
    step(blocks3, state3, mom, sched, 256, 1);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.block == "w_hidden_2");
  }
}

TEST_CASE("Adam with a persistent gradient saturates to unit-scale updates") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  const Eigen::MatrixXd g = random_matrix(4, 4, 61);

  OptimizerConfig cfg;  // Adam defaults
  LearningRateSchedule sched;
  sched.base_lr = 1e-3;
  OptimizerState state;
  Eigen::MatrixXd prev = w;
  for (int t = 1; t <= 300; ++t) {
    Eigen::MatrixXd grad = g;
    std::vector<ParamBlock> blocks = {{"w", LayerRole::Hidden, &w, &grad}};
    prev = w;
    step(blocks, state, cfg, sched, 256, t);
  }
  // Late-step per-entry |delta| / eta is within 1% of 1 (m_hat/sqrt(v_hat)
  // tends to the sign of the gradient).
  const Eigen::MatrixXd delta = (w - prev).cwiseAbs() / sched.base_lr;
  CHECK(delta.minCoeff() > 0.99);
  CHECK(delta.maxCoeff() < 1.01);
}

TEST_CASE("AdamPS update scale tracks the parameter RMS") {
  Eigen::MatrixXd w = random_matrix(16, 16, 71, 0.5);
  const double rho = mat_rms(w);
  const Eigen::MatrixXd g = random_matrix(16, 16, 72);

  OptimizerConfig cfg;
  cfg.kind = NumericOptimizer::AdamPS;
  LearningRateSchedule sched;
  sched.base_lr = 1e-4;
  OptimizerState state;
  Eigen::MatrixXd prev = w;
  for (int t = 1; t <= 100; ++t) {
    Eigen::MatrixXd grad = g;
    std::vector<ParamBlock> blocks = {{"w", LayerRole::Hidden, &w, &grad}};
    prev = w;
    step(blocks, state, cfg, sched, 256, t);
  }
  const double delta_rms = mat_rms(w - prev);
  // Saturated moments give |update| ~ 1 per entry, so the AdamPS delta RMS is
  // about eta * parameter RMS.
  CHECK(delta_rms == doctest::Approx(sched.base_lr * rho).epsilon(0.05));
}

TEST_CASE("bias correction changes the first step as documented; flag disables it") {
  const Eigen::MatrixXd g = random_matrix(3, 3, 81);
  const auto first_step_delta = [&](bool correct) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    OptimizerConfig cfg;
    cfg.bias_correction = correct;
    cfg.epsilon_policy.base_epsilon = 0.0;
    cfg.epsilon_policy.mode = EpsilonMode::None;
    LearningRateSchedule sched;
    sched.base_lr = 1.0;
    OptimizerState state;
    Eigen::MatrixXd grad = g;
    std::vector<ParamBlock> blocks = {{"w", LayerRole::Hidden, &w, &grad}};
    step(blocks, state, cfg, sched, 256, 1);
    return Eigen::MatrixXd(-w);
  };

  // Corrected: m_hat = g, v_hat = g^2, so the first update is exactly sign(g).
  const Eigen::MatrixXd corrected = first_step_delta(true);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    CHECK(corrected.data()[i] == doctest::Approx(g.data()[i] > 0 ? 1.0 : -1.0).epsilon(1e-12));
  }
  // Uncorrected: (1-beta1)|g| / (sqrt(1-beta2)|g|) = 0.1/sqrt(0.02) ~ 0.707.
  const Eigen::MatrixXd raw = first_step_delta(false);
  const double expect = 0.1 / std::sqrt(0.02);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    CHECK(std::abs(raw.data()[i]) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("identical inputs give bitwise-identical trajectories") {
  const auto run = [] {
    Eigen::MatrixXd w = random_matrix(6, 6, 91, 0.3);
    OptimizerConfig cfg;
    cfg.kind = NumericOptimizer::AdamPS;
    cfg.update_clip_rms = 1.0;
    LearningRateSchedule sched;
    sched.base_lr = 1e-2;
    sched.warmup_steps = 3;
    sched.total_steps = 20;
    sched.decay = DecayKind::Cosine;
    OptimizerState state;
    for (int t = 1; t <= 20; ++t) {
      Eigen::MatrixXd grad = random_matrix(6, 6, 1000 + t);
      std::vector<ParamBlock> blocks = {{"w", LayerRole::Hidden, &w, &grad}};
      step(blocks, state, cfg, sched, 512, t);
    }
    return w;
  };
  const Eigen::MatrixXd a = run();
  const Eigen::MatrixXd b = run();
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}
