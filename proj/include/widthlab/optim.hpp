// optim.hpp - numerical optimizers with the scaling-relevant features: SGD
// with momentum, Adam, Adam with parameter scaling, Adam-atan2, per-layer
// epsilon policies, per-role learning-rate schedules, and update clipping by
// block RMS.

#ifndef WIDTHLAB_OPTIM_HPP
#define WIDTHLAB_OPTIM_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "widthlab/constraints.hpp"
#include "widthlab/paramspace.hpp"

namespace widthlab {

// Concrete optimizers. AdamPS (Adam + parameter scaling) stands in for the
// Adafactor family; Adam-atan2 shares Adam's scaling regime.
enum class NumericOptimizer { SGD, Adam, AdamPS, AdamAtan2 };

const char* numeric_optimizer_name(NumericOptimizer opt);

// Symbolic scaling regime of a concrete optimizer.
OptimizerKind scaling_kind(NumericOptimizer opt);

enum class EpsilonMode { Constant, PerLayer, None };

// Adam epsilon policy. PerLayer scales the base epsilon with the layer's
// init-time gradient exponent so the epsilon-to-gradient ratio stays
// width-independent: eps_l = base * (n / base_width)^{-g_l}.
struct EpsilonPolicy {
  EpsilonMode mode = EpsilonMode::Constant;
  double base_epsilon = 1e-9;
  int base_width = 256;
  std::optional<GradientExponents> gradient_exponents;  // required for PerLayer
};

struct OptimizerConfig {
  NumericOptimizer kind = NumericOptimizer::Adam;
  double beta1 = 0.9;   // also the SGD momentum coefficient
  double beta2 = 0.98;
  EpsilonPolicy epsilon_policy;
  double atan2_a = 1.0;
  double atan2_b = 1.0;
  std::optional<double> update_clip_rms;  // absent = no clipping
  bool bias_correction = true;

  // Throws std::invalid_argument on out-of-range hyperparameters.
  void validate() const;
};

enum class DecayKind { None, Cosine };

// Per-role learning rate eta_l(t) = base_lr * gamma_l * (n/b)^{-c_l} *
// schedule(t), with linear warmup and optional cosine decay to zero.
struct LearningRateSchedule {
  double base_lr = 0.1;  // beta_n
  double gamma_embedding = 1.0;
  double gamma_hidden = 1.0;
  double gamma_readout = 1.0;
  RoleExponents c;  // per-role learning-rate exponents (zero by default)
  int base_width = 256;
  int warmup_steps = 0;
  int total_steps = 1;
  DecayKind decay = DecayKind::None;

  double gamma(LayerRole role) const;
};

// Warmup/decay multiplier at step t (t >= 1 counts applied updates).
double schedule_multiplier(const LearningRateSchedule& s, int t);

// beta_n * gamma_role * (n/b)^{-c_role} * schedule_multiplier(t).
double effective_lr(const LearningRateSchedule& s, LayerRole role, int n, int t);

// base_epsilon * (n/base_width)^{-g_role}; requires PerLayer mode with
// gradient exponents supplied, otherwise throws std::invalid_argument.
double per_layer_epsilon(const EpsilonPolicy& policy, LayerRole role, int n);

// Bias-corrected-moment Adam step direction (before the learning rate):
// Adam/AdamPS: m_hat / (sqrt(v_hat) + eps); AdamAtan2: a * atan2(m_hat,
// b * sqrt(v_hat)). If cfg.update_clip_rms is set, the result is rescaled so
// its RMS does not exceed the threshold (updates already below it are
// returned unchanged). Throws std::invalid_argument on shape mismatch.
Eigen::MatrixXd adam_update(const Eigen::MatrixXd& m_hat, const Eigen::MatrixXd& v_hat,
                            const OptimizerConfig& cfg, double eps);

// One trainable parameter block. The weight matrix is updated in place.
struct ParamBlock {
  std::string name;
  LayerRole role;
  Eigen::MatrixXd* weights = nullptr;
  const Eigen::MatrixXd* grad = nullptr;
};

struct BlockState {
  Eigen::MatrixXd m;  // first moment (SGD momentum buffer)
  Eigen::MatrixXd v;  // second moment (Adam family only)
  double init_rms = 0.0;  // parameter RMS at the first step (AdamPS floor)
};

struct OptimizerState {
  std::vector<BlockState> blocks;
  long t = 0;  // number of applied steps
};

// Thrown when a gradient or loss turns non-finite; carries the block name.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& where)
      : std::runtime_error("non-finite value in " + where), block(where) {}
  std::string block;
};

// Applies one optimizer step (step index t >= 1) to every block, in place.
// State is created lazily on the first call; shapes must stay consistent
// afterwards. Throws DivergenceError on NaN/Inf gradients.
void step(std::vector<ParamBlock>& blocks, OptimizerState& state, const OptimizerConfig& cfg,
          const LearningRateSchedule& schedule, int width, int t);

}  // namespace widthlab

#endif  // WIDTHLAB_OPTIM_HPP
