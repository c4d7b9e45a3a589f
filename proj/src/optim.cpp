// optim.cpp - optimizer implementations.

#include "widthlab/optim.hpp"

#include <cmath>

#include "widthlab/numerics.hpp"

namespace widthlab {

const char* numeric_optimizer_name(NumericOptimizer opt) {
  switch (opt) {
    case NumericOptimizer::SGD: return "sgd";
    case NumericOptimizer::Adam: return "adam";
    case NumericOptimizer::AdamPS: return "adam_ps";
    case NumericOptimizer::AdamAtan2: return "adam_atan2";
  }
  return "?";
}

OptimizerKind scaling_kind(NumericOptimizer opt) {
  switch (opt) {
    case NumericOptimizer::SGD: return OptimizerKind::SGD;
    case NumericOptimizer::Adam: return OptimizerKind::Adam;
    case NumericOptimizer::AdamAtan2: return OptimizerKind::Adam;
    case NumericOptimizer::AdamPS: return OptimizerKind::AdafactorFamily;
  }
  throw std::logic_error("scaling_kind: bad optimizer");
}

void OptimizerConfig::validate() const {
  if (beta1 < 0.0 || beta1 >= 1.0) throw std::invalid_argument("OptimizerConfig: beta1 outside [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw std::invalid_argument("OptimizerConfig: beta2 outside [0, 1)");
  if (atan2_a <= 0.0 || atan2_b <= 0.0) throw std::invalid_argument("OptimizerConfig: atan2 constants must be positive");
  if (update_clip_rms && *update_clip_rms <= 0.0) throw std::invalid_argument("OptimizerConfig: update_clip_rms must be positive");
  if (epsilon_policy.base_epsilon < 0.0) throw std::invalid_argument("OptimizerConfig: base_epsilon must be nonnegative");
  if (epsilon_policy.base_width < 1) throw std::invalid_argument("OptimizerConfig: base_width must be positive");
  if (epsilon_policy.mode == EpsilonMode::PerLayer && !epsilon_policy.gradient_exponents) {
    throw std::invalid_argument("OptimizerConfig: PerLayer epsilon needs gradient exponents");
  }
}

double LearningRateSchedule::gamma(LayerRole role) const {
  switch (role) {
    case LayerRole::Embedding: return gamma_embedding;
    case LayerRole::Hidden: return gamma_hidden;
    case LayerRole::Readout: return gamma_readout;
  }
  throw std::logic_error("LearningRateSchedule::gamma: bad role");
}

double schedule_multiplier(const LearningRateSchedule& s, int t) {
  if (s.warmup_steps > 0 && t < s.warmup_steps) {
    return static_cast<double>(t) / static_cast<double>(s.warmup_steps);
  }
  if (s.decay == DecayKind::Cosine) {
    const double span = static_cast<double>(s.total_steps - s.warmup_steps);
    if (span <= 0.0) return 1.0;
    double frac = static_cast<double>(t - s.warmup_steps) / span;
    if (frac > 1.0) frac = 1.0;
    return 0.5 * (1.0 + std::cos(M_PI * frac));
  }
  return 1.0;
}

double effective_lr(const LearningRateSchedule& s, LayerRole role, int n, int t) {
  const double width_factor =
      std::pow(static_cast<double>(n) / static_cast<double>(s.base_width),
               -s.c.role(role).to_double());
  return s.base_lr * s.gamma(role) * width_factor * schedule_multiplier(s, t);
}

double per_layer_epsilon(const EpsilonPolicy& policy, LayerRole role, int n) {
  if (policy.mode != EpsilonMode::PerLayer) {
    throw std::invalid_argument("per_layer_epsilon: policy mode is not PerLayer");
  }
  if (!policy.gradient_exponents) {
    throw std::invalid_argument("per_layer_epsilon: gradient exponents missing");
  }
  const GradientExponents& g = *policy.gradient_exponents;
  Rat g_role(0);
  switch (role) {
    case LayerRole::Embedding: g_role = g.g_embedding; break;
    case LayerRole::Hidden: g_role = g.g_hidden; break;
    case LayerRole::Readout: g_role = g.g_readout; break;
  }
  const double ratio = static_cast<double>(n) / static_cast<double>(policy.base_width);
  return policy.base_epsilon * std::pow(ratio, -g_role.to_double());
}

namespace {

// Epsilon actually fed to the update rule for a given block.
double epsilon_for(const EpsilonPolicy& policy, LayerRole role, int n) {
  switch (policy.mode) {
    case EpsilonMode::Constant: return policy.base_epsilon;
    case EpsilonMode::PerLayer: return per_layer_epsilon(policy, role, n);
    case EpsilonMode::None: return 0.0;
  }
  throw std::logic_error("epsilon_for: bad mode");
}

double block_rms(const Eigen::MatrixXd& x) {
  return rms_norm(x.data(), static_cast<size_t>(x.size()));
}

}  // namespace

Eigen::MatrixXd adam_update(const Eigen::MatrixXd& m_hat, const Eigen::MatrixXd& v_hat,
                            const OptimizerConfig& cfg, double eps) {
  if (m_hat.rows() != v_hat.rows() || m_hat.cols() != v_hat.cols()) {
    throw std::invalid_argument("adam_update: moment shape mismatch");
  }
  Eigen::MatrixXd out(m_hat.rows(), m_hat.cols());
  if (cfg.kind == NumericOptimizer::AdamAtan2) {
    for (Eigen::Index i = 0; i < m_hat.size(); ++i) {
      out.data()[i] = cfg.atan2_a *
                      std::atan2(m_hat.data()[i], cfg.atan2_b * std::sqrt(v_hat.data()[i]));
    }
  } else {
    out = m_hat.array() / (v_hat.array().sqrt() + eps);
  }
  if (cfg.update_clip_rms) {
    const double rms = block_rms(out);
    if (rms > *cfg.update_clip_rms) out *= (*cfg.update_clip_rms / rms);
  }
  return out;
}

void step(std::vector<ParamBlock>& blocks, OptimizerState& state, const OptimizerConfig& cfg,
          const LearningRateSchedule& schedule, int width, int t) {
  cfg.validate();
  if (t < 1) throw std::invalid_argument("step: t must be >= 1");

  if (state.blocks.empty()) {
    state.blocks.resize(blocks.size());
    for (size_t i = 0; i < blocks.size(); ++i) {
      const Eigen::MatrixXd& w = *blocks[i].weights;
      state.blocks[i].m = Eigen::MatrixXd::Zero(w.rows(), w.cols());
      if (cfg.kind != NumericOptimizer::SGD) {
        state.blocks[i].v = Eigen::MatrixXd::Zero(w.rows(), w.cols());
      }
      state.blocks[i].init_rms = block_rms(w);
    }
  }
  if (state.blocks.size() != blocks.size()) {
    throw std::invalid_argument("step: block count changed mid-run");
  }

  for (size_t i = 0; i < blocks.size(); ++i) {
    ParamBlock& blk = blocks[i];
    BlockState& st = state.blocks[i];
    const Eigen::MatrixXd& g = *blk.grad;
    if (!g.allFinite()) throw DivergenceError(blk.name);

    const double eta = effective_lr(schedule, blk.role, width, t);

    if (cfg.kind == NumericOptimizer::SGD) {
      st.m = cfg.beta1 * st.m + g;
      *blk.weights -= eta * st.m;
      continue;
    }

    st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * g;
    st.v = cfg.beta2 * st.v + (1.0 - cfg.beta2) * g.array().square().matrix();
    Eigen::MatrixXd m_hat = st.m;
    Eigen::MatrixXd v_hat = st.v;
    if (cfg.bias_correction) {
      m_hat /= 1.0 - std::pow(cfg.beta1, t);
      v_hat /= 1.0 - std::pow(cfg.beta2, t);
    }
    const double eps = epsilon_for(cfg.epsilon_policy, blk.role, width);
    Eigen::MatrixXd update = adam_update(m_hat, v_hat, cfg, eps);
    if (cfg.kind == NumericOptimizer::AdamPS) {
      // Parameter scaling: match the update to the block's parameter RMS,
      // floored at a small fraction of the init RMS so zero-initialized
      // blocks are not locked at zero.
      const double scale = std::max(block_rms(*blk.weights), st.init_rms * 1e-3);
      update *= scale;
    }
    *blk.weights -= eta * update;
  }
  state.t = t;
}

}  // namespace widthlab
