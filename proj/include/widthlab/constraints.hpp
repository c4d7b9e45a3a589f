// constraints.hpp - the alignment-general stability / nontriviality constraint
// system: gradient and update scale exponents, training-stability evaluation,
// the max-stable learning-rate solver, and regime classification.
//
// Everything here is exact rational arithmetic on immutable inputs.

#ifndef WIDTHLAB_CONSTRAINTS_HPP
#define WIDTHLAB_CONSTRAINTS_HPP

#include <string>
#include <vector>

#include "widthlab/paramspace.hpp"
#include "widthlab/rat.hpp"

namespace widthlab {

// Alignment exponents (alpha, omega, u) per role, each in [1/2, 1]: they
// govern how ||dW*z||, ||W*dz||, ||dW*dz|| scale relative to the product of
// factor norms (1/2 = no correlation, CLT floor; 1 = full correlation, LLN
// ceiling). The embedding layer has no alignment fields: its input is fixed
// data, so its row carries no alignment variable.
struct AlignmentAssumption {
  Rat alpha_hidden, alpha_readout;
  Rat omega_hidden, omega_readout;
  Rat u_hidden, u_readout;
  std::string name;  // optional label

  // alpha = u = 1, omega = 1/2 everywhere.
  static AlignmentAssumption full_alignment();
  // alpha = omega = u = 1/2 everywhere.
  static AlignmentAssumption no_alignment();
  // alpha = 1 everywhere, omega_hidden = 1/2, omega_readout = 1, u = 1.
  static AlignmentAssumption tensor_programs();

  // Throws std::invalid_argument when any field leaves [1/2, 1]; the solver's
  // monotonicity arguments assume this range.
  void validate() const;

  bool operator==(const AlignmentAssumption& o) const;
};

// Negative exponents of the gradient RMS per role at initialization
// (gradient scale ~ n^{-g}). Computed, never user-set.
struct GradientExponents {
  Rat g_embedding, g_hidden, g_readout;
  bool operator==(const GradientExponents& o) const {
    return g_embedding == o.g_embedding && g_hidden == o.g_hidden && g_readout == o.g_readout;
  }
};

// A per-role rational vector (learning-rate exponents, update exponents).
struct RoleExponents {
  Rat embedding, hidden, readout;
  const Rat& role(LayerRole r) const;
  bool operator==(const RoleExponents& o) const {
    return embedding == o.embedding && hidden == o.hidden && readout == o.readout;
  }
};

// One constraint term that attains its row's minimum, identified by the
// names of the constraint-table rows: "embedding.dWx", "hidden.dWz",
// "hidden.Wdz", "hidden.dWdz", "logit.dWz", "logit.Wdz", "logit.dWdz",
// "adafactor.c_nonneg".
struct BindingConstraint {
  std::string name;
  Rat value;
  bool operator==(const BindingConstraint& o) const { return name == o.name && value == o.value; }
};

struct ConstraintReport {
  GradientExponents g;  // at initialization (covariant under the theta-shift)
  Rat r_embedding;      // residual of the embedding row
  Rat r_hidden;         // residual after the last hidden application
  Rat r_readout_input;  // r_L, the residual feeding the readout (= r_hidden)
  Rat logit_margin;     // min over the three readout-row terms
  bool stable = false;          // all residuals >= 0, margin >= 0, extra checks ok
  bool nontrivial = false;      // some logit term equals 0 exactly
  bool feature_learning = false;  // stable and r_L = 0
  bool adafactor_extra_ok = true;  // c >= 0 on every layer (AdafactorFamily only)
  std::vector<BindingConstraint> binding;  // all terms equal to their row minimum
  // Diagnostic: whether one more hidden application would leave r_hidden
  // unchanged. False is expected when omega_hidden > 1/2, where the residual
  // keeps decaying with depth; under the named assumptions (omega_hidden =
  // 1/2) solved points always reach a fixed point.
  bool fixed_point_reached = true;
};

// Gradient scale exponents at initialization: g_l = a_l + a_{L+1} + b_{L+1}
// for l <= L and g_{L+1} = a_{L+1}. The closed form relies on the
// cancellations init stability provides, so an init-unstable input throws
// std::invalid_argument.
GradientExponents gradient_exponents(const Parameterization& p);

// Negative exponent of the update scale ||dW|| per role: c+g for SGD, c for
// Adam, c+b for AdafactorFamily. Same precondition as gradient_exponents.
RoleExponents update_exponents(const Parameterization& p, OptimizerKind opt);

// Evaluates the full constraint table for a parameterization with learning
// rate exponents already set in p. depth_L is the depth parameter (layers
// 1..L+1, hidden layers 2..L): the hidden recursion is applied exactly
// min(L-1, 8) times. Init-unstable p or invalid alignment throws
// std::invalid_argument.
ConstraintReport training_stability(const Parameterization& p, OptimizerKind opt,
                                    const AlignmentAssumption& align, int depth_L = 3);

struct MaxStableResult {
  RoleExponents c;          // solved learning-rate exponents, one per role
  ConstraintReport report;  // training_stability at the solved c
  Rat r_floor;              // smallest achievable r_L: max(0, omega_r - (a_r+b_r));
                            // > 0 means feature learning is unattainable
};

// Greedy layer-by-layer solve (embedding -> hidden -> readout) for the
// minimal stable c per role (most negative exponent = largest learning
// rate), honoring AdafactorFamily's extra c >= 0 requirement. For SGD the
// readout exponent is resolved first (its row plus the c_r >= b_r - a_r
// clamp that keeps the backward signal at init scale, which greedy
// embedding-first maximization forces); embedding and hidden rows then use
// the resulting gradient scale. Preconditions as training_stability.
MaxStableResult max_stable_lr(const Parameterization& p_init, OptimizerKind opt,
                              const AlignmentAssumption& align, int depth_L = 3);

enum class Regime { Unstable, Trivial, Kernel, FeatureLearning };

const char* regime_name(Regime regime);

// Regime of (p with learning-rate exponents c) under the given optimizer and
// alignment: Unstable if stability fails; Trivial if stable but no
// nontriviality equality holds; FeatureLearning if stable, nontrivial and
// r_L = 0; Kernel if stable, nontrivial and r_L > 0.
Regime classify(const Parameterization& p, OptimizerKind opt, const AlignmentAssumption& align,
                const RoleExponents& c, int depth_L = 3);

}  // namespace widthlab

#endif  // WIDTHLAB_CONSTRAINTS_HPP
