// empirics.hpp - small-MLP empirical side of the laboratory: deterministic
// model initialization, synthetic batches, manual forward/backward with
// parameter multipliers, instrumented training traces (RMS scales, alignment
// ratios), width sweeps with power-law fits, learning-rate sweeps, and twin
// runs for equivalence-class checks.
//
// Conventions: the model has L+1 weight matrices W_1..W_{L+1}; layer 1 is the
// Embedding (d -> n), layers 2..L are Hidden (n -> n), layer L+1 the Readout
// (n -> d). The forward pass is z_1 = phi(n^{-a_1} W_1 x), z_l =
// phi(n^{-a_l} W_l z_{l-1}), logits = n^{-a_{L+1}} W_{L+1} z_L. Activations
// are stored as (dim x batch) matrices.
//
// Instrumented runs train on one fixed synthetic batch (drawn from the run
// seed) so change-from-init quantities and the zero-learning-rate invariance
// are well defined; fresh per-step batches are available as an option, in
// which case change-from-init activation norms are still measured against
// the fixed step-0 batch.

#ifndef WIDTHLAB_EMPIRICS_HPP
#define WIDTHLAB_EMPIRICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "widthlab/numerics.hpp"
#include "widthlab/optim.hpp"
#include "widthlab/paramspace.hpp"

namespace widthlab {

enum class Nonlinearity { Identity, Relu, Gelu };

const char* nonlinearity_name(Nonlinearity nl);

struct ModelShape {
  int n = 256;  // hidden width
  int d = 32;   // input/output dimensionality
  int L = 3;    // depth parameter: L+1 weight matrices, layers 2..L hidden
  Nonlinearity nonlinearity = Nonlinearity::Identity;

  // Throws std::invalid_argument unless n >= d >= 1 and L >= 1.
  void validate() const;
};

struct Model {
  ModelShape shape;
  Parameterization param;
  std::vector<Eigen::MatrixXd> weights;  // index l-1 holds W_l

  int layer_count() const { return shape.L + 1; }
  LayerRole layer_role(int layer) const;  // layer in [1, L+1]
  // Forward multiplier n^{-a} of the layer's role.
  double multiplier(int layer) const;
};

// Deterministic init: every entry i.i.d. N(0, n^{-2 b_role}). The raw
// standard-normal draws depend only on (shape, seed), so two models that
// differ solely in b share their underlying draws (the twin construction).
Model init_model(const Parameterization& p, const ModelShape& shape, uint64_t seed);

struct Batch {
  Eigen::MatrixXd inputs;   // d x batch
  Eigen::MatrixXd targets;  // d x batch
};

// i.i.d. standard-normal inputs and targets; deterministic given the seed.
Batch synth_batch(int d, int batch_size, uint64_t seed);

// Activations of a full forward pass: acts[0] = x, acts[l] = z_l for
// l = 1..L+1 (acts[L+1] are the logits); pre[l-1] holds the pre-nonlinearity
// values of layer l (needed for backprop).
struct ForwardPass {
  std::vector<Eigen::MatrixXd> acts;
  std::vector<Eigen::MatrixXd> pre;
};

ForwardPass forward(const Model& m, const Eigen::MatrixXd& x);

// Mean squared error over all (output, batch) entries.
double mse_loss(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets);

// Backprop through the multipliers; fills grads (same shapes as weights) and
// returns the loss.
double backward(const Model& m, const ForwardPass& f, const Eigen::MatrixXd& targets,
                std::vector<Eigen::MatrixXd>& grads);

// Log alignment ratio A = log_{fan-in}(rms(Wz) / (rms(W) rms(z))) with
// fan-in = columns of W; z may be a single vector or a (fan-in x batch)
// block, in which case the RMS runs over all entries. Throws
// std::invalid_argument on dimension mismatch, zero norms, or fan-in < 2.
double alignment_ratio(const Eigen::MatrixXd& W, const Eigen::MatrixXd& z);

struct TraceRecord {
  int step;
  int layer;  // 1..L+1; 0 for model-level records (loss)
  LayerRole role;
  std::string quantity;
  double value;
};

// Quantity names used in TraceRecord/CSV: activation_rms, param_rms,
// grad_rms, update_rms, w_change_rms, z_change_rms, alignment, loss.
struct ScaleTrace {
  int width = 0;
  uint64_t seed = 0;
  std::vector<int> recorded_steps;
  std::vector<TraceRecord> records;
  std::vector<double> loss_per_step;  // index t: loss of the batch driving update t+1
  bool diverged = false;
  int divergence_step = -1;

  // Value of (step, layer, quantity); throws std::out_of_range if absent.
  double value_at(int step, int layer, const std::string& quantity) const;
};

// Geometric step pattern {0, 1, 2, 5, 10, 20, 50, ...} capped at and always
// including T.
std::vector<int> default_record_steps(int steps);

struct TrainOptions {
  int steps = 50;
  int batch_size = 32;
  uint64_t seed = 0;               // model init and batch seed
  std::vector<int> record_steps;   // empty = default_record_steps(steps)
  bool fresh_batches = false;      // true: new batch every step
  // Multipliers applied to the synthetic inputs/targets. input_scale = 1/sqrt(d)
  // gives unit-norm inputs; a target_scale well above the initial logit RMS
  // makes the backward seed width-independent, which sharpens fitted gradient
  // exponents (otherwise the logits contaminate d(loss)/d(logits) with a
  // width-dependent crossover term at small n).
  double input_scale = 1.0;
  double target_scale = 1.0;
};

// Runs `steps` optimizer steps on the model (modified in place), recording
// scale quantities at the requested steps. Step 0 is the state before any
// update. On NaN/Inf loss or gradients the trace is truncated and marked
// diverged at that step.
ScaleTrace train_instrumented(Model& model, const OptimizerConfig& opt,
                              const LearningRateSchedule& schedule, const TrainOptions& opts);

struct RunSummary {
  int width = 0;
  uint64_t seed = 0;
  bool diverged = false;
  double final_loss = 0.0;
};

// One fitted quantity: power law of the seed-averaged value at fit_step
// against width, with the symbolic prediction where one is defined
// (grad_rms and activation_rms at step 0).
struct QuantityFit {
  std::string quantity;
  int layer = 0;
  LayerRole role = LayerRole::Embedding;
  PowerLawFit fit;
  bool prediction_defined = false;
  double predicted_exponent = 0.0;
};

struct SweepConfig {
  std::vector<int> widths;      // >= 3, strictly increasing
  std::vector<uint64_t> seeds;  // >= 1
  int steps = 1;
  int batch_size = 32;
  int d = 32;
  int L = 3;
  Nonlinearity nonlinearity = Nonlinearity::Identity;
  std::vector<std::string> quantities = {"grad_rms", "activation_rms"};
  int fit_step = 0;
  double input_scale = 1.0;   // see TrainOptions
  double target_scale = 1.0;  // see TrainOptions
};

struct SweepResult {
  Parameterization param;
  std::vector<RunSummary> runs;
  std::vector<ScaleTrace> traces;  // one per (width, seed), widths outer
  std::vector<QuantityFit> fits;
};

// Trains every (width, seed) pair (in parallel up to WIDTHLAB_THREADS),
// averages each quantity over seeds at fit_step, and fits power laws across
// widths. Diverged runs are excluded from fits and flagged in `runs`.
SweepResult width_sweep(const Parameterization& p, const OptimizerConfig& opt,
                        const LearningRateSchedule& schedule_template, const SweepConfig& cfg);

struct LrSweepCell {
  int width = 0;
  double base_lr = 0.0;
  double mean_final_loss = 0.0;  // over non-diverged seeds
  int diverged = 0;
  int total = 0;
};

struct LrSweepConfig {
  std::vector<int> widths;       // >= 3 for the fit
  std::vector<double> base_lrs;  // geometric grid, >= 5 points
  std::vector<uint64_t> seeds;
  int steps = 20;
  int batch_size = 32;
  int d = 32;
  int L = 3;
  Nonlinearity nonlinearity = Nonlinearity::Identity;
  double input_scale = 1.0;   // see TrainOptions
  double target_scale = 1.0;  // see TrainOptions
};

struct LrSweepResult {
  std::vector<std::pair<int, double>> optimal_beta;  // per width
  PowerLawFit fit;                                   // optimal beta vs width
  std::vector<LrSweepCell> cells;
};

// Sweeps the base learning rate at every width; the optimal beta minimizes
// the mean final loss over surviving seeds (ties toward the smaller beta).
// Throws std::runtime_error naming the width if every run diverges there.
LrSweepResult lr_sweep(const Parameterization& p, const OptimizerConfig& opt,
                       const LearningRateSchedule& schedule_template, const LrSweepConfig& cfg);

struct TwinReport {
  std::vector<double> loss_base;     // length steps+1; entry 0 is the init loss
  std::vector<double> loss_shifted;
  double init_logit_rel_dev = 0.0;   // max relative logit deviation at init
  double max_rel_loss_dev = 0.0;     // max over steps of |a-b| / max(|a|, |b|)
};

// Builds the base model from p (learning-rate exponents read from p's c
// fields) and a twin from reparameterize(p, role, theta, ...) per shift,
// sharing the underlying Gaussian draws, then trains both for `steps` on
// identical batches. The twin's schedule carries the shifted c and the
// compensating gamma factor base_width^{k theta} (k = 2 SGD, 1 Adam family,
// 0 AdamPS) so the two runs are mathematically identical trajectories.
TwinReport twin_run(const Parameterization& p,
                    const std::vector<std::pair<LayerRole, Rat>>& shifts, NumericOptimizer opt,
                    const LearningRateSchedule& schedule_base, const ModelShape& shape,
                    uint64_t seed, int steps, int batch_size);

// Schedule whose per-role c exponents are taken from p.
LearningRateSchedule schedule_from(const Parameterization& p, double base_lr, int base_width);

// Thread budget for sweep fan-out: WIDTHLAB_THREADS if set (>= 1), else the
// hardware concurrency, else 1.
int thread_budget();

}  // namespace widthlab

#endif  // WIDTHLAB_EMPIRICS_HPP
