#include "widthlab/empirics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "widthlab/constraints.hpp"

namespace widthlab {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double nl_value(Nonlinearity nl, double x) {
  switch (nl) {
    case Nonlinearity::Identity:
      return x;
    case Nonlinearity::Relu:
      return x > 0.0 ? x : 0.0;
    case Nonlinearity::Gelu:
      return 0.5 * x * (1.0 + std::erf(x / kSqrt2));
  }
  throw std::logic_error("nl_value: unknown nonlinearity");
}

double nl_deriv(Nonlinearity nl, double x) {
  switch (nl) {
    case Nonlinearity::Identity:
      return 1.0;
    case Nonlinearity::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Nonlinearity::Gelu:
      return 0.5 * (1.0 + std::erf(x / kSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
  }
  throw std::logic_error("nl_deriv: unknown nonlinearity");
}

double matrix_rms(const Eigen::MatrixXd& m) {
  return rms_norm(m.data(), static_cast<std::size_t>(m.size()));
}

// splitmix64: decorrelates the per-step batch seeds from the base seed.
uint64_t mix_seed(uint64_t seed, uint64_t t) {
  uint64_t z = seed + (t + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void push_record(ScaleTrace& tr, int step, int layer, LayerRole role, const char* quantity,
                 double value) {
  tr.records.push_back(TraceRecord{step, layer, role, quantity, value});
}

std::string block_name(int layer, LayerRole role) {
  return "W" + std::to_string(layer) + "_" + role_name(role);
}

// Runs f(0..n-1) on up to thread_budget() workers; task index -> result slot
// is fixed, so the outcome does not depend on scheduling. The first exception
// thrown by any task is rethrown on the calling thread.
template <typename F>
void parallel_for(int n, F&& f) {
  const int workers = std::min(thread_budget(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

RoleExponents exponents_of(const Parameterization& p) {
  return RoleExponents{p.embedding.c, p.hidden.c, p.readout.c};
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

}  // namespace

const char* nonlinearity_name(Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::Identity:
      return "identity";
    case Nonlinearity::Relu:
      return "relu";
    case Nonlinearity::Gelu:
      return "gelu";
  }
  throw std::logic_error("nonlinearity_name: unknown nonlinearity");
}

void ModelShape::validate() const {
  if (d < 1) throw std::invalid_argument("ModelShape: d must be >= 1");
  if (n < d) throw std::invalid_argument("ModelShape: n must be >= d");
  if (L < 1) throw std::invalid_argument("ModelShape: L must be >= 1");
}

LayerRole Model::layer_role(int layer) const {
  if (layer < 1 || layer > shape.L + 1)
    throw std::invalid_argument("Model::layer_role: layer out of range");
  if (layer == 1) return LayerRole::Embedding;
  if (layer == shape.L + 1) return LayerRole::Readout;
  return LayerRole::Hidden;
}

double Model::multiplier(int layer) const {
  const Rat a = param.role(layer_role(layer)).a;
  return std::pow(static_cast<double>(shape.n), -a.to_double());
}

Model init_model(const Parameterization& p, const ModelShape& shape, uint64_t seed) {
  shape.validate();
  Model m;
  m.shape = shape;
  m.param = p;
  m.weights.reserve(static_cast<std::size_t>(shape.L + 1));
  std::mt19937_64 rng(seed);
  for (int layer = 1; layer <= shape.L + 1; ++layer) {
    const int rows = (layer == shape.L + 1) ? shape.d : shape.n;
    const int cols = (layer == 1) ? shape.d : shape.n;
    Eigen::MatrixXd w(rows, cols);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = gauss(rng);
    const Rat b = p.role(m.layer_role(layer)).b;
    const double std_scale = std::pow(static_cast<double>(shape.n), -b.to_double());
    if (std_scale != 1.0) w *= std_scale;
    m.weights.push_back(std::move(w));
  }
  return m;
}

Batch synth_batch(int d, int batch_size, uint64_t seed) {
  if (d < 1) throw std::invalid_argument("synth_batch: d must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("synth_batch: batch_size must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Batch batch;
  batch.inputs.resize(d, batch_size);
  batch.targets.resize(d, batch_size);
  for (int j = 0; j < batch_size; ++j)
    for (int i = 0; i < d; ++i) batch.inputs(i, j) = gauss(rng);
  for (int j = 0; j < batch_size; ++j)
    for (int i = 0; i < d; ++i) batch.targets(i, j) = gauss(rng);
  return batch;
}

ForwardPass forward(const Model& m, const Eigen::MatrixXd& x) {
  if (x.rows() != m.shape.d) throw std::invalid_argument("forward: input rows must equal d");
  const int layers = m.layer_count();
  ForwardPass f;
  f.acts.reserve(static_cast<std::size_t>(layers) + 1);
  f.pre.reserve(static_cast<std::size_t>(layers));
  f.acts.push_back(x);
  for (int layer = 1; layer <= layers; ++layer) {
    Eigen::MatrixXd h = m.multiplier(layer) * (m.weights[static_cast<std::size_t>(layer - 1)] *
                                               f.acts.back());
    const bool linear = layer == layers || m.shape.nonlinearity == Nonlinearity::Identity;
    if (linear) {
      f.pre.push_back(h);
      f.acts.push_back(std::move(h));
    } else {
      Eigen::MatrixXd z =
          h.unaryExpr([nl = m.shape.nonlinearity](double v) { return nl_value(nl, v); });
      f.pre.push_back(std::move(h));
      f.acts.push_back(std::move(z));
    }
  }
  return f;
}

double mse_loss(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  return (logits - targets).squaredNorm() / static_cast<double>(logits.size());
}

double backward(const Model& m, const ForwardPass& f, const Eigen::MatrixXd& targets,
                std::vector<Eigen::MatrixXd>& grads) {
  const int layers = m.layer_count();
  if (f.acts.size() != static_cast<std::size_t>(layers) + 1 ||
      f.pre.size() != static_cast<std::size_t>(layers))
    throw std::invalid_argument("backward: forward pass does not match model");
  const Eigen::MatrixXd& logits = f.acts.back();
  const double loss = mse_loss(logits, targets);
  grads.resize(static_cast<std::size_t>(layers));
  // delta = dL/dh_layer, starting from the MSE derivative at the logits.
  Eigen::MatrixXd delta = (2.0 / static_cast<double>(logits.size())) * (logits - targets);
  for (int layer = layers; layer >= 1; --layer) {
    const double s = m.multiplier(layer);
    grads[static_cast<std::size_t>(layer - 1)] =
        s * (delta * f.acts[static_cast<std::size_t>(layer - 1)].transpose());
    if (layer > 1) {
      Eigen::MatrixXd dz =
          s * (m.weights[static_cast<std::size_t>(layer - 1)].transpose() * delta);
      if (m.shape.nonlinearity == Nonlinearity::Identity) {
        delta = std::move(dz);
      } else {
        const Eigen::MatrixXd& pre = f.pre[static_cast<std::size_t>(layer - 2)];
        delta = dz.cwiseProduct(
            pre.unaryExpr([nl = m.shape.nonlinearity](double v) { return nl_deriv(nl, v); }));
      }
    }
  }
  return loss;
}

double alignment_ratio(const Eigen::MatrixXd& W, const Eigen::MatrixXd& z) {
  if (z.rows() != W.cols())
    throw std::invalid_argument("alignment_ratio: z rows must equal the fan-in of W");
  if (W.cols() < 2)
    throw std::invalid_argument("alignment_ratio: fan-in must be >= 2 for the log base");
  const double w_rms = matrix_rms(W);
  const double z_rms = matrix_rms(z);
  if (w_rms == 0.0 || z_rms == 0.0)
    throw std::invalid_argument("alignment_ratio: zero-norm operand");
  const double wz_rms = matrix_rms(Eigen::MatrixXd(W * z));
  if (wz_rms == 0.0) throw std::invalid_argument("alignment_ratio: zero-norm product");
  return std::log(wz_rms / (w_rms * z_rms)) / std::log(static_cast<double>(W.cols()));
}

double ScaleTrace::value_at(int step, int layer, const std::string& quantity) const {
  for (const TraceRecord& r : records)
    if (r.step == step && r.layer == layer && r.quantity == quantity) return r.value;
  throw std::out_of_range("ScaleTrace::value_at: no record for step " + std::to_string(step) +
                          ", layer " + std::to_string(layer) + ", quantity " + quantity);
}

std::vector<int> default_record_steps(int steps) {
  if (steps < 0) throw std::invalid_argument("default_record_steps: steps must be >= 0");
  std::vector<int> out{0};
  bool done = false;
  for (long base = 1; !done; base *= 10) {
    for (long mult : {1L, 2L, 5L}) {
      const long s = base * mult;
      if (s > steps) {
        done = true;
        break;
      }
      out.push_back(static_cast<int>(s));
    }
  }
  if (steps > 0 && out.back() != steps) out.push_back(steps);
  return out;
}

namespace {

// Scale records of one step. Activation/alignment quantities come from
// `state` (the current weights evaluated on the step's batch); z_change is
// measured on the probe batch against the stored step-0 activations.
void record_step(ScaleTrace& tr, const Model& model, int step, const ForwardPass& state,
                 const std::vector<Eigen::MatrixXd>& grads,
                 const std::vector<Eigen::MatrixXd>* pre_step_weights,
                 const std::vector<Eigen::MatrixXd>& init_weights,
                 const std::vector<Eigen::MatrixXd>& init_probe_acts,
                 const ForwardPass& probe_state, double loss) {
  const int layers = model.layer_count();
  for (int layer = 1; layer <= layers; ++layer) {
    const std::size_t i = static_cast<std::size_t>(layer - 1);
    const LayerRole role = model.layer_role(layer);
    const Eigen::MatrixXd& w = model.weights[i];
    push_record(tr, step, layer, role, "activation_rms",
                matrix_rms(state.acts[static_cast<std::size_t>(layer)]));
    push_record(tr, step, layer, role, "param_rms", matrix_rms(w));
    push_record(tr, step, layer, role, "grad_rms", matrix_rms(grads[i]));
    const double update_rms =
        pre_step_weights ? matrix_rms(Eigen::MatrixXd(w - (*pre_step_weights)[i])) : 0.0;
    push_record(tr, step, layer, role, "update_rms", update_rms);
    push_record(tr, step, layer, role, "w_change_rms",
                matrix_rms(Eigen::MatrixXd(w - init_weights[i])));
    push_record(tr, step, layer, role, "z_change_rms",
                matrix_rms(Eigen::MatrixXd(probe_state.acts[static_cast<std::size_t>(layer)] -
                                           init_probe_acts[i])));
    push_record(tr, step, layer, role, "alignment",
                alignment_ratio(w, state.acts[static_cast<std::size_t>(layer - 1)]));
  }
  push_record(tr, step, 0, LayerRole::Embedding, "loss", loss);
}

}  // namespace

ScaleTrace train_instrumented(Model& model, const OptimizerConfig& opt,
                              const LearningRateSchedule& schedule, const TrainOptions& opts) {
  model.shape.validate();
  opt.validate();
  if (opts.steps < 1) throw std::invalid_argument("train_instrumented: steps must be >= 1");
  if (opts.batch_size < 1)
    throw std::invalid_argument("train_instrumented: batch_size must be >= 1");
  if (!(opts.input_scale > 0.0) || !std::isfinite(opts.input_scale))
    throw std::invalid_argument("train_instrumented: input_scale must be positive and finite");
  if (!(opts.target_scale > 0.0) || !std::isfinite(opts.target_scale))
    throw std::invalid_argument("train_instrumented: target_scale must be positive and finite");
  const auto make_batch = [&](uint64_t step) {
    Batch b = synth_batch(model.shape.d, opts.batch_size, mix_seed(opts.seed, step));
    b.inputs *= opts.input_scale;
    b.targets *= opts.target_scale;
    return b;
  };
  std::vector<int> rec =
      opts.record_steps.empty() ? default_record_steps(opts.steps) : opts.record_steps;
  std::sort(rec.begin(), rec.end());
  rec.erase(std::unique(rec.begin(), rec.end()), rec.end());
  if (!rec.empty() && (rec.front() < 0 || rec.back() > opts.steps))
    throw std::invalid_argument("train_instrumented: record step outside [0, steps]");
  const auto recorded = [&rec](int t) { return std::binary_search(rec.begin(), rec.end(), t); };

  ScaleTrace tr;
  tr.width = model.shape.n;
  tr.seed = opts.seed;
  tr.recorded_steps = rec;

  const Batch probe = make_batch(0);
  const std::vector<Eigen::MatrixXd> init_weights = model.weights;

  ForwardPass probe_state = forward(model, probe.inputs);
  std::vector<Eigen::MatrixXd> init_probe_acts(probe_state.acts.begin() + 1,
                                               probe_state.acts.end());
  std::vector<Eigen::MatrixXd> grads;
  const double init_loss = backward(model, probe_state, probe.targets, grads);
  if (!std::isfinite(init_loss)) {
    tr.diverged = true;
    tr.divergence_step = 0;
    return tr;
  }
  tr.loss_per_step.push_back(init_loss);
  if (recorded(0))
    record_step(tr, model, 0, probe_state, grads, nullptr, init_weights, init_probe_acts,
                probe_state, init_loss);

  OptimizerState state;
  const int layers = model.layer_count();
  for (int t = 1; t <= opts.steps; ++t) {
    // Gradient for update t, at the weights after t-1 updates.
    Batch fresh;
    const Batch* batch = &probe;
    ForwardPass step_state;
    const ForwardPass* grad_state = &probe_state;
    if (opts.fresh_batches) {
      fresh = make_batch(static_cast<uint64_t>(t));
      batch = &fresh;
      step_state = forward(model, batch->inputs);
      grad_state = &step_state;
    }
    const double grad_loss = backward(model, *grad_state, batch->targets, grads);
    if (!std::isfinite(grad_loss)) {
      tr.diverged = true;
      tr.divergence_step = t;
      return tr;
    }

    std::vector<Eigen::MatrixXd> pre_step_weights;
    if (recorded(t)) pre_step_weights = model.weights;

    std::vector<ParamBlock> blocks;
    blocks.reserve(static_cast<std::size_t>(layers));
    for (int layer = 1; layer <= layers; ++layer) {
      const LayerRole role = model.layer_role(layer);
      blocks.push_back(ParamBlock{block_name(layer, role), role,
                                  &model.weights[static_cast<std::size_t>(layer - 1)],
                                  &grads[static_cast<std::size_t>(layer - 1)]});
    }
    try {
      step(blocks, state, opt, schedule, model.shape.n, t);
    } catch (const DivergenceError&) {
      tr.diverged = true;
      tr.divergence_step = t;
      return tr;
    }

    probe_state = forward(model, probe.inputs);
    const double loss_after = mse_loss(probe_state.acts.back(), probe.targets);
    if (!std::isfinite(loss_after)) {
      tr.diverged = true;
      tr.divergence_step = t;
      return tr;
    }
    tr.loss_per_step.push_back(loss_after);

    if (recorded(t)) {
      if (opts.fresh_batches) {
        // Measure activation quantities on the step's own batch at the
        // post-update weights.
        step_state = forward(model, batch->inputs);
        record_step(tr, model, t, step_state, grads, &pre_step_weights, init_weights,
                    init_probe_acts, probe_state, loss_after);
      } else {
        record_step(tr, model, t, probe_state, grads, &pre_step_weights, init_weights,
                    init_probe_acts, probe_state, loss_after);
      }
    }
  }
  return tr;
}

namespace {

struct FitPoint {
  double width = 0.0;
  double value = 0.0;
};

void append_fit(std::vector<QuantityFit>& fits, const std::string& quantity, int layer,
                LayerRole role, const std::vector<FitPoint>& points, bool prediction_defined,
                double predicted) {
  if (points.size() < 3) return;  // not enough surviving widths for a fit
  std::vector<std::pair<double, double>> xy;
  xy.reserve(points.size());
  for (const FitPoint& pt : points) xy.emplace_back(pt.width, pt.value);
  QuantityFit qf;
  qf.quantity = quantity;
  qf.layer = layer;
  qf.role = role;
  qf.fit = fit_power_law(xy);
  qf.prediction_defined = prediction_defined;
  qf.predicted_exponent = predicted + 0.0;  // +0.0 turns -g = -0.0 into 0
  fits.push_back(std::move(qf));
}

}  // namespace

SweepResult width_sweep(const Parameterization& p, const OptimizerConfig& opt,
                        const LearningRateSchedule& schedule_template, const SweepConfig& cfg) {
  if (cfg.widths.size() < 3)
    throw std::invalid_argument("width_sweep: need at least 3 widths for the fit");
  if (!std::is_sorted(cfg.widths.begin(), cfg.widths.end()) ||
      std::adjacent_find(cfg.widths.begin(), cfg.widths.end()) != cfg.widths.end())
    throw std::invalid_argument("width_sweep: widths must be strictly increasing");
  if (cfg.seeds.empty()) throw std::invalid_argument("width_sweep: need at least one seed");
  if (cfg.steps < 1) throw std::invalid_argument("width_sweep: steps must be >= 1");
  if (cfg.fit_step < 0 || cfg.fit_step > cfg.steps)
    throw std::invalid_argument("width_sweep: fit_step outside [0, steps]");
  if (cfg.quantities.empty()) throw std::invalid_argument("width_sweep: no quantities requested");

  std::vector<int> record_steps = default_record_steps(cfg.steps);
  record_steps.push_back(cfg.fit_step);

  const int n_widths = static_cast<int>(cfg.widths.size());
  const int n_seeds = static_cast<int>(cfg.seeds.size());
  const int n_tasks = n_widths * n_seeds;

  SweepResult result;
  result.param = p;
  result.traces.resize(static_cast<std::size_t>(n_tasks));
  result.runs.resize(static_cast<std::size_t>(n_tasks));

  parallel_for(n_tasks, [&](int task) {
    const int wi = task / n_seeds;
    const int si = task % n_seeds;
    const int width = cfg.widths[static_cast<std::size_t>(wi)];
    const uint64_t seed = cfg.seeds[static_cast<std::size_t>(si)];
    ModelShape shape{width, cfg.d, cfg.L, cfg.nonlinearity};
    Model model = init_model(p, shape, seed);
    TrainOptions topts;
    topts.steps = cfg.steps;
    topts.batch_size = cfg.batch_size;
    topts.seed = seed;
    topts.record_steps = record_steps;
    topts.input_scale = cfg.input_scale;
    topts.target_scale = cfg.target_scale;
    ScaleTrace trace = train_instrumented(model, opt, schedule_template, topts);
    RunSummary summary;
    summary.width = width;
    summary.seed = seed;
    summary.diverged = trace.diverged;
    summary.final_loss =
        trace.diverged ? std::numeric_limits<double>::quiet_NaN() : trace.loss_per_step.back();
    result.traces[static_cast<std::size_t>(task)] = std::move(trace);
    result.runs[static_cast<std::size_t>(task)] = summary;
  });

  // Symbolic predictions exist only for init-stable parameterizations.
  bool have_g = false;
  GradientExponents g;
  if (check_init_stability(p).stable_at_init) {
    g = gradient_exponents(p);
    have_g = true;
  }

  const int layers = cfg.L + 1;
  for (const std::string& quantity : cfg.quantities) {
    const bool model_level = quantity == "loss";
    const int first_layer = model_level ? 0 : 1;
    const int last_layer = model_level ? 0 : layers;
    for (int layer = first_layer; layer <= last_layer; ++layer) {
      LayerRole role = LayerRole::Embedding;
      if (!model_level) {
        role = layer == 1 ? LayerRole::Embedding
                          : (layer == layers ? LayerRole::Readout : LayerRole::Hidden);
      }
      std::vector<FitPoint> points;
      for (int wi = 0; wi < n_widths; ++wi) {
        double sum = 0.0;
        int alive = 0;
        for (int si = 0; si < n_seeds; ++si) {
          const ScaleTrace& trace = result.traces[static_cast<std::size_t>(wi * n_seeds + si)];
          if (trace.diverged) continue;
          sum += trace.value_at(cfg.fit_step, layer, quantity);
          ++alive;
        }
        if (alive > 0)
          points.push_back(
              FitPoint{static_cast<double>(cfg.widths[static_cast<std::size_t>(wi)]),
                       sum / static_cast<double>(alive)});
      }
      bool prediction_defined = false;
      double predicted = 0.0;
      if (cfg.fit_step == 0 && !model_level) {
        if (quantity == "grad_rms" && have_g) {
          prediction_defined = true;
          const Rat gr = role == LayerRole::Embedding
                             ? g.g_embedding
                             : (role == LayerRole::Hidden ? g.g_hidden : g.g_readout);
          predicted = -gr.to_double();
        } else if (quantity == "activation_rms" && have_g) {
          // Init-stable layers keep their activations at n^0; the readout's
          // output (the logits) scales as n^{1/2 - (a_r + b_r)}, which drops
          // below 0 whenever the readout over-suppresses (a_r + b_r > 1/2).
          prediction_defined = true;
          predicted = layer == layers
                          ? (rat(1, 2) - (p.readout.a + p.readout.b)).to_double()
                          : 0.0;
        }
      }
      append_fit(result.fits, quantity, layer, role, points, prediction_defined, predicted);
    }
  }
  return result;
}

LrSweepResult lr_sweep(const Parameterization& p, const OptimizerConfig& opt,
                       const LearningRateSchedule& schedule_template, const LrSweepConfig& cfg) {
  if (cfg.widths.size() < 3)
    throw std::invalid_argument("lr_sweep: need at least 3 widths for the fit");
  if (!std::is_sorted(cfg.widths.begin(), cfg.widths.end()) ||
      std::adjacent_find(cfg.widths.begin(), cfg.widths.end()) != cfg.widths.end())
    throw std::invalid_argument("lr_sweep: widths must be strictly increasing");
  if (cfg.base_lrs.size() < 5)
    throw std::invalid_argument("lr_sweep: the learning-rate grid needs at least 5 points");
  for (std::size_t i = 0; i < cfg.base_lrs.size(); ++i) {
    if (cfg.base_lrs[i] <= 0.0)
      throw std::invalid_argument("lr_sweep: learning rates must be positive");
    if (i > 0 && cfg.base_lrs[i] <= cfg.base_lrs[i - 1])
      throw std::invalid_argument("lr_sweep: learning-rate grid must be strictly increasing");
  }
  if (cfg.seeds.empty()) throw std::invalid_argument("lr_sweep: need at least one seed");
  if (cfg.steps < 1) throw std::invalid_argument("lr_sweep: steps must be >= 1");

  const int n_widths = static_cast<int>(cfg.widths.size());
  const int n_lrs = static_cast<int>(cfg.base_lrs.size());
  const int n_seeds = static_cast<int>(cfg.seeds.size());
  const int n_tasks = n_widths * n_lrs * n_seeds;

  struct TaskOutcome {
    bool diverged = false;
    double final_loss = 0.0;
  };
  std::vector<TaskOutcome> outcomes(static_cast<std::size_t>(n_tasks));

  parallel_for(n_tasks, [&](int task) {
    const int wi = task / (n_lrs * n_seeds);
    const int li = (task / n_seeds) % n_lrs;
    const int si = task % n_seeds;
    ModelShape shape{cfg.widths[static_cast<std::size_t>(wi)], cfg.d, cfg.L, cfg.nonlinearity};
    Model model = init_model(p, shape, cfg.seeds[static_cast<std::size_t>(si)]);
    LearningRateSchedule sched = schedule_template;
    sched.base_lr = cfg.base_lrs[static_cast<std::size_t>(li)];
    TrainOptions topts;
    topts.steps = cfg.steps;
    topts.batch_size = cfg.batch_size;
    topts.seed = cfg.seeds[static_cast<std::size_t>(si)];
    topts.record_steps = {0};
    topts.input_scale = cfg.input_scale;
    topts.target_scale = cfg.target_scale;
    ScaleTrace trace = train_instrumented(model, opt, sched, topts);
    outcomes[static_cast<std::size_t>(task)] =
        TaskOutcome{trace.diverged,
                    trace.diverged ? std::numeric_limits<double>::quiet_NaN()
                                   : trace.loss_per_step.back()};
  });

  LrSweepResult result;
  for (int wi = 0; wi < n_widths; ++wi) {
    const int width = cfg.widths[static_cast<std::size_t>(wi)];
    bool found = false;
    double best_lr = 0.0;
    double best_loss = 0.0;
    for (int li = 0; li < n_lrs; ++li) {
      LrSweepCell cell;
      cell.width = width;
      cell.base_lr = cfg.base_lrs[static_cast<std::size_t>(li)];
      cell.total = n_seeds;
      double sum = 0.0;
      for (int si = 0; si < n_seeds; ++si) {
        const TaskOutcome& out =
            outcomes[static_cast<std::size_t>((wi * n_lrs + li) * n_seeds + si)];
        if (out.diverged)
          ++cell.diverged;
        else
          sum += out.final_loss;
      }
      const int alive = cell.total - cell.diverged;
      cell.mean_final_loss =
          alive > 0 ? sum / static_cast<double>(alive) : std::numeric_limits<double>::quiet_NaN();
      if (alive > 0 && (!found || cell.mean_final_loss < best_loss)) {
        found = true;
        best_loss = cell.mean_final_loss;
        best_lr = cell.base_lr;
      }
      result.cells.push_back(cell);
    }
    if (!found)
      throw std::runtime_error("lr_sweep: every run diverged at width " + std::to_string(width));
    result.optimal_beta.emplace_back(width, best_lr);
  }

  std::vector<std::pair<double, double>> xy;
  xy.reserve(result.optimal_beta.size());
  for (const auto& [width, beta] : result.optimal_beta)
    xy.emplace_back(static_cast<double>(width), beta);
  result.fit = fit_power_law(xy);
  return result;
}

LearningRateSchedule schedule_from(const Parameterization& p, double base_lr, int base_width) {
  LearningRateSchedule sched;
  sched.base_lr = base_lr;
  sched.base_width = base_width;
  sched.c = exponents_of(p);
  return sched;
}

TwinReport twin_run(const Parameterization& p,
                    const std::vector<std::pair<LayerRole, Rat>>& shifts, NumericOptimizer opt,
                    const LearningRateSchedule& schedule_base, const ModelShape& shape,
                    uint64_t seed, int steps, int batch_size) {
  const OptimizerKind kind = scaling_kind(opt);
  Parameterization shifted = p;
  for (const auto& [role, theta] : shifts) shifted = reparameterize(shifted, role, theta, kind);

  Model base_model = init_model(p, shape, seed);
  Model twin_model = init_model(shifted, shape, seed);

  LearningRateSchedule sched_base = schedule_base;
  sched_base.c = exponents_of(p);
  LearningRateSchedule sched_twin = schedule_base;
  sched_twin.c = exponents_of(shifted);
  // The schedule normalizes the width by base_width, so the c-shift leaves a
  // residual base_width^{k theta} that the gamma factor must absorb.
  const int k = kind == OptimizerKind::SGD ? 2 : (kind == OptimizerKind::Adam ? 1 : 0);
  for (const auto& [role, theta] : shifts) {
    const double fix =
        std::pow(static_cast<double>(sched_twin.base_width), k * theta.to_double());
    switch (role) {
      case LayerRole::Embedding:
        sched_twin.gamma_embedding *= fix;
        break;
      case LayerRole::Hidden:
        sched_twin.gamma_hidden *= fix;
        break;
      case LayerRole::Readout:
        sched_twin.gamma_readout *= fix;
        break;
    }
  }

  OptimizerConfig cfg;
  cfg.kind = opt;
  if (opt != NumericOptimizer::SGD && opt != NumericOptimizer::AdamAtan2) {
    // Exact trajectory equivalence for the divide-by-sqrt(v) family needs a
    // scale-invariant normalizer.
    cfg.epsilon_policy.mode = EpsilonMode::None;
  }

  TwinReport report;
  {
    const Batch probe = synth_batch(shape.d, batch_size, mix_seed(seed, 0));
    const Eigen::MatrixXd logits_base = forward(base_model, probe.inputs).acts.back();
    const Eigen::MatrixXd logits_twin = forward(twin_model, probe.inputs).acts.back();
    const double scale = std::max(logits_base.cwiseAbs().maxCoeff(),
                                  logits_twin.cwiseAbs().maxCoeff());
    report.init_logit_rel_dev =
        scale == 0.0 ? 0.0 : (logits_base - logits_twin).cwiseAbs().maxCoeff() / scale;
  }

  TrainOptions topts;
  topts.steps = steps;
  topts.batch_size = batch_size;
  topts.seed = seed;
  topts.record_steps = {0};
  const ScaleTrace trace_base = train_instrumented(base_model, cfg, sched_base, topts);
  const ScaleTrace trace_twin = train_instrumented(twin_model, cfg, sched_twin, topts);
  report.loss_base = trace_base.loss_per_step;
  report.loss_shifted = trace_twin.loss_per_step;
  const std::size_t common = std::min(report.loss_base.size(), report.loss_shifted.size());
  for (std::size_t t = 0; t < common; ++t)
    report.max_rel_loss_dev = std::max(
        report.max_rel_loss_dev, relative_gap(report.loss_base[t], report.loss_shifted[t]));
  if (report.loss_base.size() != report.loss_shifted.size())
    report.max_rel_loss_dev = std::numeric_limits<double>::infinity();
  return report;
}

int thread_budget() {
  if (const char* env = std::getenv("WIDTHLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw std::invalid_argument("WIDTHLAB_THREADS must be a positive integer");
    return static_cast<int>(std::min(v, 256L));
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace widthlab
