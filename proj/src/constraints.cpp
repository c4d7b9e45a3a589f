// constraints.cpp - exact evaluation of the stability/nontriviality
// constraint table and the greedy max-stable learning-rate solver.

#include "widthlab/constraints.hpp"

#include <stdexcept>

namespace widthlab {

namespace {

const Rat kHalf(1, 2);

void require_init_stable(const Parameterization& p, const char* who) {
  const InitReport init = check_init_stability(p);
  if (!init.stable_at_init) {
    std::string msg = std::string(who) + ": parameterization is not stable at init:";
    for (const auto& v : init.violations) {
      msg += ' ';
      msg += role_name(v.role);
      msg += ' ';
      msg += v.constraint;
      msg += " has a+b=";
      msg += v.lhs.to_string();
      msg += ';';
    }
    throw std::invalid_argument(msg);
  }
}

// Backward-signal scale through the readout during SGD training: the init
// part ~n^{-(a_r+b_r)} plus the accumulated-update part ~n^{-(2a_r+c_r)}.
// The larger magnitude wins, which is the smaller negative exponent.
Rat sgd_backward_exponent(const Parameterization& p) {
  return min(p.readout.a + p.readout.b, Rat(2) * p.readout.a + p.readout.c);
}

// The three hidden-row terms as offsets: the row residual given the
// predecessor residual r is min(dwz, dwdz + r, wdz + r).
struct HiddenRow {
  Rat dwz;   // dW*z term (alpha)
  Rat dwdz;  // dW*dz term (u)
  Rat wdz;   // W*dz term (omega), always 1/2 - omega_h
};

HiddenRow hidden_row(const Parameterization& p, OptimizerKind opt,
                     const AlignmentAssumption& al) {
  HiddenRow row;
  row.wdz = kHalf - al.omega_hidden;
  switch (opt) {
    case OptimizerKind::SGD: {
      // Update scale c+g with the training-corrected gradient.
      const Rat g_h = sgd_backward_exponent(p) + p.hidden.a;
      row.dwz = g_h + p.hidden.a + p.hidden.c - al.alpha_hidden;
      row.dwdz = g_h + p.hidden.a + p.hidden.c - al.u_hidden;
      break;
    }
    case OptimizerKind::Adam:
      row.dwz = p.hidden.a + p.hidden.c - al.alpha_hidden;
      row.dwdz = p.hidden.a + p.hidden.c - al.u_hidden;
      break;
    case OptimizerKind::AdafactorFamily:
      // Update scale c+b with a_h+b_h = 1/2 at init stability.
      row.dwz = kHalf + p.hidden.c - al.alpha_hidden;
      row.dwdz = kHalf + p.hidden.c - al.u_hidden;
      break;
  }
  return row;
}

// Embedding-row residual r_1 (single term: dW_1 * x against the data scale).
Rat embedding_residual(const Parameterization& p, OptimizerKind opt) {
  switch (opt) {
    case OptimizerKind::SGD:
      return sgd_backward_exponent(p) + p.embedding.a + p.embedding.a + p.embedding.c;
    case OptimizerKind::Adam:
      return p.embedding.a + p.embedding.c;
    case OptimizerKind::AdafactorFamily:
      // a_1 + b_1 + c_1 with a_1 + b_1 = 0 at init stability.
      return p.embedding.c;
  }
  throw std::logic_error("embedding_residual: bad optimizer kind");
}

// The three logit-row terms given the readout-input residual r_L.
struct LogitRow {
  Rat wdz;   // W^0 * dz term (omega)
  Rat dwz;   // dW * z term (alpha)
  Rat dwdz;  // dW * dz term (u)
};

LogitRow logit_row(const Parameterization& p, OptimizerKind opt, const AlignmentAssumption& al,
                   const Rat& r_l) {
  const Rat& a = p.readout.a;
  const Rat& b = p.readout.b;
  const Rat& c = p.readout.c;
  LogitRow row;
  row.wdz = a + b + r_l - al.omega_readout;
  switch (opt) {
    case OptimizerKind::SGD:
      // Readout updates scale as n^{-(2a+c)} (gradient exponent a, times the
      // multiplier a, times the learning rate c).
      row.dwz = Rat(2) * a + c - al.alpha_readout;
      row.dwdz = Rat(2) * a + c + r_l - al.u_readout;
      break;
    case OptimizerKind::Adam:
      row.dwz = a + c - al.alpha_readout;
      row.dwdz = a + c + r_l - al.u_readout;
      break;
    case OptimizerKind::AdafactorFamily:
      row.dwz = a + b + c - al.alpha_readout;
      row.dwdz = a + b + c + r_l - al.u_readout;
      break;
  }
  return row;
}

int hidden_applications(int depth_L) {
  if (depth_L < 1) throw std::invalid_argument("depth_L must be >= 1");
  const int k = depth_L - 1;
  return k < 8 ? k : 8;
}

}  // namespace

AlignmentAssumption AlignmentAssumption::full_alignment() {
  AlignmentAssumption a;
  a.alpha_hidden = a.alpha_readout = Rat(1);
  a.u_hidden = a.u_readout = Rat(1);
  a.omega_hidden = a.omega_readout = kHalf;
  a.name = "full_alignment";
  return a;
}

AlignmentAssumption AlignmentAssumption::no_alignment() {
  AlignmentAssumption a;
  a.alpha_hidden = a.alpha_readout = kHalf;
  a.u_hidden = a.u_readout = kHalf;
  a.omega_hidden = a.omega_readout = kHalf;
  a.name = "no_alignment";
  return a;
}

AlignmentAssumption AlignmentAssumption::tensor_programs() {
  AlignmentAssumption a;
  a.alpha_hidden = a.alpha_readout = Rat(1);
  a.u_hidden = a.u_readout = Rat(1);
  a.omega_hidden = kHalf;
  a.omega_readout = Rat(1);
  a.name = "tensor_programs";
  return a;
}

void AlignmentAssumption::validate() const {
  const auto check = [](const Rat& v, const char* field) {
    if (v < kHalf || v > Rat(1)) {
      throw std::invalid_argument(std::string("AlignmentAssumption: ") + field + "=" +
                                  v.to_string() + " outside [1/2, 1]");
    }
  };
  check(alpha_hidden, "alpha_hidden");
  check(alpha_readout, "alpha_readout");
  check(omega_hidden, "omega_hidden");
  check(omega_readout, "omega_readout");
  check(u_hidden, "u_hidden");
  check(u_readout, "u_readout");
}

bool AlignmentAssumption::operator==(const AlignmentAssumption& o) const {
  return alpha_hidden == o.alpha_hidden && alpha_readout == o.alpha_readout &&
         omega_hidden == o.omega_hidden && omega_readout == o.omega_readout &&
         u_hidden == o.u_hidden && u_readout == o.u_readout;
}

const Rat& RoleExponents::role(LayerRole r) const {
  switch (r) {
    case LayerRole::Embedding: return embedding;
    case LayerRole::Hidden: return hidden;
    case LayerRole::Readout: return readout;
  }
  throw std::logic_error("RoleExponents::role: bad role");
}

GradientExponents gradient_exponents(const Parameterization& p) {
  require_init_stable(p, "gradient_exponents");
  const Rat back = p.readout.a + p.readout.b;
  GradientExponents g;
  g.g_embedding = p.embedding.a + back;
  g.g_hidden = p.hidden.a + back;
  g.g_readout = p.readout.a;
  return g;
}

RoleExponents update_exponents(const Parameterization& p, OptimizerKind opt) {
  const GradientExponents g = gradient_exponents(p);
  RoleExponents u;
  switch (opt) {
    case OptimizerKind::SGD:
      u.embedding = p.embedding.c + g.g_embedding;
      u.hidden = p.hidden.c + g.g_hidden;
      u.readout = p.readout.c + g.g_readout;
      break;
    case OptimizerKind::Adam:
      u.embedding = p.embedding.c;
      u.hidden = p.hidden.c;
      u.readout = p.readout.c;
      break;
    case OptimizerKind::AdafactorFamily:
      u.embedding = p.embedding.c + p.embedding.b;
      u.hidden = p.hidden.c + p.hidden.b;
      u.readout = p.readout.c + p.readout.b;
      break;
  }
  return u;
}

ConstraintReport training_stability(const Parameterization& p, OptimizerKind opt,
                                    const AlignmentAssumption& align, int depth_L) {
  align.validate();
  require_init_stable(p, "training_stability");
  const int k = hidden_applications(depth_L);

  ConstraintReport rep;
  rep.g = gradient_exponents(p);
  rep.r_embedding = embedding_residual(p, opt);

  // Hidden recursion, applied exactly k times. The omega term adds
  // 1/2 - omega_h <= 0 each application, so the sequence is nonincreasing
  // and the final value is the smallest residual among hidden layers.
  const HiddenRow row = hidden_row(p, opt, align);
  Rat r = rep.r_embedding;
  for (int i = 0; i < k; ++i) {
    r = min(row.dwz, min(row.dwdz + r, row.wdz + r));
  }
  rep.r_hidden = r;
  rep.r_readout_input = r;
  const Rat probe = min(row.dwz, min(row.dwdz + r, row.wdz + r));
  rep.fixed_point_reached = (k == 0) || (probe == r);

  const LogitRow logits = logit_row(p, opt, align, rep.r_readout_input);
  rep.logit_margin = min(logits.wdz, min(logits.dwz, logits.dwdz));

  rep.adafactor_extra_ok = true;
  if (opt == OptimizerKind::AdafactorFamily) {
    rep.adafactor_extra_ok =
        p.embedding.c >= Rat(0) && p.hidden.c >= Rat(0) && p.readout.c >= Rat(0);
  }

  rep.stable = rep.r_embedding >= Rat(0) && rep.r_hidden >= Rat(0) &&
               rep.logit_margin >= Rat(0) && rep.adafactor_extra_ok;
  rep.nontrivial =
      logits.wdz == Rat(0) || logits.dwz == Rat(0) || logits.dwdz == Rat(0);
  rep.feature_learning = rep.stable && rep.r_readout_input == Rat(0);

  // Binding constraints: every term that attains its row's minimum.
  rep.binding.push_back({"embedding.dWx", rep.r_embedding});
  if (k > 0) {
    // Terms of the final application, whose min is r_hidden.
    const Rat prev_r = [&] {
      Rat rr = rep.r_embedding;
      for (int i = 0; i + 1 < k; ++i) rr = min(row.dwz, min(row.dwdz + rr, row.wdz + rr));
      return rr;
    }();
    if (row.dwz == rep.r_hidden) rep.binding.push_back({"hidden.dWz", row.dwz});
    if (row.dwdz + prev_r == rep.r_hidden) rep.binding.push_back({"hidden.dWdz", row.dwdz + prev_r});
    if (row.wdz + prev_r == rep.r_hidden) rep.binding.push_back({"hidden.Wdz", row.wdz + prev_r});
  }
  if (logits.wdz == rep.logit_margin) rep.binding.push_back({"logit.Wdz", logits.wdz});
  if (logits.dwz == rep.logit_margin) rep.binding.push_back({"logit.dWz", logits.dwz});
  if (logits.dwdz == rep.logit_margin) rep.binding.push_back({"logit.dWdz", logits.dwdz});
  if (opt == OptimizerKind::AdafactorFamily) {
    const Rat min_c = min(p.embedding.c, min(p.hidden.c, p.readout.c));
    if (min_c <= Rat(0)) rep.binding.push_back({"adafactor.c_nonneg", min_c});
  }
  return rep;
}

MaxStableResult max_stable_lr(const Parameterization& p_init, OptimizerKind opt,
                              const AlignmentAssumption& align, int depth_L) {
  align.validate();
  require_init_stable(p_init, "max_stable_lr");
  const int k = hidden_applications(depth_L);
  // With depth 1 there is no hidden layer; solve its exponent as if there
  // were one so the returned triple is always fully populated.
  const int k_solve = k > 0 ? k : 1;

  const Rat a_r = p_init.readout.a;
  const Rat b_r = p_init.readout.b;
  const Rat readout_scale = a_r + b_r;

  MaxStableResult out;
  // Smallest r_L the logit omega-term allows (it has no c in it).
  out.r_floor = max(Rat(0), align.omega_readout - readout_scale);

  // The omega term loses omega_h - 1/2 per hidden application, so the
  // embedding residual must start high enough for r_L to reach the floor.
  const Rat t1 = out.r_floor + Rat(k) * (align.omega_hidden - kHalf);

  Parameterization p = p_init;

  // SGD couples earlier rows to the readout exponent through the backward
  // signal; resolve c_r first. The b_r - a_r clamp keeps readout updates at
  // or below init scale so the earlier layers keep their init-scale
  // gradients (greedy embedding-first maximization forces this).
  if (opt == OptimizerKind::SGD) {
    p.readout.c = max(align.alpha_readout - Rat(2) * a_r,
                      max(align.u_readout - out.r_floor - Rat(2) * a_r, b_r - a_r));
  }

  // Embedding: its residual is linear in c_1 with unit slope; hit t1 exactly.
  switch (opt) {
    case OptimizerKind::SGD: {
      const Rat g1 = sgd_backward_exponent(p) + p.embedding.a;
      p.embedding.c = t1 - g1 - p.embedding.a;
      break;
    }
    case OptimizerKind::Adam:
      p.embedding.c = t1 - p.embedding.a;
      break;
    case OptimizerKind::AdafactorFamily:
      p.embedding.c = max(t1, Rat(0));
      break;
  }

  // Hidden: with r_1 = t1, the dWz/dWdz offsets P, Q and the omega offset
  // S = 1/2 - omega_h give the residual after k applications as
  //   min(r_1 + k*min(Q+c, S), P + c + (k-1)*min(Q+c, S, 0)).
  // Feasibility of the first piece forces c >= S - Q; on that range the
  // second piece is P + c + (k-1)*min(S, 0), giving the second bound.
  {
    const HiddenRow row = hidden_row(p, opt, align);
    const Rat S = row.wdz;
    // row.dwz = P + c_h0, row.dwdz = Q + c_h0 for the placeholder c_h0 in p;
    // recover the pure offsets.
    const Rat P = row.dwz - p.hidden.c;
    const Rat Q = row.dwdz - p.hidden.c;
    const Rat c_a = S - Q;
    const Rat c_b = out.r_floor - P - Rat(k_solve - 1) * min(S, Rat(0));
    p.hidden.c = max(c_a, c_b);
    if (opt == OptimizerKind::AdafactorFamily) p.hidden.c = max(p.hidden.c, Rat(0));
  }

  // Actual r_L under the solved embedding/hidden exponents (equals the floor
  // unless AdafactorFamily's clamp lifted c_h above the unconstrained min).
  Rat r_l = embedding_residual(p, opt);
  {
    const HiddenRow row = hidden_row(p, opt, align);
    for (int i = 0; i < k; ++i) r_l = min(row.dwz, min(row.dwdz + r_l, row.wdz + r_l));
  }

  // Readout: minimal c against the alpha and u terms (the omega term has no
  // c and is >= 0 by the floor construction).
  switch (opt) {
    case OptimizerKind::SGD:
      break;  // already solved above
    case OptimizerKind::Adam:
      p.readout.c = max(align.alpha_readout - a_r, align.u_readout - r_l - a_r);
      break;
    case OptimizerKind::AdafactorFamily:
      p.readout.c = max(max(align.alpha_readout - readout_scale,
                            align.u_readout - r_l - readout_scale),
                        Rat(0));
      break;
  }

  out.c = {p.embedding.c, p.hidden.c, p.readout.c};
  out.report = training_stability(p, opt, align, depth_L);
  return out;
}

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::Unstable: return "unstable";
    case Regime::Trivial: return "trivial";
    case Regime::Kernel: return "kernel";
    case Regime::FeatureLearning: return "feature_learning";
  }
  return "?";
}

Regime classify(const Parameterization& p, OptimizerKind opt, const AlignmentAssumption& align,
                const RoleExponents& c, int depth_L) {
  Parameterization q = p;
  q.embedding.c = c.embedding;
  q.hidden.c = c.hidden;
  q.readout.c = c.readout;
  const ConstraintReport rep = training_stability(q, opt, align, depth_L);
  if (!rep.stable) return Regime::Unstable;
  if (!rep.nontrivial) return Regime::Trivial;
  return rep.r_readout_input == Rat(0) ? Regime::FeatureLearning : Regime::Kernel;
}

}  // namespace widthlab
