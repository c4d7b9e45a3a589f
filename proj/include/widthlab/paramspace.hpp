// paramspace.hpp - width-scaling parameterizations as per-layer-role exponent
// triples, the four named presets, init-time stability checks, and the
// equivalence-class (theta-shift) transform.

#ifndef WIDTHLAB_PARAMSPACE_HPP
#define WIDTHLAB_PARAMSPACE_HPP

#include <string>
#include <vector>

#include "widthlab/rat.hpp"

namespace widthlab {

// Every layer of the model maps to exactly one role: layer 1 is the
// embedding, layers 2..L are hidden, layer L+1 is the readout.
enum class LayerRole { Embedding, Hidden, Readout };

const char* role_name(LayerRole role);

// Symbolic width-scaling regimes of the optimizers. AdafactorFamily covers
// Adafactor and Adam+parameter-scaling, which share one regime; Adam-atan2
// scales like Adam.
enum class OptimizerKind { SGD, Adam, AdafactorFamily };

const char* optimizer_kind_name(OptimizerKind kind);

// One layer's exponents: parameter multiplier n^{-a}, init std n^{-b}
// (W ~ N(0, n^{-2b})), learning rate eta ~ n^{-c}. Arbitrary triples are
// representable; stability is a separate check.
struct LayerTriple {
  Rat a, b, c;
  bool operator==(const LayerTriple& o) const { return a == o.a && b == o.b && c == o.c; }
};

// All hidden layers share one triple: the prescriptions under study are
// per-role, not per-layer-index.
struct Parameterization {
  LayerTriple embedding, hidden, readout;
  std::string name;  // optional label

  const LayerTriple& role(LayerRole r) const;
  LayerTriple& role(LayerRole r);
};

struct InitViolation {
  LayerRole role;
  std::string constraint;  // e.g. "a+b=0"
  Rat lhs;                 // the computed left-hand side
};

struct InitReport {
  bool stable_at_init = false;  // true iff violations is empty
  std::vector<InitViolation> violations;
};

// The four named presets ("standard", "ntk", "mup", "mfp"), giving the (a, b)
// exponents per role with c left at 0: learning-rate exponents come from the
// constraint engine or the user. Throws std::invalid_argument on an unknown
// name.
Parameterization preset(const std::string& name);

// Names accepted by preset(), in canonical order.
const std::vector<std::string>& preset_names();

// Stability at initialization: a+b = 0 for the embedding, a+b = 1/2 for
// hidden layers, a+b >= 1/2 for the readout — evaluated exactly.
InitReport check_init_stability(const Parameterization& p);

// The equivalence-class transform on one role: a <- a+theta, b <- b-theta,
// and the optimizer-specific learning-rate correction c <- c - 2*theta (SGD),
// c <- c - theta (Adam), c unchanged (AdafactorFamily). Other roles are
// untouched.
Parameterization reparameterize(const Parameterization& p, LayerRole role, const Rat& theta,
                                OptimizerKind opt);

}  // namespace widthlab

#endif  // WIDTHLAB_PARAMSPACE_HPP
