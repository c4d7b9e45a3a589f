// paramspace.cpp - presets, init-stability checks, and the theta-shift.

#include "widthlab/paramspace.hpp"

#include <stdexcept>

namespace widthlab {

const char* role_name(LayerRole role) {
  switch (role) {
    case LayerRole::Embedding: return "embedding";
    case LayerRole::Hidden: return "hidden";
    case LayerRole::Readout: return "readout";
  }
  return "?";
}

const char* optimizer_kind_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::SGD: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::AdafactorFamily: return "adafactor";
  }
  return "?";
}

const LayerTriple& Parameterization::role(LayerRole r) const {
  switch (r) {
    case LayerRole::Embedding: return embedding;
    case LayerRole::Hidden: return hidden;
    case LayerRole::Readout: return readout;
  }
  throw std::logic_error("Parameterization::role: bad role");
}

LayerTriple& Parameterization::role(LayerRole r) {
  return const_cast<LayerTriple&>(static_cast<const Parameterization*>(this)->role(r));
}

Parameterization preset(const std::string& name) {
  const Rat h(1, 2);
  Parameterization p;
  p.name = name;
  if (name == "standard") {
    p.embedding = {0, 0, 0};
    p.hidden = {0, h, 0};
    p.readout = {0, h, 0};
  } else if (name == "ntk") {
    p.embedding = {0, 0, 0};
    p.hidden = {h, 0, 0};
    p.readout = {h, 0, 0};
  } else if (name == "mup") {
    p.embedding = {-h, h, 0};
    p.hidden = {0, h, 0};
    p.readout = {h, h, 0};
  } else if (name == "mfp") {
    p.embedding = {0, 0, 0};
    p.hidden = {h, 0, 0};
    p.readout = {1, 0, 0};
  } else {
    throw std::invalid_argument("preset: unknown name '" + name + "'");
  }
  return p;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"standard", "ntk", "mup", "mfp"};
  return names;
}

InitReport check_init_stability(const Parameterization& p) {
  InitReport report;
  const Rat half(1, 2);

  const Rat emb = p.embedding.a + p.embedding.b;
  if (emb != Rat(0)) report.violations.push_back({LayerRole::Embedding, "a+b=0", emb});

  const Rat hid = p.hidden.a + p.hidden.b;
  if (hid != half) report.violations.push_back({LayerRole::Hidden, "a+b=1/2", hid});

  const Rat read = p.readout.a + p.readout.b;
  if (read < half) report.violations.push_back({LayerRole::Readout, "a+b>=1/2", read});

  report.stable_at_init = report.violations.empty();
  return report;
}

Parameterization reparameterize(const Parameterization& p, LayerRole role, const Rat& theta,
                                OptimizerKind opt) {
  Parameterization out = p;
  LayerTriple& t = out.role(role);
  t.a += theta;
  t.b -= theta;
  switch (opt) {
    case OptimizerKind::SGD: t.c -= Rat(2) * theta; break;
    case OptimizerKind::Adam: t.c -= theta; break;
    case OptimizerKind::AdafactorFamily: break;  // c unchanged
  }
  return out;
}

}  // namespace widthlab
