#include "widthlab/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "widthlab/serialize.hpp"

namespace widthlab {

std::vector<double> default_base_lr_grid() {
  std::vector<double> grid;
  double lr = 1e-3;
  for (int i = 0; i < 9; ++i, lr *= 2.0) grid.push_back(lr);
  return grid;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + path + ": " + what);
}

// Strict section accessor: every key must be known.
void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(path, "unknown key '" + item.key() + "'");
  }
}

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, std::string("expected an object, got ") + j.type_name());
}

std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, std::string("expected a string, got ") + j.type_name());
  return j.get<std::string>();
}

bool get_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, std::string("expected a boolean, got ") + j.type_name());
  return j.get<bool>();
}

std::int64_t get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, std::string("expected an integer, got ") + j.type_name());
  return j.get<std::int64_t>();
}

int get_int_in(const Json& j, const std::string& path, std::int64_t lo, std::int64_t hi) {
  std::int64_t v = get_int(j, path);
  if (v < lo || v > hi) {
    fail(path, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

double get_double(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, std::string("expected a number, got ") + j.type_name());
  double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "value must be finite");
  return v;
}

double get_positive(const Json& j, const std::string& path) {
  double v = get_double(j, path);
  if (!(v > 0.0)) fail(path, "value must be > 0");
  return v;
}

Rat get_rat(const Json& j, const std::string& path) {
  try {
    return rat_from_json(j);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  } catch (const std::domain_error& e) {  // zero denominator
    fail(path, e.what());
  }
}

// Applies `read(value, key_path)` when the key is present.
template <typename F>
void with_field(const Json& obj, const std::string& path, const char* key, F read) {
  if (const Json* j = find(obj, key)) read(*j, join(path, key));
}

LayerTriple parse_triple(const Json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"a", "b", "c"});
  LayerTriple t;
  const Json* a = find(j, "a");
  const Json* b = find(j, "b");
  if (!a) fail(path, "missing key 'a'");
  if (!b) fail(path, "missing key 'b'");
  t.a = get_rat(*a, join(path, "a"));
  t.b = get_rat(*b, join(path, "b"));
  with_field(j, path, "c", [&](const Json& v, const std::string& p) { t.c = get_rat(v, p); });
  return t;
}

RoleExponents parse_role_rats(const Json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"embedding", "hidden", "readout"});
  RoleExponents out;
  const Json* e = find(j, "embedding");
  const Json* h = find(j, "hidden");
  const Json* r = find(j, "readout");
  if (!e || !h || !r) fail(path, "requires keys 'embedding', 'hidden', 'readout'");
  out.embedding = get_rat(*e, join(path, "embedding"));
  out.hidden = get_rat(*h, join(path, "hidden"));
  out.readout = get_rat(*r, join(path, "readout"));
  return out;
}

Parameterization parse_parameterization(const Json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return preset(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  require_object(j, path);
  if (const Json* pre = find(j, "preset")) {
    check_keys(j, path, {"preset", "c"});
    Parameterization p;
    try {
      p = preset(get_string(*pre, join(path, "preset")));
    } catch (const std::invalid_argument& e) {
      fail(join(path, "preset"), e.what());
    }
    with_field(j, path, "c", [&](const Json& v, const std::string& cp) {
      RoleExponents c = parse_role_rats(v, cp);
      p.embedding.c = c.embedding;
      p.hidden.c = c.hidden;
      p.readout.c = c.readout;
    });
    return p;
  }
  check_keys(j, path, {"name", "embedding", "hidden", "readout"});
  const Json* e = find(j, "embedding");
  const Json* h = find(j, "hidden");
  const Json* r = find(j, "readout");
  if (!e || !h || !r) {
    fail(path, "requires either 'preset' or explicit 'embedding'/'hidden'/'readout' triples");
  }
  Parameterization p;
  p.name = "custom";
  with_field(j, path, "name",
             [&](const Json& v, const std::string& np) { p.name = get_string(v, np); });
  p.embedding = parse_triple(*e, join(path, "embedding"));
  p.hidden = parse_triple(*h, join(path, "hidden"));
  p.readout = parse_triple(*r, join(path, "readout"));
  return p;
}

AlignmentAssumption named_alignment(const std::string& name, const std::string& path) {
  if (name == "full_alignment") return AlignmentAssumption::full_alignment();
  if (name == "no_alignment") return AlignmentAssumption::no_alignment();
  if (name == "tensor_programs") return AlignmentAssumption::tensor_programs();
  fail(path, "unknown alignment '" + name +
                 "' (expected full_alignment, no_alignment or tensor_programs)");
}

AlignmentAssumption parse_alignment(const Json& j, const std::string& path) {
  if (j.is_string()) return named_alignment(j.get<std::string>(), path);
  require_object(j, path);
  check_keys(j, path,
             {"name", "alpha_hidden", "omega_hidden", "u_hidden", "alpha_readout", "omega_readout",
              "u_readout"});
  AlignmentAssumption a;
  a.name = "custom";
  with_field(j, path, "name",
             [&](const Json& v, const std::string& np) { a.name = get_string(v, np); });
  struct Slot {
    const char* key;
    Rat* dst;
  };
  const Slot slots[] = {{"alpha_hidden", &a.alpha_hidden},   {"omega_hidden", &a.omega_hidden},
                        {"u_hidden", &a.u_hidden},           {"alpha_readout", &a.alpha_readout},
                        {"omega_readout", &a.omega_readout}, {"u_readout", &a.u_readout}};
  for (const Slot& s : slots) {
    const Json* v = find(j, s.key);
    if (!v) fail(path, std::string("missing key '") + s.key + "'");
    *s.dst = get_rat(*v, join(path, s.key));
  }
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return a;
}

void parse_optimizer(const Json& j, const std::string& path, OptimizerConfig& opt) {
  require_object(j, path);
  check_keys(j, path,
             {"kind", "beta1", "beta2", "epsilon", "atan2_a", "atan2_b", "update_clip_rms",
              "bias_correction"});
  with_field(j, path, "kind", [&](const Json& v, const std::string& p) {
    opt.kind = parse_numeric_optimizer(get_string(v, p), p);
  });
  with_field(j, path, "beta1",
             [&](const Json& v, const std::string& p) { opt.beta1 = get_double(v, p); });
  with_field(j, path, "beta2",
             [&](const Json& v, const std::string& p) { opt.beta2 = get_double(v, p); });
  with_field(j, path, "epsilon", [&](const Json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"mode", "base", "base_width"});
    with_field(v, p, "mode", [&](const Json& m, const std::string& mp) {
      opt.epsilon_policy.mode = parse_epsilon_mode(get_string(m, mp), mp);
    });
    with_field(v, p, "base", [&](const Json& m, const std::string& mp) {
      opt.epsilon_policy.base_epsilon = get_positive(m, mp);
    });
    with_field(v, p, "base_width", [&](const Json& m, const std::string& mp) {
      opt.epsilon_policy.base_width = get_int_in(m, mp, 1, 1 << 24);
    });
  });
  with_field(j, path, "atan2_a",
             [&](const Json& v, const std::string& p) { opt.atan2_a = get_positive(v, p); });
  with_field(j, path, "atan2_b",
             [&](const Json& v, const std::string& p) { opt.atan2_b = get_positive(v, p); });
  with_field(j, path, "update_clip_rms", [&](const Json& v, const std::string& p) {
    if (v.is_null()) {
      opt.update_clip_rms.reset();
    } else {
      opt.update_clip_rms = get_positive(v, p);
    }
  });
  with_field(j, path, "bias_correction",
             [&](const Json& v, const std::string& p) { opt.bias_correction = get_bool(v, p); });
  try {
    // PerLayer gradient exponents are injected by the command once the
    // parameterization is fixed; satisfy that requirement for validation.
    OptimizerConfig check = opt;
    if (check.epsilon_policy.mode == EpsilonMode::PerLayer) {
      check.epsilon_policy.gradient_exponents = GradientExponents{};
    }
    check.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

void parse_schedule(const Json& j, const std::string& path, LearningRateSchedule& s,
                    bool& saw_total_steps) {
  require_object(j, path);
  check_keys(j, path,
             {"base_lr", "gamma", "base_width", "warmup_steps", "total_steps", "decay"});
  with_field(j, path, "base_lr",
             [&](const Json& v, const std::string& p) { s.base_lr = get_positive(v, p); });
  with_field(j, path, "gamma", [&](const Json& v, const std::string& p) {
    require_object(v, p);
    check_keys(v, p, {"embedding", "hidden", "readout"});
    with_field(v, p, "embedding", [&](const Json& g, const std::string& gp) {
      s.gamma_embedding = get_positive(g, gp);
    });
    with_field(v, p, "hidden",
               [&](const Json& g, const std::string& gp) { s.gamma_hidden = get_positive(g, gp); });
    with_field(v, p, "readout", [&](const Json& g, const std::string& gp) {
      s.gamma_readout = get_positive(g, gp);
    });
  });
  with_field(j, path, "base_width", [&](const Json& v, const std::string& p) {
    s.base_width = get_int_in(v, p, 1, 1 << 24);
  });
  with_field(j, path, "warmup_steps", [&](const Json& v, const std::string& p) {
    s.warmup_steps = get_int_in(v, p, 0, 1 << 24);
  });
  with_field(j, path, "total_steps", [&](const Json& v, const std::string& p) {
    s.total_steps = get_int_in(v, p, 1, 1 << 24);
    saw_total_steps = true;
  });
  with_field(j, path, "decay", [&](const Json& v, const std::string& p) {
    s.decay = parse_decay_kind(get_string(v, p), p);
  });
}

void parse_model(const Json& j, const std::string& path, RunConfig& cfg) {
  require_object(j, path);
  check_keys(j, path, {"widths", "seeds", "d", "L", "nonlinearity", "batch_size", "steps",
                       "input_scale", "target_scale"});
  with_field(j, path, "widths", [&](const Json& v, const std::string& p) {
    if (!v.is_array() || v.empty()) fail(p, "expected a non-empty array of widths");
    cfg.widths.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      int n = get_int_in(v[i], p + "[" + std::to_string(i) + "]", 1, 1 << 24);
      if (!cfg.widths.empty() && n <= cfg.widths.back()) fail(p, "widths must strictly increase");
      cfg.widths.push_back(n);
    }
  });
  with_field(j, path, "seeds", [&](const Json& v, const std::string& p) {
    if (!v.is_array() || v.empty()) fail(p, "expected a non-empty array of seeds");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string ip = p + "[" + std::to_string(i) + "]";
      if (!v[i].is_number_unsigned() && !(v[i].is_number_integer() && v[i].get<std::int64_t>() >= 0))
        fail(ip, "expected a non-negative integer seed");
      cfg.seeds.push_back(v[i].get<std::uint64_t>());
    }
  });
  with_field(j, path, "d",
             [&](const Json& v, const std::string& p) { cfg.d = get_int_in(v, p, 1, 1 << 20); });
  with_field(j, path, "L",
             [&](const Json& v, const std::string& p) { cfg.L = get_int_in(v, p, 1, 64); });
  with_field(j, path, "nonlinearity", [&](const Json& v, const std::string& p) {
    cfg.nonlinearity = parse_nonlinearity(get_string(v, p), p);
  });
  with_field(j, path, "batch_size", [&](const Json& v, const std::string& p) {
    cfg.batch_size = get_int_in(v, p, 1, 1 << 20);
  });
  with_field(j, path, "steps", [&](const Json& v, const std::string& p) {
    cfg.steps = get_int_in(v, p, 1, 1 << 24);
  });
  with_field(j, path, "input_scale",
             [&](const Json& v, const std::string& p) { cfg.input_scale = get_positive(v, p); });
  with_field(j, path, "target_scale",
             [&](const Json& v, const std::string& p) { cfg.target_scale = get_positive(v, p); });
  if (cfg.d > cfg.widths.front()) {
    fail(join(path, "d"), "input dimension " + std::to_string(cfg.d) +
                              " exceeds the smallest width " + std::to_string(cfg.widths.front()));
  }
}

void parse_sweep(const Json& j, const std::string& path, RunConfig& cfg) {
  require_object(j, path);
  check_keys(j, path,
             {"quantities", "fit_step", "exponent_tolerance", "steep_exponent_tolerance"});
  with_field(j, path, "quantities", [&](const Json& v, const std::string& p) {
    if (!v.is_array() || v.empty()) fail(p, "expected a non-empty array of quantity names");
    static const std::set<std::string> known = {"activation_rms", "param_rms",    "grad_rms",
                                                "update_rms",     "w_change_rms", "z_change_rms",
                                                "alignment",      "loss"};
    cfg.quantities.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string ip = p + "[" + std::to_string(i) + "]";
      std::string name = get_string(v[i], ip);
      if (!known.count(name)) fail(ip, "unknown quantity '" + name + "'");
      cfg.quantities.push_back(std::move(name));
    }
  });
  with_field(j, path, "fit_step", [&](const Json& v, const std::string& p) {
    cfg.fit_step = get_int_in(v, p, 0, 1 << 24);
  });
  with_field(j, path, "exponent_tolerance", [&](const Json& v, const std::string& p) {
    cfg.exponent_tolerance = get_positive(v, p);
  });
  with_field(j, path, "steep_exponent_tolerance", [&](const Json& v, const std::string& p) {
    cfg.steep_exponent_tolerance = get_positive(v, p);
  });
}

void parse_lrsweep(const Json& j, const std::string& path, RunConfig& cfg) {
  require_object(j, path);
  check_keys(j, path, {"base_lrs", "lr_grid"});
  const Json* list = find(j, "base_lrs");
  const Json* grid = find(j, "lr_grid");
  if (list && grid) fail(path, "give either 'base_lrs' or 'lr_grid', not both");
  if (list) {
    const std::string p = join(path, "base_lrs");
    if (!list->is_array() || list->empty()) fail(p, "expected a non-empty array of learning rates");
    cfg.base_lrs.clear();
    for (std::size_t i = 0; i < list->size(); ++i) {
      double lr = get_positive((*list)[i], p + "[" + std::to_string(i) + "]");
      if (!cfg.base_lrs.empty() && lr <= cfg.base_lrs.back())
        fail(p, "learning rates must strictly increase");
      cfg.base_lrs.push_back(lr);
    }
  } else if (grid) {
    const std::string p = join(path, "lr_grid");
    require_object(*grid, p);
    check_keys(*grid, p, {"start", "ratio", "points"});
    const Json* start = find(*grid, "start");
    const Json* ratio = find(*grid, "ratio");
    const Json* points = find(*grid, "points");
    if (!start || !ratio || !points) fail(p, "requires keys 'start', 'ratio', 'points'");
    double lr = get_positive(*start, join(p, "start"));
    double q = get_positive(*ratio, join(p, "ratio"));
    if (q <= 1.0) fail(join(p, "ratio"), "ratio must be > 1");
    int count = get_int_in(*points, join(p, "points"), 2, 1000);
    cfg.base_lrs.clear();
    for (int i = 0; i < count; ++i, lr *= q) cfg.base_lrs.push_back(lr);
  }
}

}  // namespace

Nonlinearity parse_nonlinearity(const std::string& name, const std::string& path) {
  if (name == "identity") return Nonlinearity::Identity;
  if (name == "relu") return Nonlinearity::Relu;
  if (name == "gelu") return Nonlinearity::Gelu;
  fail(path, "unknown nonlinearity '" + name + "' (expected identity, relu or gelu)");
}

NumericOptimizer parse_numeric_optimizer(const std::string& name, const std::string& path) {
  if (name == "sgd") return NumericOptimizer::SGD;
  if (name == "adam") return NumericOptimizer::Adam;
  if (name == "adam_ps") return NumericOptimizer::AdamPS;
  if (name == "adam_atan2") return NumericOptimizer::AdamAtan2;
  fail(path, "unknown optimizer '" + name + "' (expected sgd, adam, adam_ps or adam_atan2)");
}

EpsilonMode parse_epsilon_mode(const std::string& name, const std::string& path) {
  if (name == "constant") return EpsilonMode::Constant;
  if (name == "per_layer") return EpsilonMode::PerLayer;
  if (name == "none") return EpsilonMode::None;
  fail(path, "unknown epsilon mode '" + name + "' (expected constant, per_layer or none)");
}

DecayKind parse_decay_kind(const std::string& name, const std::string& path) {
  if (name == "none") return DecayKind::None;
  if (name == "cosine") return DecayKind::Cosine;
  fail(path, "unknown decay '" + name + "' (expected none or cosine)");
}

const char* epsilon_mode_name(EpsilonMode mode) {
  switch (mode) {
    case EpsilonMode::Constant: return "constant";
    case EpsilonMode::PerLayer: return "per_layer";
    case EpsilonMode::None: return "none";
  }
  return "?";
}

const char* decay_kind_name(DecayKind kind) {
  switch (kind) {
    case DecayKind::None: return "none";
    case DecayKind::Cosine: return "cosine";
  }
  return "?";
}

RunConfig parse_run_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is the 1-based offset just past the failure point.
    std::size_t line = 1, column = 1;
    const std::size_t stop = e.byte > 0 ? std::min(text.size(), e.byte - 1) : 0;
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string reason = e.what();
    if (auto pos = reason.find("] "); pos != std::string::npos) reason = reason.substr(pos + 2);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + reason);
  }
  require_object(root, "(top level)");
  check_keys(root, "(top level)",
             {"schema_version", "parameterization", "use_solved_c", "alignment", "optimizer",
              "schedule", "model", "sweep", "lrsweep", "out_dir"});

  RunConfig cfg;
  const Json* version = find(root, "schema_version");
  if (!version) fail("schema_version", "missing (this tool reads schema_version 1)");
  cfg.schema_version = static_cast<int>(get_int(*version, "schema_version"));
  if (cfg.schema_version != 1) {
    fail("schema_version",
         "unsupported version " + std::to_string(cfg.schema_version) + " (expected 1)");
  }

  with_field(root, "", "parameterization", [&](const Json& v, const std::string& p) {
    cfg.parameterization = parse_parameterization(v, p);
  });
  with_field(root, "", "use_solved_c",
             [&](const Json& v, const std::string& p) { cfg.use_solved_c = get_bool(v, p); });
  with_field(root, "", "alignment", [&](const Json& v, const std::string& p) {
    cfg.alignment = parse_alignment(v, p);
  });
  with_field(root, "", "optimizer",
             [&](const Json& v, const std::string& p) { parse_optimizer(v, p, cfg.optimizer); });
  with_field(root, "", "model",
             [&](const Json& v, const std::string& p) { parse_model(v, p, cfg); });

  bool saw_total_steps = false;
  with_field(root, "", "schedule", [&](const Json& v, const std::string& p) {
    parse_schedule(v, p, cfg.schedule, saw_total_steps);
  });
  if (!saw_total_steps) cfg.schedule.total_steps = cfg.steps;

  with_field(root, "", "sweep",
             [&](const Json& v, const std::string& p) { parse_sweep(v, p, cfg); });
  if (cfg.fit_step > cfg.steps) {
    fail("sweep.fit_step", "fit_step " + std::to_string(cfg.fit_step) +
                               " exceeds model.steps = " + std::to_string(cfg.steps));
  }
  with_field(root, "", "lrsweep",
             [&](const Json& v, const std::string& p) { parse_lrsweep(v, p, cfg); });
  with_field(root, "", "out_dir",
             [&](const Json& v, const std::string& p) { cfg.out_dir = get_string(v, p); });
  if (cfg.out_dir.empty()) fail("out_dir", "must not be empty");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ConfigError("failed reading config file '" + path + "'");
  try {
    return parse_run_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string serialize_run_config(const RunConfig& cfg) {
  Json root;
  root["schema_version"] = cfg.schema_version;
  root["parameterization"] = to_json(cfg.parameterization);
  root["use_solved_c"] = cfg.use_solved_c;
  root["alignment"] = to_json(cfg.alignment);
  root["optimizer"] = Json{
      {"kind", numeric_optimizer_name(cfg.optimizer.kind)},
      {"beta1", cfg.optimizer.beta1},
      {"beta2", cfg.optimizer.beta2},
      {"epsilon",
       Json{{"mode", epsilon_mode_name(cfg.optimizer.epsilon_policy.mode)},
            {"base", cfg.optimizer.epsilon_policy.base_epsilon},
            {"base_width", cfg.optimizer.epsilon_policy.base_width}}},
      {"atan2_a", cfg.optimizer.atan2_a},
      {"atan2_b", cfg.optimizer.atan2_b},
      {"update_clip_rms",
       cfg.optimizer.update_clip_rms ? Json(*cfg.optimizer.update_clip_rms) : Json(nullptr)},
      {"bias_correction", cfg.optimizer.bias_correction}};
  root["schedule"] = Json{{"base_lr", cfg.schedule.base_lr},
                          {"gamma", Json{{"embedding", cfg.schedule.gamma_embedding},
                                         {"hidden", cfg.schedule.gamma_hidden},
                                         {"readout", cfg.schedule.gamma_readout}}},
                          {"base_width", cfg.schedule.base_width},
                          {"warmup_steps", cfg.schedule.warmup_steps},
                          {"total_steps", cfg.schedule.total_steps},
                          {"decay", decay_kind_name(cfg.schedule.decay)}};
  root["model"] = Json{{"widths", cfg.widths},
                       {"seeds", cfg.seeds},
                       {"d", cfg.d},
                       {"L", cfg.L},
                       {"nonlinearity", nonlinearity_name(cfg.nonlinearity)},
                       {"batch_size", cfg.batch_size},
                       {"steps", cfg.steps},
                       {"input_scale", cfg.input_scale},
                       {"target_scale", cfg.target_scale}};
  root["sweep"] = Json{{"quantities", cfg.quantities},
                       {"fit_step", cfg.fit_step},
                       {"exponent_tolerance", cfg.exponent_tolerance},
                       {"steep_exponent_tolerance", cfg.steep_exponent_tolerance}};
  root["lrsweep"] = Json{{"base_lrs", cfg.base_lrs}};
  root["out_dir"] = cfg.out_dir;
  return root.dump(2) + "\n";
}

bool operator==(const RunConfig& x, const RunConfig& y) {
  const auto& xo = x.optimizer;
  const auto& yo = y.optimizer;
  const auto& xs = x.schedule;
  const auto& ys = y.schedule;
  return x.schema_version == y.schema_version &&
         x.parameterization.embedding == y.parameterization.embedding &&
         x.parameterization.hidden == y.parameterization.hidden &&
         x.parameterization.readout == y.parameterization.readout &&
         x.parameterization.name == y.parameterization.name && x.use_solved_c == y.use_solved_c &&
         x.alignment == y.alignment && x.alignment.name == y.alignment.name &&
         xo.kind == yo.kind && xo.beta1 == yo.beta1 && xo.beta2 == yo.beta2 &&
         xo.epsilon_policy.mode == yo.epsilon_policy.mode &&
         xo.epsilon_policy.base_epsilon == yo.epsilon_policy.base_epsilon &&
         xo.epsilon_policy.base_width == yo.epsilon_policy.base_width &&
         xo.atan2_a == yo.atan2_a && xo.atan2_b == yo.atan2_b &&
         xo.update_clip_rms == yo.update_clip_rms && xo.bias_correction == yo.bias_correction &&
         xs.base_lr == ys.base_lr && xs.gamma_embedding == ys.gamma_embedding &&
         xs.gamma_hidden == ys.gamma_hidden && xs.gamma_readout == ys.gamma_readout &&
         xs.c == ys.c && xs.base_width == ys.base_width && xs.warmup_steps == ys.warmup_steps &&
         xs.total_steps == ys.total_steps && xs.decay == ys.decay && x.widths == y.widths &&
         x.seeds == y.seeds && x.d == y.d && x.L == y.L && x.nonlinearity == y.nonlinearity &&
         x.batch_size == y.batch_size && x.steps == y.steps &&
         x.input_scale == y.input_scale && x.target_scale == y.target_scale &&
         x.quantities == y.quantities &&
         x.fit_step == y.fit_step && x.exponent_tolerance == y.exponent_tolerance &&
         x.steep_exponent_tolerance == y.steep_exponent_tolerance && x.base_lrs == y.base_lrs &&
         x.out_dir == y.out_dir;
}

}  // namespace widthlab
