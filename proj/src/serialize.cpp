#include "widthlab/serialize.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace widthlab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // covers -0.0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

Json to_json(const Rat& r) { return r.to_string(); }

Rat rat_from_json(const Json& j) {
  if (j.is_string()) return Rat::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<std::int64_t>());
  throw std::invalid_argument("expected a rational ('p/q' string or integer), got " +
                              std::string(j.type_name()));
}

Json to_json(const LayerTriple& t) {
  return Json{{"a", to_json(t.a)}, {"b", to_json(t.b)}, {"c", to_json(t.c)}};
}

Json to_json(const Parameterization& p) {
  return Json{{"name", p.name},
              {"embedding", to_json(p.embedding)},
              {"hidden", to_json(p.hidden)},
              {"readout", to_json(p.readout)}};
}

Json to_json(const AlignmentAssumption& a) {
  return Json{{"name", a.name},
              {"alpha_hidden", to_json(a.alpha_hidden)},
              {"omega_hidden", to_json(a.omega_hidden)},
              {"u_hidden", to_json(a.u_hidden)},
              {"alpha_readout", to_json(a.alpha_readout)},
              {"omega_readout", to_json(a.omega_readout)},
              {"u_readout", to_json(a.u_readout)}};
}

Json to_json(const GradientExponents& g) {
  return Json{{"embedding", to_json(g.g_embedding)},
              {"hidden", to_json(g.g_hidden)},
              {"readout", to_json(g.g_readout)}};
}

Json to_json(const RoleExponents& c) {
  return Json{{"embedding", to_json(c.embedding)},
              {"hidden", to_json(c.hidden)},
              {"readout", to_json(c.readout)}};
}

Json to_json(const BindingConstraint& b) {
  return Json{{"name", b.name}, {"value", to_json(b.value)}};
}

Json to_json(const ConstraintReport& r) {
  Json binding = Json::array();
  for (const auto& b : r.binding) binding.push_back(to_json(b));
  return Json{{"gradient_exponents", to_json(r.g)},
              {"r_embedding", to_json(r.r_embedding)},
              {"r_hidden", to_json(r.r_hidden)},
              {"r_readout_input", to_json(r.r_readout_input)},
              {"logit_margin", to_json(r.logit_margin)},
              {"stable", r.stable},
              {"nontrivial", r.nontrivial},
              {"feature_learning", r.feature_learning},
              {"adafactor_extra_ok", r.adafactor_extra_ok},
              {"fixed_point_reached", r.fixed_point_reached},
              {"binding", binding}};
}

Json to_json(const MaxStableResult& r) {
  return Json{{"c", to_json(r.c)}, {"r_floor", to_json(r.r_floor)}, {"report", to_json(r.report)}};
}

Json to_json(const InitReport& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) {
    violations.push_back(Json{
        {"role", role_name(v.role)}, {"constraint", v.constraint}, {"lhs", to_json(v.lhs)}});
  }
  return Json{{"stable_at_init", r.stable_at_init}, {"violations", violations}};
}

Json to_json(const PowerLawFit& f) {
  return Json{{"exponent", f.exponent},
              {"log_coefficient", f.log_coefficient},
              {"residual_rms", f.residual_rms},
              {"n_points", f.n_points}};
}

Json to_json(const QuantityFit& f) {
  Json j{{"quantity", f.quantity},
         {"layer", f.layer},
         {"role", f.layer == 0 ? "model" : role_name(f.role)},
         {"fit", to_json(f.fit)}};
  if (f.prediction_defined) {
    j["predicted_exponent"] = f.predicted_exponent;
    j["within"] = std::abs(f.fit.exponent - f.predicted_exponent);
  } else {
    j["predicted_exponent"] = nullptr;
  }
  return j;
}

Json to_json(const RunSummary& s) {
  return Json{{"width", s.width},
              {"seed", s.seed},
              {"diverged", s.diverged},
              {"final_loss", s.final_loss}};
}

Json to_json(const SweepResult& s) {
  Json runs = Json::array();
  for (const auto& r : s.runs) runs.push_back(to_json(r));
  Json fits = Json::array();
  for (const auto& f : s.fits) fits.push_back(to_json(f));
  return Json{{"parameterization", to_json(s.param)}, {"runs", runs}, {"fits", fits}};
}

Json to_json(const LrSweepCell& c) {
  Json j{{"width", c.width},
         {"base_lr", c.base_lr},
         {"diverged", c.diverged},
         {"total", c.total}};
  if (c.diverged == c.total) {
    j["mean_final_loss"] = nullptr;
  } else {
    j["mean_final_loss"] = c.mean_final_loss;
  }
  return j;
}

Json to_json(const LrSweepResult& r) {
  Json optima = Json::array();
  for (const auto& [width, beta] : r.optimal_beta) {
    optima.push_back(Json{{"width", width}, {"optimal_base_lr", beta}});
  }
  Json cells = Json::array();
  for (const auto& c : r.cells) cells.push_back(to_json(c));
  return Json{{"optimal_beta_per_width", optima}, {"fit", to_json(r.fit)}, {"cells", cells}};
}

Json to_json(const TwinReport& r) {
  return Json{{"init_logit_rel_dev", r.init_logit_rel_dev},
              {"max_rel_loss_dev", r.max_rel_loss_dev},
              {"loss_base", r.loss_base},
              {"loss_shifted", r.loss_shifted}};
}

void write_trace_csv(std::ostream& out, const ScaleTrace& trace) {
  out << "step,layer,role,quantity,value\n";
  for (const auto& rec : trace.records) {
    const char* role = rec.layer == 0 ? "model" : role_name(rec.role);
    out << rec.step << ',' << rec.layer << ',' << role << ',' << rec.quantity << ','
        << format_double(rec.value) << '\n';
  }
}

namespace {

std::string sanitize_label(const std::string& label) {
  std::string out = label.empty() ? std::string("unnamed") : label;
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
    if (!ok) ch = '-';
  }
  return out;
}

}  // namespace

std::string trace_filename(const std::string& preset, const std::string& optimizer,
                           const std::string& alignment, int width, std::uint64_t seed) {
  return sanitize_label(preset) + "_" + sanitize_label(optimizer) + "_" +
         sanitize_label(alignment) + "_n" + std::to_string(width) + "_s" + std::to_string(seed) +
         ".csv";
}

}  // namespace widthlab
