// bindings.cpp - Python bindings for the symbolic core plus thin JSON entry
// points into the empirical pipelines. Heavyweight sweep results cross the
// boundary as JSON text produced by the same deterministic serializers the
// CLI uses, so Python sees byte-identical structures.

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "widthlab/config.hpp"
#include "widthlab/constraints.hpp"
#include "widthlab/empirics.hpp"
#include "widthlab/numerics.hpp"
#include "widthlab/optim.hpp"
#include "widthlab/paramspace.hpp"
#include "widthlab/rat.hpp"
#include "widthlab/serialize.hpp"
#include "widthlab/table_golden.hpp"

namespace py = pybind11;
using namespace widthlab;

namespace {

NumericOptimizer numeric_optimizer_from_name(const std::string& name) {
  for (NumericOptimizer opt : {NumericOptimizer::SGD, NumericOptimizer::Adam,
                               NumericOptimizer::AdamPS, NumericOptimizer::AdamAtan2}) {
    if (name == numeric_optimizer_name(opt)) return opt;
  }
  throw std::invalid_argument("unknown optimizer: \"" + name +
                              "\" (expected sgd, adam, adam_ps or adam_atan2)");
}

OptimizerKind optimizer_kind_from_name(const std::string& name) {
  for (OptimizerKind kind :
       {OptimizerKind::SGD, OptimizerKind::Adam, OptimizerKind::AdafactorFamily}) {
    if (name == optimizer_kind_name(kind)) return kind;
  }
  throw std::invalid_argument("unknown optimizer kind: \"" + name +
                              "\" (expected sgd, adam or adafactor)");
}

std::string rat_repr(const Rat& r) { return "Rat('" + r.to_string() + "')"; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Width-scaling parameterization laboratory: exact constraint algebra, "
            "max-stable learning-rate solving, and instrumented width sweeps.";

  // Invalid config text is a value problem, not a runtime fault.
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Rat>(m, "Rat",
                  "Exact rational exponent. Construct from (num, den), an int, or "
                  "Rat.parse('p/q'); arithmetic and comparisons are exact.")
      .def(py::init<std::int64_t, std::int64_t>(), py::arg("num"), py::arg("den") = 1)
      .def_static("parse", &Rat::parse, py::arg("text"))
      .def_property_readonly("num", &Rat::num)
      .def_property_readonly("den", &Rat::den)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def(py::self / py::self)
      .def(-py::self)
      .def(py::self == py::self)
      .def(py::self != py::self)
      .def(py::self < py::self)
      .def(py::self <= py::self)
      .def(py::self > py::self)
      .def(py::self >= py::self)
      .def("__hash__",
           [](const Rat& r) {
             return py::hash(py::make_tuple(r.num(), r.den()));
           })
      .def("__float__", &Rat::to_double)
      .def("__str__", &Rat::to_string)
      .def("__repr__", &rat_repr);
  py::implicitly_convertible<py::int_, Rat>();

  py::enum_<LayerRole>(m, "LayerRole")
      .value("Embedding", LayerRole::Embedding)
      .value("Hidden", LayerRole::Hidden)
      .value("Readout", LayerRole::Readout);

  py::enum_<OptimizerKind>(m, "OptimizerKind",
                           "Symbolic scaling families: SGD, Adam (covers adam_atan2), "
                           "AdafactorFamily (Adafactor and Adam+parameter-scaling).")
      .value("SGD", OptimizerKind::SGD)
      .value("Adam", OptimizerKind::Adam)
      .value("AdafactorFamily", OptimizerKind::AdafactorFamily);

  py::enum_<Regime>(m, "Regime")
      .value("Unstable", Regime::Unstable)
      .value("Trivial", Regime::Trivial)
      .value("Kernel", Regime::Kernel)
      .value("FeatureLearning", Regime::FeatureLearning);

  py::class_<LayerTriple>(m, "LayerTriple",
                          "One role's exponents: multiplier n^{-a}, init std n^{-b}, "
                          "learning rate n^{-c}.")
      .def(py::init<>())
      .def_readwrite("a", &LayerTriple::a)
      .def_readwrite("b", &LayerTriple::b)
      .def_readwrite("c", &LayerTriple::c)
      .def(py::self == py::self)
      .def("__repr__", [](const LayerTriple& t) {
        return "LayerTriple(a=" + t.a.to_string() + ", b=" + t.b.to_string() +
               ", c=" + t.c.to_string() + ")";
      });

  py::class_<Parameterization>(m, "Parameterization")
      .def(py::init<>())
      .def_readwrite("embedding", &Parameterization::embedding)
      .def_readwrite("hidden", &Parameterization::hidden)
      .def_readwrite("readout", &Parameterization::readout)
      .def_readwrite("name", &Parameterization::name)
      .def("__repr__", [](const Parameterization& p) {
        std::ostringstream out;
        out << "Parameterization(" << (p.name.empty() ? "unnamed" : p.name) << ": a=("
            << p.embedding.a << ", " << p.hidden.a << ", " << p.readout.a << "), b=("
            << p.embedding.b << ", " << p.hidden.b << ", " << p.readout.b << "), c=("
            << p.embedding.c << ", " << p.hidden.c << ", " << p.readout.c << "))";
        return out.str();
      });

  py::class_<InitViolation>(m, "InitViolation")
      .def_readonly("role", &InitViolation::role)
      .def_readonly("constraint", &InitViolation::constraint)
      .def_readonly("lhs", &InitViolation::lhs)
      .def("__repr__", [](const InitViolation& v) {
        return std::string("InitViolation(") + role_name(v.role) + ": " + v.constraint +
               ", lhs=" + v.lhs.to_string() + ")";
      });

  py::class_<InitReport>(m, "InitReport")
      .def_readonly("stable_at_init", &InitReport::stable_at_init)
      .def_readonly("violations", &InitReport::violations);

  py::class_<AlignmentAssumption>(m, "AlignmentAssumption",
                                  "Alignment exponents (alpha, omega, u) per role, each in "
                                  "[1/2, 1].")
      .def(py::init<>())
      .def_static("full_alignment", &AlignmentAssumption::full_alignment)
      .def_static("no_alignment", &AlignmentAssumption::no_alignment)
      .def_static("tensor_programs", &AlignmentAssumption::tensor_programs)
      .def_readwrite("alpha_hidden", &AlignmentAssumption::alpha_hidden)
      .def_readwrite("alpha_readout", &AlignmentAssumption::alpha_readout)
      .def_readwrite("omega_hidden", &AlignmentAssumption::omega_hidden)
      .def_readwrite("omega_readout", &AlignmentAssumption::omega_readout)
      .def_readwrite("u_hidden", &AlignmentAssumption::u_hidden)
      .def_readwrite("u_readout", &AlignmentAssumption::u_readout)
      .def_readwrite("name", &AlignmentAssumption::name)
      .def("validate", &AlignmentAssumption::validate)
      .def(py::self == py::self)
      .def("__repr__", [](const AlignmentAssumption& a) {
        return "AlignmentAssumption(" + (a.name.empty() ? std::string("custom") : a.name) + ")";
      });

  py::class_<GradientExponents>(m, "GradientExponents")
      .def_readonly("g_embedding", &GradientExponents::g_embedding)
      .def_readonly("g_hidden", &GradientExponents::g_hidden)
      .def_readonly("g_readout", &GradientExponents::g_readout)
      .def(py::self == py::self)
      .def("__repr__", [](const GradientExponents& g) {
        return "GradientExponents(" + g.g_embedding.to_string() + ", " + g.g_hidden.to_string() +
               ", " + g.g_readout.to_string() + ")";
      });

  py::class_<RoleExponents>(m, "RoleExponents")
      .def(py::init<>())
      .def_readwrite("embedding", &RoleExponents::embedding)
      .def_readwrite("hidden", &RoleExponents::hidden)
      .def_readwrite("readout", &RoleExponents::readout)
      .def(py::self == py::self)
      .def("__repr__", [](const RoleExponents& c) {
        return "RoleExponents(" + c.embedding.to_string() + ", " + c.hidden.to_string() + ", " +
               c.readout.to_string() + ")";
      });

  py::class_<BindingConstraint>(m, "BindingConstraint")
      .def_readonly("name", &BindingConstraint::name)
      .def_readonly("value", &BindingConstraint::value)
      .def("__repr__", [](const BindingConstraint& b) {
        return "BindingConstraint(" + b.name + " = " + b.value.to_string() + ")";
      });

  py::class_<ConstraintReport>(m, "ConstraintReport")
      .def_readonly("g", &ConstraintReport::g)
      .def_readonly("r_embedding", &ConstraintReport::r_embedding)
      .def_readonly("r_hidden", &ConstraintReport::r_hidden)
      .def_readonly("r_readout_input", &ConstraintReport::r_readout_input)
      .def_readonly("logit_margin", &ConstraintReport::logit_margin)
      .def_readonly("stable", &ConstraintReport::stable)
      .def_readonly("nontrivial", &ConstraintReport::nontrivial)
      .def_readonly("feature_learning", &ConstraintReport::feature_learning)
      .def_readonly("adafactor_extra_ok", &ConstraintReport::adafactor_extra_ok)
      .def_readonly("binding", &ConstraintReport::binding)
      .def_readonly("fixed_point_reached", &ConstraintReport::fixed_point_reached)
      .def("__repr__", [](const ConstraintReport& r) {
        std::ostringstream out;
        out << "ConstraintReport(stable=" << (r.stable ? "True" : "False")
            << ", nontrivial=" << (r.nontrivial ? "True" : "False")
            << ", r_hidden=" << r.r_hidden << ", logit_margin=" << r.logit_margin << ")";
        return out.str();
      });

  py::class_<MaxStableResult>(m, "MaxStableResult")
      .def_readonly("c", &MaxStableResult::c)
      .def_readonly("report", &MaxStableResult::report)
      .def_readonly("r_floor", &MaxStableResult::r_floor)
      .def("__repr__", [](const MaxStableResult& r) {
        return "MaxStableResult(c=RoleExponents(" + r.c.embedding.to_string() + ", " +
               r.c.hidden.to_string() + ", " + r.c.readout.to_string() +
               "), r_floor=" + r.r_floor.to_string() + ")";
      });

  py::class_<PowerLawFit>(m, "PowerLawFit")
      .def_readonly("exponent", &PowerLawFit::exponent)
      .def_readonly("log_coefficient", &PowerLawFit::log_coefficient)
      .def_readonly("residual_rms", &PowerLawFit::residual_rms)
      .def_readonly("n_points", &PowerLawFit::n_points)
      .def("__repr__", [](const PowerLawFit& f) {
        std::ostringstream out;
        out << "PowerLawFit(exponent=" << f.exponent << ", residual_rms=" << f.residual_rms
            << ", n_points=" << f.n_points << ")";
        return out.str();
      });

  m.def("preset", &preset, py::arg("name"),
        "One of the named presets: standard, ntk, mup, mfp (c = 0; solve for it).");
  m.def("preset_names", [] { return preset_names(); });
  m.def("check_init_stability", &check_init_stability, py::arg("p"));
  m.def("gradient_exponents", &gradient_exponents, py::arg("p"),
        "Init-time gradient-RMS exponents per role; throws on init-unstable input.");
  m.def("update_exponents", &update_exponents, py::arg("p"), py::arg("optimizer"));
  m.def("training_stability", &training_stability, py::arg("p"), py::arg("optimizer"),
        py::arg("alignment"), py::arg("depth_L") = 3,
        "Evaluates the stability/nontriviality constraint system exactly.");
  m.def("max_stable_lr", &max_stable_lr, py::arg("p"), py::arg("optimizer"), py::arg("alignment"),
        py::arg("depth_L") = 3,
        "Largest stable per-role learning-rate exponents (most negative c).");
  m.def("reparameterize", &reparameterize, py::arg("p"), py::arg("role"), py::arg("theta"),
        py::arg("optimizer"),
        "The theta-shift a+theta, b-theta with the optimizer's c correction.");
  m.def("classify", &classify, py::arg("p"), py::arg("optimizer"), py::arg("alignment"),
        py::arg("c"), py::arg("depth_L") = 3);
  m.def("optimizer_kind", &optimizer_kind_from_name, py::arg("name"),
        "Parses 'sgd', 'adam' or 'adafactor' into an OptimizerKind.");

  m.def(
      "fit_power_law",
      [](const std::vector<std::pair<double, double>>& points) { return fit_power_law(points); },
      py::arg("points"),
      "Least-squares power-law fit in log-log space; requires >= 2 points with "
      "positive coordinates.");

  m.def(
      "table_diffs",
      [] {
        std::vector<std::string> out;
        for (const TableDiff& d : check_table(golden_table(), computed_table())) {
          out.push_back(d.preset + "/" + role_name(d.role) + "/" + d.column + ": reference " +
                        d.golden.to_string() + ", computed " + d.computed.to_string());
        }
        return out;
      },
      "Cells where the solver output disagrees with the embedded reference "
      "table (empty list = exact match).");
  m.def("reference_table", [] { return render_table(golden_table()); },
        "The embedded reference table, rendered as aligned text.");
  m.def("computed_table", [] { return render_table(computed_table()); },
        "The solver-regenerated table, rendered as aligned text.");

  m.def("normalize_config", [](const std::string& text) {
    return serialize_run_config(parse_run_config(text));
  },
        py::arg("text"),
        "Parses a run config and re-emits the normalized form (every field "
        "explicit, stable key order). Raises ValueError on invalid input.");

  m.def(
      "width_sweep_json",
      [](const Parameterization& p, const std::string& optimizer, const std::vector<int>& widths,
         const std::vector<std::uint64_t>& seeds, int steps, int fit_step, int batch_size, int d,
         int L, double base_lr, int base_width, double input_scale, double target_scale,
         const std::vector<std::string>& quantities) -> std::string {
        SweepConfig sw;
        sw.widths = widths;
        sw.seeds = seeds;
        sw.steps = steps;
        sw.fit_step = fit_step;
        sw.batch_size = batch_size;
        sw.d = d;
        sw.L = L;
        sw.nonlinearity = Nonlinearity::Identity;
        sw.quantities = quantities;
        sw.input_scale = input_scale;
        sw.target_scale = target_scale;
        OptimizerConfig opt;
        opt.kind = numeric_optimizer_from_name(optimizer);
        const LearningRateSchedule sched = schedule_from(p, base_lr, base_width);
        py::gil_scoped_release release;
        return to_json(width_sweep(p, opt, sched, sw)).dump(2);
      },
      py::arg("p"), py::arg("optimizer"), py::arg("widths"), py::arg("seeds"), py::kw_only(),
      py::arg("steps") = 1, py::arg("fit_step") = 0, py::arg("batch_size") = 32, py::arg("d") = 32,
      py::arg("L") = 3, py::arg("base_lr") = 0.01, py::arg("base_width") = 256,
      py::arg("input_scale") = 1.0, py::arg("target_scale") = 1.0,
      py::arg("quantities") = std::vector<std::string>{"grad_rms", "activation_rms"},
      "Instrumented width sweep; returns the result as deterministic JSON text "
      "(the same serializer the CLI uses). Worker count follows the "
      "WIDTHLAB_THREADS environment variable.");
}
