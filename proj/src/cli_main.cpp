// cli_main.cpp - the widthlab command-line front-end.
//
// widthlab {solve|table|equiv|sweep|coordcheck|lrsweep} [--config PATH] ...
//
// Exit codes: 0 success, 1 internal/IO error, 2 config error, 3 check or
// tolerance failure. All outputs are deterministic for a given config and
// seed set; rerunning a command overwrites files with byte-identical content.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "widthlab/config.hpp"
#include "widthlab/constraints.hpp"
#include "widthlab/empirics.hpp"
#include "widthlab/serialize.hpp"
#include "widthlab/table_golden.hpp"

namespace {

using namespace widthlab;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;
constexpr double kTwinTolerance = 1e-6;

const LayerRole kRoles[] = {LayerRole::Embedding, LayerRole::Hidden, LayerRole::Readout};

// ---------------------------------------------------------------------------
// Shared plumbing

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::filesystem::path prepare_out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Raises ConfigError (exit 2) naming every violated init-stability
// constraint, e.g. "embedding: a+b=0 violated (a+b = 1/2)".
void ensure_init_stable(const Parameterization& p) {
  const InitReport report = check_init_stability(p);
  if (report.stable_at_init) return;
  std::string msg = "parameterization '" + p.name + "' is unstable at initialization:";
  for (const auto& v : report.violations) {
    msg += std::string(" ") + role_name(v.role) + ": " + v.constraint + " violated (a+b = " +
           v.lhs.to_string() + ");";
  }
  msg.pop_back();
  throw ConfigError(msg);
}

// The learning-rate exponents a command runs with: the solver's max-stable c
// under the configured optimizer family and alignment (use_solved_c, the
// default), or the c carried by the parameterization itself.
Parameterization resolve_c(const RunConfig& cfg) {
  ensure_init_stable(cfg.parameterization);
  Parameterization p = cfg.parameterization;
  if (cfg.use_solved_c) {
    const OptimizerKind family = scaling_kind(cfg.optimizer.kind);
    const RoleExponents c = max_stable_lr(p, family, cfg.alignment, cfg.L).c;
    p.embedding.c = c.embedding;
    p.hidden.c = c.hidden;
    p.readout.c = c.readout;
  }
  return p;
}

RoleExponents exponents_of(const Parameterization& p) {
  return RoleExponents{p.embedding.c, p.hidden.c, p.readout.c};
}

// Optimizer config ready to run against p: PerLayer epsilon needs the
// parameterization's gradient exponents.
OptimizerConfig runnable_optimizer(const RunConfig& cfg, const Parameterization& p) {
  OptimizerConfig opt = cfg.optimizer;
  if (opt.epsilon_policy.mode == EpsilonMode::PerLayer) {
    opt.epsilon_policy.gradient_exponents = gradient_exponents(p);
  }
  return opt;
}

LearningRateSchedule runnable_schedule(const RunConfig& cfg, const Parameterization& p) {
  LearningRateSchedule s = cfg.schedule;
  s.c = exponents_of(p);
  return s;
}

Json config_echo(const RunConfig& cfg) { return Json::parse(serialize_run_config(cfg)); }

std::string role_c_line(const Parameterization& p, LayerRole role) {
  const Rat& c = p.role(role).c;
  return std::string(role_name(role)) + ": c=" + c.to_string() + " (lr ~ " + power_of_n(-c) + ")";
}

// ---------------------------------------------------------------------------
// solve

Json solve_cell_json(const Parameterization& p, OptimizerKind family,
                     const AlignmentAssumption& align, int depth_L) {
  const MaxStableResult solved = max_stable_lr(p, family, align, depth_L);
  const Regime regime = classify(p, family, align, solved.c, depth_L);
  Json j;
  j["preset"] = p.name;
  j["optimizer_family"] = optimizer_kind_name(family);
  j["alignment"] = align.name;
  j["solved"] = to_json(solved);
  j["regime"] = regime_name(regime);
  return j;
}

void print_solve_cell(const Parameterization& p, OptimizerKind family,
                      const AlignmentAssumption& align, int depth_L) {
  const MaxStableResult solved = max_stable_lr(p, family, align, depth_L);
  const Regime regime = classify(p, family, align, solved.c, depth_L);
  const GradientExponents g = solved.report.g;
  Parameterization at_c = p;
  at_c.embedding.c = solved.c.embedding;
  at_c.hidden.c = solved.c.hidden;
  at_c.readout.c = solved.c.readout;
  std::cout << "max-stable learning-rate exponents for '" << p.name << "' + "
            << optimizer_kind_name(family) << " + " << align.name << ":\n";
  for (LayerRole role : kRoles) std::cout << "  " << role_c_line(at_c, role) << "\n";
  std::cout << "gradient exponents: embedding " << g.g_embedding.to_string() << ", hidden "
            << g.g_hidden.to_string() << ", readout " << g.g_readout.to_string() << "\n";
  std::cout << "regime: " << regime_name(regime) << " (r_L = "
            << solved.report.r_hidden.to_string()
            << ", logit margin = " << solved.report.logit_margin.to_string() << ", r floor = "
            << solved.r_floor.to_string() << ")\n";
  std::cout << "binding constraints:";
  for (const auto& b : solved.report.binding) {
    std::cout << " " << b.name << "=" << b.value.to_string();
  }
  std::cout << "\n";
}

int cmd_solve(const RunConfig& cfg, bool matrix) {
  const auto dir = prepare_out_dir(cfg);
  if (!matrix) {
    ensure_init_stable(cfg.parameterization);
    const OptimizerKind family = scaling_kind(cfg.optimizer.kind);
    print_solve_cell(cfg.parameterization, family, cfg.alignment, cfg.L);
    Json j = solve_cell_json(cfg.parameterization, family, cfg.alignment, cfg.L);
    j["config"] = config_echo(cfg);
    write_file(dir / "solve.json", j.dump(2) + "\n");
    std::cout << "wrote " << (dir / "solve.json").string() << "\n";
    return kExitOk;
  }

  const OptimizerKind families[] = {OptimizerKind::SGD, OptimizerKind::Adam,
                                    OptimizerKind::AdafactorFamily};
  const AlignmentAssumption aligns[] = {AlignmentAssumption::full_alignment(),
                                        AlignmentAssumption::no_alignment()};
  Json rows = Json::array();
  std::vector<std::vector<std::string>> lines = {
      {"preset", "optimizer", "alignment", "c_embedding", "c_hidden", "c_readout", "regime"}};
  for (const std::string& name : preset_names()) {
    const Parameterization p = preset(name);
    for (const auto& align : aligns) {
      for (OptimizerKind family : families) {
        const MaxStableResult solved = max_stable_lr(p, family, align, cfg.L);
        const Regime regime = classify(p, family, align, solved.c, cfg.L);
        rows.push_back(solve_cell_json(p, family, align, cfg.L));
        lines.push_back({name, optimizer_kind_name(family), align.name,
                         solved.c.embedding.to_string(), solved.c.hidden.to_string(),
                         solved.c.readout.to_string(), regime_name(regime)});
      }
    }
  }
  std::vector<std::size_t> width(lines[0].size(), 0);
  for (const auto& line : lines) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  for (std::size_t r = 0; r < lines.size(); ++r) {
    for (std::size_t i = 0; i < lines[r].size(); ++i) {
      std::cout << (i ? "  " : "") << lines[r][i]
                << std::string(width[i] - lines[r][i].size(), ' ');
    }
    std::cout << "\n";
  }
  Json j;
  j["rows"] = rows;
  write_file(dir / "solve_matrix.json", j.dump(2) + "\n");
  std::cout << "wrote " << (dir / "solve_matrix.json").string() << " (" << rows.size()
            << " cells)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// table

int cmd_table(bool check) {
  const auto computed = computed_table();
  std::cout << render_table(computed);
  if (!check) return kExitOk;
  const auto diffs = check_table(golden_table(), computed);
  if (diffs.empty()) {
    std::cout << "table check: OK (" << computed.size() << " rows, "
              << computed.size() * table_column_names().size() << " cells match the golden copy)\n";
    return kExitOk;
  }
  std::cout << "table check: FAIL (" << diffs.size() << " differing cells)\n";
  for (const auto& d : diffs) {
    std::cout << "  " << d.preset << "/" << role_name(d.role) << " " << d.column << ": golden "
              << d.golden.to_string() << ", computed " << d.computed.to_string() << "\n";
  }
  return kExitCheck;
}

// ---------------------------------------------------------------------------
// equiv

bool reports_equal_mod_gradient(const ConstraintReport& a, const ConstraintReport& b) {
  // The gradient exponents g are covariant under the shift (they move with
  // the representative); every other field is class-invariant.
  return a.r_embedding == b.r_embedding && a.r_hidden == b.r_hidden &&
         a.r_readout_input == b.r_readout_input && a.logit_margin == b.logit_margin &&
         a.stable == b.stable && a.nontrivial == b.nontrivial &&
         a.feature_learning == b.feature_learning && a.adafactor_extra_ok == b.adafactor_extra_ok &&
         a.fixed_point_reached == b.fixed_point_reached && a.binding == b.binding;
}

std::vector<std::pair<LayerRole, Rat>> parse_theta_args(const std::vector<std::string>& args) {
  std::vector<std::pair<LayerRole, Rat>> shifts;
  for (const std::string& arg : args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--theta expects ROLE=P/Q (e.g. hidden=1/2), got '" + arg + "'");
    }
    const std::string role_text = arg.substr(0, eq);
    LayerRole role;
    if (role_text == "embedding") {
      role = LayerRole::Embedding;
    } else if (role_text == "hidden") {
      role = LayerRole::Hidden;
    } else if (role_text == "readout") {
      role = LayerRole::Readout;
    } else {
      throw ConfigError("--theta: unknown role '" + role_text +
                        "' (expected embedding, hidden or readout)");
    }
    try {
      shifts.emplace_back(role, Rat::parse(arg.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw ConfigError("--theta " + arg + ": " + e.what());
    }
  }
  return shifts;
}

int cmd_equiv(const RunConfig& cfg, const std::vector<std::string>& theta_args, bool empirical) {
  std::vector<std::pair<LayerRole, Rat>> shifts = parse_theta_args(theta_args);
  if (shifts.empty()) {
    shifts = {{LayerRole::Hidden, rat(1, 2)}, {LayerRole::Readout, rat(1, 2)}};
  }
  const Parameterization base = resolve_c(cfg);
  const OptimizerKind family = scaling_kind(cfg.optimizer.kind);
  Parameterization shifted = base;
  for (const auto& [role, theta] : shifts) {
    shifted = reparameterize(shifted, role, theta, family);
  }
  shifted.name = base.name + "_shifted";

  std::cout << "base parameterization '" << base.name << "' -> shifted (optimizer family "
            << optimizer_kind_name(family) << "):\n";
  for (LayerRole role : kRoles) {
    const LayerTriple& t = shifted.role(role);
    std::cout << "  " << role_name(role) << ": a=" << t.a.to_string() << " b=" << t.b.to_string()
              << " c=" << t.c.to_string() << "\n";
  }

  const ConstraintReport before = training_stability(base, family, cfg.alignment, cfg.L);
  const ConstraintReport after = training_stability(shifted, family, cfg.alignment, cfg.L);
  const bool identical = reports_equal_mod_gradient(before, after);
  std::cout << "reports identical (gradient column excluded; it is covariant): "
            << (identical ? "yes" : "no") << "\n";

  Json j;
  j["config"] = config_echo(cfg);
  Json jshifts = Json::array();
  for (const auto& [role, theta] : shifts) {
    jshifts.push_back(Json{{"role", role_name(role)}, {"theta", to_json(theta)}});
  }
  j["shifts"] = jshifts;
  j["base"] = to_json(base);
  j["shifted"] = to_json(shifted);
  j["report_base"] = to_json(before);
  j["report_shifted"] = to_json(after);
  j["reports_identical"] = identical;

  bool empirical_ok = true;
  if (empirical) {
    Json twins = Json::array();
    for (int n : cfg.widths) {
      ModelShape shape;
      shape.n = n;
      shape.d = cfg.d;
      shape.L = cfg.L;
      shape.nonlinearity = cfg.nonlinearity;
      const TwinReport twin =
          twin_run(base, shifts, cfg.optimizer.kind, runnable_schedule(cfg, base), shape,
                   cfg.seeds.front(), cfg.steps, cfg.batch_size);
      const bool ok = twin.max_rel_loss_dev <= kTwinTolerance;
      empirical_ok = empirical_ok && ok;
      std::cout << "  twin n=" << n << ": max rel. loss deviation "
                << format_double(twin.max_rel_loss_dev) << " (tolerance "
                << format_double(kTwinTolerance) << "): " << (ok ? "PASS" : "FAIL") << "\n";
      Json jt = to_json(twin);
      jt["width"] = n;
      jt["pass"] = ok;
      twins.push_back(jt);
    }
    j["twins"] = twins;
  }

  const auto dir = prepare_out_dir(cfg);
  write_file(dir / "equiv.json", j.dump(2) + "\n");
  std::cout << "wrote " << (dir / "equiv.json").string() << "\n";
  return (identical && empirical_ok) ? kExitOk : kExitCheck;
}

// ---------------------------------------------------------------------------
// sweep / coordcheck

int cmd_sweep(RunConfig cfg, bool coordcheck) {
  if (coordcheck) {
    // Init + early-step exponent measurement: one update, fits at step 0.
    cfg.steps = 1;
    cfg.fit_step = 0;
    cfg.quantities = {"grad_rms", "activation_rms"};
    if (cfg.schedule.total_steps > 1) cfg.schedule.total_steps = 1;
  }
  const Parameterization p = resolve_c(cfg);
  SweepConfig sw;
  sw.widths = cfg.widths;
  sw.seeds = cfg.seeds;
  sw.steps = cfg.steps;
  sw.batch_size = cfg.batch_size;
  sw.d = cfg.d;
  sw.L = cfg.L;
  sw.nonlinearity = cfg.nonlinearity;
  sw.quantities = cfg.quantities;
  sw.fit_step = cfg.fit_step;
  sw.input_scale = cfg.input_scale;
  sw.target_scale = cfg.target_scale;
  const SweepResult result =
      width_sweep(p, runnable_optimizer(cfg, p), runnable_schedule(cfg, p), sw);

  const auto dir = prepare_out_dir(cfg);
  for (const ScaleTrace& trace : result.traces) {
    std::ostringstream csv;
    write_trace_csv(csv, trace);
    write_file(dir / trace_filename(p.name, numeric_optimizer_name(cfg.optimizer.kind),
                                    cfg.alignment.name, trace.width, trace.seed),
               csv.str());
  }

  // Predicted-vs-measured table; tolerance per |predicted exponent|.
  bool all_pass = true;
  int checked = 0;
  Json jfits = Json::array();
  for (const QuantityFit& fit : result.fits) {
    Json jf = to_json(fit);
    const std::string label = std::string(fit.layer == 0 ? "model" : role_name(fit.role)) +
                              " (layer " + std::to_string(fit.layer) + ") " + fit.quantity;
    if (fit.prediction_defined) {
      const double tol = std::abs(fit.predicted_exponent) >= 1.5 ? cfg.steep_exponent_tolerance
                                                                 : cfg.exponent_tolerance;
      const double gap = std::abs(fit.fit.exponent - fit.predicted_exponent);
      const bool pass = gap <= tol;
      all_pass = all_pass && pass;
      ++checked;
      std::cout << label << " exponent: predicted " << format_double(fit.predicted_exponent)
                << ", measured " << format_double(fit.fit.exponent) << " (|diff| "
                << format_double(gap) << " vs +/-" << format_double(tol) << "): "
                << (pass ? "PASS" : "FAIL") << "\n";
      jf["tolerance"] = tol;
      jf["pass"] = pass;
    } else {
      std::cout << label << " exponent: measured " << format_double(fit.fit.exponent)
                << " (no symbolic prediction)\n";
    }
    jfits.push_back(jf);
  }

  Json j;
  j["config"] = config_echo(cfg);
  j["parameterization"] = to_json(p);
  j["runs"] = to_json(result)["runs"];
  j["fits"] = jfits;
  const char* summary_name = coordcheck ? "coordcheck_summary.json" : "sweep_summary.json";
  write_file(dir / summary_name, j.dump(2) + "\n");
  std::cout << "wrote " << (dir / summary_name).string() << " and " << result.traces.size()
            << " trace CSVs\n";
  if (checked > 0 && !all_pass) return kExitCheck;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// lrsweep

int cmd_lrsweep(const RunConfig& cfg) {
  const Parameterization p = resolve_c(cfg);
  LrSweepConfig lw;
  lw.widths = cfg.widths;
  lw.base_lrs = cfg.base_lrs;
  lw.seeds = cfg.seeds;
  lw.steps = cfg.steps;
  lw.batch_size = cfg.batch_size;
  lw.d = cfg.d;
  lw.L = cfg.L;
  lw.nonlinearity = cfg.nonlinearity;
  lw.input_scale = cfg.input_scale;
  lw.target_scale = cfg.target_scale;
  LrSweepResult result;
  try {
    result = lr_sweep(p, runnable_optimizer(cfg, p), runnable_schedule(cfg, p), lw);
  } catch (const std::runtime_error& e) {
    // Only the all-runs-diverged-at-a-width outcome reaches here; the width
    // is named in the message.
    std::cerr << "lrsweep check failed: " << e.what() << "\n";
    return kExitCheck;
  }

  for (const auto& [width, beta] : result.optimal_beta) {
    std::cout << "n=" << width << ": optimal base LR " << format_double(beta) << "\n";
  }
  std::cout << "optimal base LR vs width: exponent " << format_double(result.fit.exponent)
            << " (log-space residual RMS " << format_double(result.fit.residual_rms) << ", "
            << result.fit.n_points << " widths)\n";

  std::ostringstream csv;
  csv << "width,base_lr,mean_final_loss,diverged,total\n";
  for (const LrSweepCell& cell : result.cells) {
    csv << cell.width << ',' << format_double(cell.base_lr) << ',';
    if (cell.diverged < cell.total) csv << format_double(cell.mean_final_loss);
    csv << ',' << cell.diverged << ',' << cell.total << '\n';
  }
  const auto dir = prepare_out_dir(cfg);
  write_file(dir / "lrsweep_cells.csv", csv.str());

  Json j;
  j["config"] = config_echo(cfg);
  j["parameterization"] = to_json(p);
  j["result"] = to_json(result);
  write_file(dir / "lrsweep_summary.json", j.dump(2) + "\n");
  std::cout << "wrote " << (dir / "lrsweep_summary.json").string() << " and "
            << (dir / "lrsweep_cells.csv").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// entry point

struct CommonFlags {
  std::string config_path;
  std::string out_override;
  int seeds_n = 0;
  std::vector<int> widths_override;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "run configuration file (JSON)");
  sub->add_option("--out", flags.out_override, "output directory (overrides out_dir)");
  sub->add_option("--seeds", flags.seeds_n, "use seeds 1..N (overrides model.seeds)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--widths", flags.widths_override, "comma-separated widths (overrides)")
      ->delimiter(',');
}

RunConfig effective_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg = load_run_config(flags.config_path);
  if (!flags.out_override.empty()) cfg.out_dir = flags.out_override;
  if (flags.seeds_n > 0) {
    cfg.seeds.clear();
    for (int s = 1; s <= flags.seeds_n; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (!flags.widths_override.empty()) {
    for (std::size_t i = 0; i < flags.widths_override.size(); ++i) {
      if (flags.widths_override[i] < 1 ||
          (i > 0 && flags.widths_override[i] <= flags.widths_override[i - 1])) {
        throw ConfigError("--widths must be positive and strictly increasing");
      }
    }
    cfg.widths = flags.widths_override;
    if (cfg.d > cfg.widths.front()) {
      throw ConfigError("--widths: input dimension " + std::to_string(cfg.d) +
                        " exceeds the smallest width " + std::to_string(cfg.widths.front()));
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"widthlab: width-scaling parameterization laboratory"};
  app.require_subcommand(1);

  CommonFlags solve_flags, equiv_flags, sweep_flags, coord_flags, lr_flags;
  bool matrix = false;
  bool check = false;
  bool empirical = false;
  std::vector<std::string> theta_args;

  CLI::App* solve = app.add_subcommand(
      "solve", "solve the max-stable learning-rate exponents for one configuration");
  add_common(solve, solve_flags);
  solve->add_flag("--matrix", matrix,
                  "solve all presets x optimizer families x {full, no} alignment (24 cells)");

  CLI::App* table =
      app.add_subcommand("table", "regenerate the preset summary table from the solver");
  table->add_flag("--check", check, "compare against the embedded golden copy");

  CLI::App* equiv = app.add_subcommand(
      "equiv", "apply an exponent shift and verify the constraint reports are unchanged");
  add_common(equiv, equiv_flags);
  equiv->add_option("--theta", theta_args,
                    "shift ROLE=P/Q (repeatable; default hidden=1/2 readout=1/2)");
  equiv->add_flag("--empirical", empirical, "also train twin runs and compare loss curves");

  CLI::App* sweep = app.add_subcommand("sweep", "instrumented width sweep with power-law fits");
  add_common(sweep, sweep_flags);

  CLI::App* coordcheck = app.add_subcommand(
      "coordcheck", "init/early-step exponent check (grad and activation RMS at step 0)");
  add_common(coordcheck, coord_flags);

  CLI::App* lrsweep =
      app.add_subcommand("lrsweep", "optimal base learning rate vs width power-law fit");
  add_common(lrsweep, lr_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(effective_config(solve_flags), matrix);
    if (table->parsed()) return cmd_table(check);
    if (equiv->parsed()) return cmd_equiv(effective_config(equiv_flags), theta_args, empirical);
    if (sweep->parsed()) return cmd_sweep(effective_config(sweep_flags), false);
    if (coordcheck->parsed()) return cmd_sweep(effective_config(coord_flags), true);
    if (lrsweep->parsed()) return cmd_lrsweep(effective_config(lr_flags));
    std::cerr << "no command given\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}
