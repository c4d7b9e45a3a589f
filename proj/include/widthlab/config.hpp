// config.hpp - the run-configuration file: a versioned JSON dialect covering
// the parameterization, optimizer, schedule, alignment assumption, model and
// sweep settings consumed by the CLI commands.
//
// Parsing is strict: unknown keys, wrong types, out-of-range values and
// malformed rationals all raise ConfigError with the offending field path
// ("optimizer.beta1", ...); syntax errors carry the line and column. A parsed
// config serializes back to a normalized form that parses to an equal value
// (round-trip property). The full dialect is documented in the README.

#ifndef WIDTHLAB_CONFIG_HPP
#define WIDTHLAB_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "widthlab/constraints.hpp"
#include "widthlab/empirics.hpp"
#include "widthlab/optim.hpp"
#include "widthlab/paramspace.hpp"

namespace widthlab {

// Config syntax or semantic error; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Default lrsweep grid: 9 points, geometric from 1e-3 with ratio 2.
std::vector<double> default_base_lr_grid();

struct RunConfig {
  int schema_version = 1;

  // "parameterization": preset name, {"preset": ..., "c": {...}} with an
  // optional per-role learning-rate exponent override, or explicit triples.
  Parameterization parameterization = preset("standard");
  // When true (default), commands solve for the max-stable c under the
  // configured optimizer family and alignment; when false the c carried by
  // the parameterization is used as-is.
  bool use_solved_c = true;

  AlignmentAssumption alignment = AlignmentAssumption::full_alignment();
  OptimizerConfig optimizer;      // schedule-independent optimizer settings
  LearningRateSchedule schedule;  // base_lr, gammas, base_width, warmup, decay
                                  // (the c exponents are filled by commands)

  // "model" section.
  std::vector<int> widths = {128, 256, 512, 1024};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int d = 32;
  int L = 3;
  Nonlinearity nonlinearity = Nonlinearity::Identity;
  int batch_size = 32;
  int steps = 20;
  double input_scale = 1.0;   // multiplier on synthetic inputs
  double target_scale = 1.0;  // multiplier on synthetic targets

  // "sweep" section.
  std::vector<std::string> quantities = {"grad_rms", "activation_rms"};
  int fit_step = 0;
  double exponent_tolerance = 0.1;        // |measured - predicted| bound
  double steep_exponent_tolerance = 0.15;  // used when |predicted| >= 3/2

  // "lrsweep" section: explicit "base_lrs" list or a geometric
  // {"start", "ratio", "points"} grid (this default).
  std::vector<double> base_lrs = default_base_lr_grid();

  std::string out_dir = "out";
};

bool operator==(const RunConfig& x, const RunConfig& y);
inline bool operator!=(const RunConfig& x, const RunConfig& y) { return !(x == y); }

// Parses config text; throws ConfigError with a line/column anchor for
// syntax errors and a field path for semantic ones.
RunConfig parse_run_config(const std::string& text);

// Reads and parses a config file; IO failures also raise ConfigError.
RunConfig load_run_config(const std::string& path);

// Normalized serialized form (every field explicit, insertion-ordered keys,
// trailing newline). parse_run_config(serialize_run_config(c)) == c.
std::string serialize_run_config(const RunConfig& cfg);

// Name <-> enum helpers shared with the CLI ("identity"/"relu"/"gelu",
// "sgd"/"adam"/"adam_ps"/"adam_atan2", "constant"/"per_layer"/"none",
// "none"/"cosine"). Parse functions throw ConfigError on unknown names,
// prefixing the given field path.
Nonlinearity parse_nonlinearity(const std::string& name, const std::string& path);
NumericOptimizer parse_numeric_optimizer(const std::string& name, const std::string& path);
EpsilonMode parse_epsilon_mode(const std::string& name, const std::string& path);
DecayKind parse_decay_kind(const std::string& name, const std::string& path);
const char* epsilon_mode_name(EpsilonMode mode);
const char* decay_kind_name(DecayKind kind);

}  // namespace widthlab

#endif  // WIDTHLAB_CONFIG_HPP
