// table_golden.hpp - the reference summary table for the four presets: init
// variance, forward multiplier and gradient scale per role, plus the solved
// max-stable learning-rate scaling for the three optimizer families under
// full and no alignment. The golden copy is embedded data; the computed copy
// comes from the presets and the constraint solver, and `check_table`
// compares the two cell by cell with exact rational equality.

#ifndef WIDTHLAB_TABLE_GOLDEN_HPP
#define WIDTHLAB_TABLE_GOLDEN_HPP

#include <string>
#include <vector>

#include "widthlab/paramspace.hpp"
#include "widthlab/rat.hpp"

namespace widthlab {

// One table row = (preset, role). Every value is the exponent of n in the
// displayed quantity, so "lr ~ n^{-c}" is stored as -c: init variance
// exponent -2b, multiplier exponent -a, gradient exponent -g, and six
// learning-rate exponents (optimizer-major: sgd/adam/adafactor under full
// alignment, then the same under no alignment).
struct TableRow {
  std::string preset;
  LayerRole role = LayerRole::Embedding;
  Rat init_variance;
  Rat multiplier;
  Rat gradient;
  Rat lr_full_sgd, lr_full_adam, lr_full_adafactor;
  Rat lr_no_sgd, lr_no_adam, lr_no_adafactor;

  // The nine value columns in header order.
  const Rat& column(std::size_t index) const;
};

// Header names of the nine value columns, in TableRow::column order.
const std::vector<std::string>& table_column_names();

// The embedded reference: 12 rows (4 presets x 3 roles), presets in the
// order standard, ntk, mup, mfp.
std::vector<TableRow> golden_table();

// The same 12 rows regenerated from preset() + gradient_exponents() +
// max_stable_lr() at depth L = 3.
std::vector<TableRow> computed_table();

struct TableDiff {
  std::string preset;
  LayerRole role = LayerRole::Embedding;
  std::string column;
  Rat golden;
  Rat computed;
};

// Cells where the two tables disagree (empty = identical). Requires the row
// sets to line up (same presets and roles in the same order); a layout
// mismatch throws std::invalid_argument.
std::vector<TableDiff> check_table(const std::vector<TableRow>& golden,
                                   const std::vector<TableRow>& computed);

// Renders an exponent of n as a power: "1", "n", "1/n", "sqrt(n)",
// "1/sqrt(n)", general "n^(p/q)". Presentation only; checks compare Rats.
std::string power_of_n(const Rat& exponent);

// Aligned fixed-width text table with a two-line header.
std::string render_table(const std::vector<TableRow>& rows);

}  // namespace widthlab

#endif  // WIDTHLAB_TABLE_GOLDEN_HPP
