#include "widthlab/table_golden.hpp"

#include <sstream>
#include <stdexcept>

#include "widthlab/constraints.hpp"

namespace widthlab {

namespace {

constexpr std::size_t kColumns = 9;

const LayerRole kRoles[] = {LayerRole::Embedding, LayerRole::Hidden, LayerRole::Readout};

TableRow make_row(const std::string& preset, LayerRole role, Rat var, Rat mult, Rat grad, Rat fs,
                  Rat fa, Rat ff, Rat ns, Rat na, Rat nf) {
  TableRow row;
  row.preset = preset;
  row.role = role;
  row.init_variance = var;
  row.multiplier = mult;
  row.gradient = grad;
  row.lr_full_sgd = fs;
  row.lr_full_adam = fa;
  row.lr_full_adafactor = ff;
  row.lr_no_sgd = ns;
  row.lr_no_adam = na;
  row.lr_no_adafactor = nf;
  return row;
}

}  // namespace

const Rat& TableRow::column(std::size_t index) const {
  switch (index) {
    case 0: return init_variance;
    case 1: return multiplier;
    case 2: return gradient;
    case 3: return lr_full_sgd;
    case 4: return lr_full_adam;
    case 5: return lr_full_adafactor;
    case 6: return lr_no_sgd;
    case 7: return lr_no_adam;
    case 8: return lr_no_adafactor;
    default: throw std::out_of_range("TableRow::column: index " + std::to_string(index));
  }
}

const std::vector<std::string>& table_column_names() {
  static const std::vector<std::string> names = {
      "init_var",     "multiplier", "gradient",    "lr_full_sgd", "lr_full_adam",
      "lr_full_adaf", "lr_no_sgd",  "lr_no_adam",  "lr_no_adaf"};
  return names;
}

std::vector<TableRow> golden_table() {
  const Rat h(1, 2);  // one half
  return {
      // preset, role, init var, multiplier, gradient, lr full {sgd, adam,
      // adafactor}, lr no-alignment {sgd, adam, adafactor}; all as exponents
      // of n.
      make_row("standard", LayerRole::Embedding, 0, 0, -h, h, 0, 0, h, 0, 0),
      make_row("standard", LayerRole::Hidden, -1, 0, -h, -h, -1, -h, 0, -h, 0),
      make_row("standard", LayerRole::Readout, -1, 0, 0, -1, -1, -h, -h, -h, 0),

      make_row("ntk", LayerRole::Embedding, 0, 0, -h, h, 0, 0, h, 0, 0),
      make_row("ntk", LayerRole::Hidden, 0, -h, -1, h, -h, -h, 1, 0, 0),
      make_row("ntk", LayerRole::Readout, 0, -h, -h, 0, -h, -h, h, 0, 0),

      make_row("mup", LayerRole::Embedding, -1, h, -h, 0, -h, 0, 0, -h, 0),
      make_row("mup", LayerRole::Hidden, -1, 0, -1, 0, -1, -h, h, -h, 0),
      make_row("mup", LayerRole::Readout, -1, -h, -h, 0, -h, 0, 0, 0, 0),

      make_row("mfp", LayerRole::Embedding, 0, 0, -1, 1, 0, 0, 1, 0, 0),
      make_row("mfp", LayerRole::Hidden, 0, -h, rat(-3, 2), 1, -h, -h, rat(3, 2), 0, 0),
      make_row("mfp", LayerRole::Readout, 0, -1, -1, 1, 0, 0, 1, h, 0),
  };
}

std::vector<TableRow> computed_table() {
  const OptimizerKind opts[] = {OptimizerKind::SGD, OptimizerKind::Adam,
                                OptimizerKind::AdafactorFamily};
  std::vector<TableRow> rows;
  for (const std::string& name : preset_names()) {
    const Parameterization p = preset(name);
    const GradientExponents g = gradient_exponents(p);
    // Solved c per (optimizer, alignment), shared by the preset's three rows.
    Rat full_c[3][3];
    Rat no_c[3][3];
    for (int oi = 0; oi < 3; ++oi) {
      const RoleExponents cf =
          max_stable_lr(p, opts[oi], AlignmentAssumption::full_alignment()).c;
      const RoleExponents cn = max_stable_lr(p, opts[oi], AlignmentAssumption::no_alignment()).c;
      for (int ri = 0; ri < 3; ++ri) {
        full_c[oi][ri] = cf.role(kRoles[ri]);
        no_c[oi][ri] = cn.role(kRoles[ri]);
      }
    }
    const Rat grads[3] = {g.g_embedding, g.g_hidden, g.g_readout};
    for (int ri = 0; ri < 3; ++ri) {
      const LayerTriple& t = p.role(kRoles[ri]);
      rows.push_back(make_row(name, kRoles[ri], rat(-2) * t.b, -t.a, -grads[ri],
                              -full_c[0][ri], -full_c[1][ri], -full_c[2][ri], -no_c[0][ri],
                              -no_c[1][ri], -no_c[2][ri]));
    }
  }
  return rows;
}

std::vector<TableDiff> check_table(const std::vector<TableRow>& golden,
                                   const std::vector<TableRow>& computed) {
  if (golden.size() != computed.size()) {
    throw std::invalid_argument("check_table: row count mismatch (" +
                                std::to_string(golden.size()) + " vs " +
                                std::to_string(computed.size()) + ")");
  }
  std::vector<TableDiff> diffs;
  for (std::size_t i = 0; i < golden.size(); ++i) {
    const TableRow& a = golden[i];
    const TableRow& b = computed[i];
    if (a.preset != b.preset || a.role != b.role) {
      throw std::invalid_argument("check_table: row " + std::to_string(i) + " layout mismatch (" +
                                  a.preset + "/" + role_name(a.role) + " vs " + b.preset + "/" +
                                  role_name(b.role) + ")");
    }
    for (std::size_t col = 0; col < kColumns; ++col) {
      if (!(a.column(col) == b.column(col))) {
        diffs.push_back({a.preset, a.role, table_column_names()[col], a.column(col),
                         b.column(col)});
      }
    }
  }
  return diffs;
}

std::string power_of_n(const Rat& exponent) {
  if (exponent.is_zero()) return "1";
  if (exponent == Rat(1)) return "n";
  if (exponent == Rat(-1)) return "1/n";
  if (exponent == rat(1, 2)) return "sqrt(n)";
  if (exponent == rat(-1, 2)) return "1/sqrt(n)";
  if (exponent.is_integer()) {
    const std::int64_t k = exponent.num();
    return k > 0 ? "n^" + std::to_string(k) : "1/n^" + std::to_string(-k);
  }
  return "n^(" + exponent.to_string() + ")";
}

std::string render_table(const std::vector<TableRow>& rows) {
  const auto& names = table_column_names();
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"preset", "role"};
  header.insert(header.end(), names.begin(), names.end());
  cells.push_back(header);
  for (const TableRow& row : rows) {
    std::vector<std::string> line = {row.preset, role_name(row.role)};
    for (std::size_t col = 0; col < kColumns; ++col) line.push_back(power_of_n(row.column(col)));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) out << "  ";
      out << cells[r][i];
      if (i + 1 < cells[r].size()) out << std::string(width[i] - cells[r][i].size(), ' ');
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
      out << std::string(total, '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace widthlab
