// serialize.hpp - JSON emitters for core types, the scale-trace CSV writer,
// and deterministic number/file-name formatting shared by the CLI commands.
//
// All output here is deterministic: keys keep insertion order (ordered_json),
// doubles are printed with enough digits to round-trip, and nothing depends
// on locale, time, or environment. Rerunning a command over the same inputs
// therefore reproduces every output file byte for byte.

#ifndef WIDTHLAB_SERIALIZE_HPP
#define WIDTHLAB_SERIALIZE_HPP

#include <cstdint>
#include <ostream>
#include <string>

#include "json.hpp"
#include "widthlab/constraints.hpp"
#include "widthlab/empirics.hpp"
#include "widthlab/numerics.hpp"
#include "widthlab/paramspace.hpp"
#include "widthlab/rat.hpp"

namespace widthlab {

using Json = nlohmann::ordered_json;

// Shortest decimal string that parses back to exactly the same double
// ("0.1", "1e-09", "2048"). NaN and infinities map to "nan"/"inf"/"-inf"
// (CSV only; JSON emitters never receive them).
std::string format_double(double value);

// Rationals serialize as their exact string form ("1/2", "-3/2", "0").
Json to_json(const Rat& r);
Rat rat_from_json(const Json& j);  // accepts "p/q" strings and JSON integers

Json to_json(const LayerTriple& t);
Json to_json(const Parameterization& p);
Json to_json(const AlignmentAssumption& a);
Json to_json(const GradientExponents& g);
Json to_json(const RoleExponents& c);
Json to_json(const BindingConstraint& b);
Json to_json(const ConstraintReport& r);
Json to_json(const MaxStableResult& r);
Json to_json(const InitReport& r);
Json to_json(const PowerLawFit& f);
Json to_json(const QuantityFit& f);
Json to_json(const RunSummary& s);
Json to_json(const SweepResult& s);    // runs + fits (traces go to CSV)
Json to_json(const LrSweepCell& c);
Json to_json(const LrSweepResult& r);
Json to_json(const TwinReport& r);

// CSV with header "step,layer,role,quantity,value", one row per trace
// record in recording order. Layer 0 rows (the whole-model loss) render
// their role as "model".
void write_trace_csv(std::ostream& out, const ScaleTrace& trace);

// "{preset}_{optimizer}_{alignment}_n{width}_s{seed}.csv". Each label is
// sanitized: characters outside [A-Za-z0-9_-] become '-'.
std::string trace_filename(const std::string& preset, const std::string& optimizer,
                           const std::string& alignment, int width, std::uint64_t seed);

}  // namespace widthlab

#endif  // WIDTHLAB_SERIALIZE_HPP
