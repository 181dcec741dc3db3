#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orbitforge/construction.hpp"
#include "orbitforge/measure.hpp"

namespace orbitforge {

// Union of primitives separated by '|': all, none, ap(r,m), ball(R).
// ap(r,m) holds for elements whose first coordinate (Z^d) or word length
// (F_k) is congruent to r mod m.
class SubsetSpec {
 public:
  SubsetSpec() = default;  // none
  static SubsetSpec parse(const std::string& text);

  bool contains(const GroupContext& G, const GroupElement& g) const;
  bool empty() const { return terms_.empty(); }
  const std::string& text() const { return text_; }
  std::function<bool(const GroupElement&)> predicate(const GroupContext& G) const;

 private:
  struct Term {
    enum class Kind { All, Ap, Ball } kind;
    long long a = 0, b = 0;
  };
  std::vector<Term> terms_;
  std::string text_ = "none";
};

struct MeasureInput {
  std::vector<std::vector<int>> group_table;
  std::vector<std::vector<int>> action_table;
  std::vector<Rational> weights;
  std::vector<int> partition;  // block label per point
  std::vector<int> subset;     // indicator for the class-bijectivity check
  int element = 1;
};

// `key = value` lines; '#' starts a comment. Values are JSON scalars or
// arrays, or bare words read as strings. Unknown keys are rejected.
struct RunConfig {
  std::string group = "Z^1";
  std::vector<std::string> gen_order;
  std::optional<int> radius;  // none = computed requirement
  int core = 1000;
  int steps = 1;
  Mode mode = Mode::Faithful;
  Mode later_mode = Mode::Faithful;  // steps >= 2 when mode is faithful
  Rational epsilon{1, 10};
  int density_radius = 1000000;
  std::optional<Rational> density_target;  // none = epsilon / 10
  std::vector<std::vector<int>> bits{{0}, {1}};
  SubsetSpec Y, phi0, B_tags;
  std::string out = "out";
  int verbosity = 1;
  long long max_radius = 10000000;
  std::size_t max_set = 200000;
  std::optional<MeasureInput> measure;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);  // ParseError, or IoError on read failure
  GroupContext make_group() const;
  Seed make_seed() const;
  PipelineOptions pipeline_options() const;
};

Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& r);

FiniteAction make_action(const MeasureInput& in);

// ---------------------------------------------------------------- bundles

struct DumpNames {
  std::string initial = "initial.dump";
  std::vector<std::string> steps;  // phi_k
  std::vector<std::string> phi5;   // snapshots after parity coding
};

DumpNames dump_names(const PipelineState& state);

// Deterministic JSON document; timings are kept out of it.
std::string bundle_text(const PipelineState& state, const RunConfig& cfg, const DumpNames& names);

struct VerifyOutcome {
  int claims = 0;
  int mismatches = 0;
  int failures = 0;  // recomputed verdicts other than pass
  std::vector<std::string> diff;
  bool refused = false;

  bool match() const { return mismatches == 0; }
};

// Re-runs every recorded claim against the dumps next to the bundle. The
// final dump may be given explicitly; its path replaces the last step dump.
VerifyOutcome verify_bundle(const std::string& bundle_path, const std::optional<std::string>& dump_path);

}  // namespace orbitforge
