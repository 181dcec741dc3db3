#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "orbitforge/combinatorics.hpp"
#include "orbitforge/config.hpp"

namespace orbitforge {

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

struct Verification {
  std::string claim;
  Verdict verdict = Verdict::Pass;
  std::int64_t points_checked = 0;
  std::int64_t failures = 0;
  int scope = 0;
  std::string counterexample;
  std::string detail;

  bool pass() const { return verdict == Verdict::Pass; }
};

// Distinct T-patterns of a set of points. A pattern stores, per element of
// T in shortlex order, whether the label is defined and its value.
class PatternClasses {
 public:
  PatternClasses(const WindowConfig& cfg, const FinSet& T, const std::vector<Index>& points);

  bool exhausted() const { return exhausted_point_ >= 0; }
  Index exhausted_point() const { return exhausted_point_; }
  std::size_t num_classes() const { return ids_.size(); }
  int class_of(std::size_t i) const { return class_of_[i]; }
  bool incompatible(int a, int b) const;
  bool same(int a, int b) const { return a == b; }
  // Value at position k of T: 0, 1 or -1 for undefined.
  int value(int cls, std::size_t k) const;
  std::size_t width() const { return width_; }

 private:
  std::size_t width_ = 0, words_ = 0;
  std::vector<std::uint64_t> bits_;  // per class: defined words then value words
  std::vector<int> class_of_;
  std::vector<std::string> ids_;
  Index exhausted_point_ = -1;
};

Verification verify_syndetic(const Window& w, const std::vector<char>& member, const FinSet& F, int core);

Verification verify_recognizable(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T,
                                 int core);
Verification verify_recognizable(const WindowConfig& cfg, const Tag& tag, const FinSet& T, int core);

// Decoding table of a recognizability certificate: the T-patterns seen at
// core points inside and outside the set, one character per element of T
// ('0', '1' or 'u').
struct PatternTable {
  std::vector<std::string> inside, outside;
};

std::optional<PatternTable> pattern_table(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T,
                                          int core);
// Fails at every core point whose pattern is not listed under its side.
Verification check_pattern_table(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T, int core,
                                 const PatternTable& table);

// Smallest ball passing verify_recognizable (on at most max_points evenly
// strided core points), then thinned greedily in reverse shortlex order.
std::optional<FinSet> find_min_witness(const WindowConfig& cfg, const std::vector<char>& member, int r_max, int core,
                                       std::int64_t max_points = -1);

Verification verify_blocking(const WindowConfig& cfg, const GroupElement& s, const FinSet& T, int core);
// Least ball radius <= r_max whose ball blocks s on the core.
std::optional<FinSet> find_blocking_witness(const WindowConfig& cfg, const GroupElement& s, int r_max, int core);

struct SeparationWitness {
  FinSet window;
  std::vector<int> w, z;
  int scope = 0;
  std::size_t classes_w = 0, classes_z = 0, shared = 0;
  Verification result;
};

// Pattern classes over S u ST at core points of two total configurations.
SeparationWitness verify_separation(const WindowConfig& cfg_w, const WindowConfig& cfg_z, const std::vector<int>& w,
                                    const std::vector<int>& z, const FinSet& S, const FinSet& T, int core);

struct Cylinder {
  FinSet T;
  std::vector<std::vector<int>> patterns;  // one entry per element of T: 0, 1 or -1
  Verification equivalence;
};

Cylinder clopen_extract(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T, int core);

struct ClosureReport {
  Verification complement, set_union, translate;
  FinSet union_window;
  FinSet translate_window;
};

ClosureReport algebra_closure_check(const WindowConfig& cfg, const std::vector<char>& m1, const std::vector<char>& m2,
                                    const FinSet& T1, const FinSet& T2, const GroupElement& g, int core, int r_max);

struct PullbackResult {
  std::vector<int> colors;  // per core point
  Verification result;
};

// Colors each core point by image_coloring of its pattern over W and checks
// properness on edges {x, s x}, s in S_edges u S_edges^-1.
PullbackResult pullback_coloring(const WindowConfig& cfg, const FinSet& W,
                                 const std::function<int(const std::vector<int>&)>& image_coloring,
                                 const FinSet& S_edges, int core);

struct EntropyReport {
  Rational p;
  double H = 0;
  std::int64_t ones = 0, total = 0;
};

EntropyReport entropy_report(const WindowConfig& cfg);
double binary_entropy(double p);

}  // namespace orbitforge
