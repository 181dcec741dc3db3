#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orbitforge/combinatorics.hpp"

namespace orbitforge {

// A finite group given by its multiplication table; element 0 is the identity.
struct FiniteGroup {
  std::string name;
  std::vector<std::vector<int>> mul;
  std::vector<int> inv;

  int order() const { return static_cast<int>(mul.size()); }
  static FiniteGroup cyclic(int n);
  static FiniteGroup klein();      // Z/2 x Z/2
  static FiniteGroup symmetric3(); // S_3
  static FiniteGroup from_table(std::string name, std::vector<std::vector<int>> table);

  // Subgroups as sorted element lists, in lexicographic order.
  std::vector<std::vector<int>> subgroups() const;
};

struct FiniteAction {
  FiniteGroup group;
  std::vector<std::vector<int>> act;  // act[g][y]
  std::vector<Rational> weights;

  int points() const { return static_cast<int>(weights.size()); }
  // Throws ArgumentError when an axiom or the weight normalization fails.
  void validate() const;

  // Left multiplication on the cosets gH.
  static FiniteAction cosets(const FiniteGroup& G, const std::vector<int>& H);
  static FiniteAction disjoint_union(const std::vector<FiniteAction>& parts);
  // Weight y proportional to ramp[y]; uniform when ramp is empty.
  FiniteAction with_weights(const std::vector<std::int64_t>& ramp) const;
};

struct FinitePartition {
  std::vector<int> block_of;
  int blocks = 0;

  static FinitePartition from_labels(const std::vector<int>& labels);
};

// For every x != y some g has g x and g y in different blocks.
bool is_generating(const FiniteAction& act, const FinitePartition& part);
// The join of h P over h in Q; the trivial partition for empty Q.
FinitePartition refine(const FiniteAction& act, const FinitePartition& part, const std::vector<int>& Q);
std::vector<int> fixed_points(const FiniteAction& act, int g);

struct FixMeasureResult {
  Rational lhs;  // nu(Fix(g))
  Rational rhs;  // least sum over Q of nu(g P n P), P in P^Q
  std::vector<int> argmin_Q;
  bool generating = false;
  bool le = false;     // lhs <= rhs
  bool equal = false;  // lhs == rhs
};

// Enumerates all Q subsets of the group.
FixMeasureResult fix_measure_formula(const FiniteAction& act, const FinitePartition& part, int g);

struct ClassBijectiveResult {
  std::vector<Rational> pushforward;  // nu{x : f_A(g x) = f_A(x)}
  std::vector<Rational> fixed;        // nu(Fix(g))
  std::vector<Rational> collapsed;    // nu{x : g x != x, f_A(g x) = f_A(x)}
  std::vector<char> inequality;       // pushforward <= fixed
  std::vector<char> null_collapse;    // collapsed == 0

  bool agree() const { return inequality == null_collapse; }
};

// f_A(x)(h) = 1 iff h^-1 x lies in A.
ClassBijectiveResult class_bijective_criterion(const FiniteAction& act, const std::vector<char>& A);

// Proper coloring of Y minus Fix(g) for the edges y ~ g y with colors 0..2;
// fixed points get -1.
std::vector<int> three_coloring(const FiniteAction& act, int g);

struct MeasureSweep {
  std::int64_t actions = 0;
  std::int64_t instances = 0;          // (action, partition, g)
  std::int64_t generating_instances = 0;
  std::int64_t le_failures = 0;
  std::int64_t equality_failures = 0;  // generating instances only
  std::int64_t criterion_instances = 0;
  std::int64_t criterion_disagreements = 0;
  std::int64_t coloring_failures = 0;
  std::vector<std::string> failures;   // first few, for reports

  bool pass() const {
    return le_failures == 0 && equality_failures == 0 && criterion_disagreements == 0 && coloring_failures == 0;
  }
};

// Deterministic family of actions: disjoint unions of coset actions of
// Z/1..Z/6, Z/2 x Z/2 and S_3 on at most 8 points, uniform and ramp weights.
std::vector<FiniteAction> sweep_actions(std::size_t min_actions);
MeasureSweep measure_sweep(std::size_t min_actions);

}  // namespace orbitforge
