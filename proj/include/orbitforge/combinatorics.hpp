#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "orbitforge/config.hpp"

namespace orbitforge {

// Indices into a window, ascending (hence shortlex).
using PointSet = std::vector<Index>;
using Rational = boost::rational<std::int64_t>;

// F with F*M covering the ball of radius scope.
struct SyndeticWitness {
  FinSet F;
  std::string target;
  int scope = 0;
  bool verified = false;
};

std::vector<char> membership(const Window& w, const PointSet& s);

// Shortlex greedy: admit y in Y iff S*y misses S*d for every admitted d.
PointSet greedy_max_disjoint(const Window& w, const PointSet& Y, const FinSet& S);

// Edges {x, h x} for h in H and H^-1, h != e, both endpoints vertices.
struct LocalGraph {
  PointSet vertices;
  FinSet H;
  long long degree_bound = 0;
};

// Least free color in scan order; adjacency[v] lists neighbours by position.
std::vector<int> greedy_coloring(const std::vector<std::vector<int>>& adjacency, long long degree_bound);
std::vector<int> greedy_coloring(const Window& w, const LocalGraph& g);

// Index of the first core point not covered by F*M, or -1.
Index first_uncovered(const Window& w, const std::vector<char>& member, const FinSet& F, int core);

struct SplitResult {
  PointSet M;
  PointSet rest;  // P minus M
  SyndeticWitness witness_M;
  SyndeticWitness witness_rest;
  GroupElement g;
  FinSet Q;
};

SplitResult syndetic_split(const Window& w, const PointSet& P, const SyndeticWitness& witness);

struct FamilyMember {
  PointSet set;
  SyndeticWitness witness;
};

// M_1 = split(X).M, M_2 = split(X \ M_1).M, ...; all pairwise disjoint.
std::vector<FamilyMember> disjoint_syndetic_family(const Window& w, int n, int core);

// Fraction of the density region lying in the set. Z^1 and F_k use the
// ball of the given radius; Z^d with d >= 2 uses the box of half-width
// radius/d inside it.
Rational empirical_density(const Window& w, const std::vector<char>& member, int radius);
std::string density_label(const GroupContext& G);

struct DensityResult {
  PointSet M;
  SyndeticWitness witness;
  Rational density;
  int splits = 0;
  int density_radius = 0;
  std::string measure;
};

// Repeated splitting keeping the sparser half until density < target.
DensityResult small_density_syndetic(const Window& w, Rational target, int core);

}  // namespace orbitforge
