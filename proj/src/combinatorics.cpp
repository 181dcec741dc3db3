#include "orbitforge/combinatorics.hpp"

#include <algorithm>
#include <cstdlib>

#include "orbitforge/errors.hpp"

namespace orbitforge {

std::vector<char> membership(const Window& w, const PointSet& s) {
  std::vector<char> m(w.size(), 0);
  for (Index x : s) m[x] = 1;
  return m;
}

PointSet greedy_max_disjoint(const Window& w, const PointSet& Y, const FinSet& S) {
  const GroupContext& G = w.group();
  FinSet K = G.set_product(G.set_inverse(S), S);
  std::vector<Window::Offset> conflicts;
  for (const auto& k : K)
    if (!G.is_identity(k)) conflicts.push_back(w.offset(k));
  std::vector<char> admitted(w.size(), 0);
  PointSet D;
  Index last = -1;
  for (Index y : Y) {
    if (y <= last) throw ArgumentError("greedy_max_disjoint: candidate set not sorted");
    last = y;
    bool ok = true;
    for (const auto& k : conflicts) {
      Index z = w.mul(k, y);
      if (z >= 0 && admitted[z]) {
        ok = false;
        break;
      }
    }
    if (ok) {
      admitted[y] = 1;
      D.push_back(y);
    }
  }
  return D;
}

std::vector<int> greedy_coloring(const std::vector<std::vector<int>>& adjacency, long long degree_bound) {
  const int n = static_cast<int>(adjacency.size());
  for (int v = 0; v < n; ++v)
    if (static_cast<long long>(adjacency[v].size()) > degree_bound)
      throw InvariantError("greedy_coloring: vertex " + std::to_string(v) + " has degree " +
                           std::to_string(adjacency[v].size()) + " above bound " + std::to_string(degree_bound));
  std::vector<int> color(n, -1);
  std::vector<char> used;
  for (int v = 0; v < n; ++v) {
    used.assign(adjacency[v].size() + 1, 0);
    for (int u : adjacency[v])
      if (u != v && color[u] >= 0 && color[u] < static_cast<int>(used.size())) used[color[u]] = 1;
    int c = 0;
    while (used[c]) ++c;
    color[v] = c;
  }
  return color;
}

std::vector<int> greedy_coloring(const Window& w, const LocalGraph& g) {
  const GroupContext& G = w.group();
  FinSet edges = G.set_union(g.H, G.set_inverse(g.H));
  std::vector<Window::Offset> offs;
  for (const auto& h : edges)
    if (!G.is_identity(h)) offs.push_back(w.offset(h));
  std::vector<int> pos(w.size(), -1);
  for (std::size_t i = 0; i < g.vertices.size(); ++i) pos[g.vertices[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> adj(g.vertices.size());
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    for (const auto& o : offs) {
      Index y = w.mul(o, g.vertices[i]);
      if (y >= 0 && pos[y] >= 0 && pos[y] != static_cast<int>(i)) adj[i].push_back(pos[y]);
    }
    std::sort(adj[i].begin(), adj[i].end());
    adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
    if (static_cast<long long>(adj[i].size()) > g.degree_bound)
      throw InvariantError("greedy_coloring: vertex " + G.format(w.element(g.vertices[i])) + " exceeds degree bound " +
                           std::to_string(g.degree_bound));
  }
  return greedy_coloring(adj, g.degree_bound);
}

Index first_uncovered(const Window& w, const std::vector<char>& member, const FinSet& F, int core) {
  const GroupContext& G = w.group();
  std::vector<Window::Offset> inv;
  for (const auto& f : F) inv.push_back(w.offset(G.inv(f)));
  Index n = w.ball_count(core);
  for (Index x = 0; x < n; ++x) {
    bool hit = false;
    for (const auto& o : inv) {
      Index m = w.mul(o, x);
      if (m >= 0 && member[m]) {
        hit = true;
        break;
      }
    }
    if (!hit) return x;
  }
  return -1;
}

SplitResult syndetic_split(const Window& w, const PointSet& P, const SyndeticWitness& witness) {
  const GroupContext& G = w.group();
  if (P.empty()) throw ArgumentError("syndetic_split: empty set cannot be syndetic");
  if (witness.F.empty()) throw ArgumentError("syndetic_split: empty witness");
  auto member = membership(w, P);
  if (Index bad = first_uncovered(w, member, witness.F, witness.scope); bad >= 0)
    throw ConstructionError("syndetic_split: input witness fails at " + G.format(w.element(bad)));

  // With F = W^-1 every F x meets P. Pick the least g with F g disjoint
  // from F and not containing e, so that Q x meets P twice.
  FinSet F = G.set_inverse(witness.F);
  FinSet avoid = G.set_union(G.set_product(G.set_inverse(F), F), G.set_inverse(F));
  GroupElement g;
  G.for_each_shortlex(G.radius(avoid) + 1, [&](const GroupElement& h) {
    if (avoid.contains(h)) return true;
    g = h;
    return false;
  });
  FinSet Fg = G.right_translate(F, g);
  int qrad = std::max(G.radius(F), G.radius(Fg));
  SplitResult out;
  out.g = g;
  out.Q = G.ball(qrad);
  out.M = greedy_max_disjoint(w, P, out.Q);
  auto inM = membership(w, out.M);
  for (Index x : P)
    if (!inM[x]) out.rest.push_back(x);
  auto inRest = membership(w, out.rest);

  out.witness_M.F = G.set_product(witness.F, G.set_power(out.Q, 2));
  out.witness_M.target = "split";
  out.witness_M.scope = witness.scope;
  FinSet gW = G.set_product(G.make_set({G.inv(g)}), witness.F);
  out.witness_rest.F = G.set_product(witness.F, G.set_union(gW, G.make_set({G.identity()})));
  out.witness_rest.target = "split-rest";
  out.witness_rest.scope = witness.scope - G.radius(witness.F) - G.length(g);
  if (out.witness_rest.scope < 0)
    throw WindowExhausted("syndetic_split: no core left for the complement witness",
                          std::to_string(w.radius() - out.witness_rest.scope));

  if (Index bad = first_uncovered(w, inM, out.witness_M.F, out.witness_M.scope); bad >= 0)
    throw ConstructionError("syndetic_split: witness for M fails at " + G.format(w.element(bad)));
  if (Index bad = first_uncovered(w, inRest, out.witness_rest.F, out.witness_rest.scope); bad >= 0)
    throw ConstructionError("syndetic_split: witness for P\\M fails at " + G.format(w.element(bad)));
  out.witness_M.verified = out.witness_rest.verified = true;
  return out;
}

std::vector<FamilyMember> disjoint_syndetic_family(const Window& w, int n, int core) {
  const GroupContext& G = w.group();
  if (n < 1) throw ArgumentError("disjoint_syndetic_family: n must be positive");
  PointSet P(static_cast<std::size_t>(w.size()));
  for (Index x = 0; x < w.size(); ++x) P[x] = x;
  SyndeticWitness wit{G.make_set({G.identity()}), "X", core, true};
  std::vector<FamilyMember> out;
  for (int k = 0; k < n; ++k) {
    SplitResult s = syndetic_split(w, P, wit);
    s.witness_M.target = "M" + std::to_string(k + 1);
    out.push_back({s.M, s.witness_M});
    P = std::move(s.rest);
    wit = s.witness_rest;
  }
  std::vector<int> owner(w.size(), -1);
  for (int k = 0; k < n; ++k)
    for (Index x : out[k].set) {
      if (owner[x] >= 0) throw ConstructionError("disjoint_syndetic_family: sets overlap");
      owner[x] = k;
    }
  return out;
}

std::string density_label(const GroupContext& G) {
  return G.kind() == GroupKind::Free && G.rank() > 1 ? "ball frequency" : "box density";
}

Rational empirical_density(const Window& w, const std::vector<char>& member, int radius) {
  const GroupContext& G = w.group();
  radius = std::min(radius, w.radius());
  if (radius < 0) throw ArgumentError("negative density radius");
  std::int64_t hits = 0, total = 0;
  if (G.kind() == GroupKind::Lattice && G.rank() >= 2) {
    int h = radius / G.rank();
    for (Index x = 0; x < w.ball_count(radius); ++x) {
      auto e = w.element(x);
      if (std::all_of(e.data.begin(), e.data.end(), [h](int c) { return std::abs(c) <= h; })) {
        ++total;
        hits += member[x] ? 1 : 0;
      }
    }
  } else {
    total = w.ball_count(radius);
    for (Index x = 0; x < total; ++x) hits += member[x] ? 1 : 0;
  }
  return Rational(hits, total);
}

DensityResult small_density_syndetic(const Window& w, Rational target, int core) {
  const GroupContext& G = w.group();
  if (target <= 0) throw ArgumentError("small_density_syndetic: target must be positive");
  DensityResult out;
  out.measure = density_label(G);
  out.density_radius = core;
  out.M.resize(static_cast<std::size_t>(w.size()));
  for (Index x = 0; x < w.size(); ++x) out.M[x] = x;
  out.witness = SyndeticWitness{G.make_set({G.identity()}), "X", core, true};
  out.density = 1;
  if (target >= 1) return out;
  while (out.density >= target) {
    SplitResult s = syndetic_split(w, out.M, out.witness);
    int region = s.witness_rest.scope;
    if (region < 4 * (G.radius(s.witness_M.F) + 1))
      throw WindowExhausted("small_density_syndetic: window too small to resolve the target density",
                            std::to_string(w.radius() - region + 4 * (G.radius(s.witness_M.F) + 1)));
    Rational dm = empirical_density(w, membership(w, s.M), out.density_radius);
    Rational dr = empirical_density(w, membership(w, s.rest), out.density_radius);
    ++out.splits;
    if (dm <= dr) {
      out.M = std::move(s.M);
      out.witness = s.witness_M;
      out.density = dm;
    } else {
      out.M = std::move(s.rest);
      out.witness = s.witness_rest;
      out.density = dr;
    }
  }
  out.witness.target = "M";
  return out;
}

}  // namespace orbitforge
