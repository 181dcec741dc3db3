#include "orbitforge/measure.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>

#include "orbitforge/errors.hpp"

namespace orbitforge {

FiniteGroup FiniteGroup::from_table(std::string name, std::vector<std::vector<int>> table) {
  const int n = static_cast<int>(table.size());
  if (n == 0) throw ArgumentError("group table is empty");
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != n) throw ArgumentError("group table is not square");
    for (int v : row)
      if (v < 0 || v >= n) throw ArgumentError("group table entry out of range");
  }
  for (int a = 0; a < n; ++a)
    if (table[0][a] != a || table[a][0] != a) throw ArgumentError("element 0 is not the identity");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table[table[a][b]][c] != table[a][table[b][c]])
          throw ArgumentError("group table is not associative at (" + std::to_string(a) + ", " + std::to_string(b) +
                              ", " + std::to_string(c) + ")");
  FiniteGroup G;
  G.name = std::move(name);
  G.inv.assign(n, -1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (table[a][b] == 0) G.inv[a] = b;
  for (int a = 0; a < n; ++a)
    if (G.inv[a] < 0) throw ArgumentError("element " + std::to_string(a) + " has no inverse");
  G.mul = std::move(table);
  return G;
}

FiniteGroup FiniteGroup::cyclic(int n) {
  if (n < 1) throw ArgumentError("cyclic group order must be positive");
  std::vector<std::vector<int>> t(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t[a][b] = (a + b) % n;
  return from_table("Z/" + std::to_string(n), std::move(t));
}

FiniteGroup FiniteGroup::klein() {
  std::vector<std::vector<int>> t(4, std::vector<int>(4));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) t[a][b] = a ^ b;
  return from_table("Z/2xZ/2", std::move(t));
}

FiniteGroup FiniteGroup::symmetric3() {
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p{0, 1, 2};
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  auto index = [&](const std::array<int, 3>& q) {
    return static_cast<int>(std::find(perms.begin(), perms.end(), q) - perms.begin());
  };
  std::vector<std::vector<int>> t(6, std::vector<int>(6));
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      std::array<int, 3> c{};
      for (int k = 0; k < 3; ++k) c[k] = perms[a][perms[b][k]];
      t[a][b] = index(c);
    }
  return from_table("S3", std::move(t));
}

std::vector<std::vector<int>> FiniteGroup::subgroups() const {
  const int n = order();
  std::vector<std::vector<int>> out;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (!(mask & 1u)) continue;
    bool closed = true;
    for (int a = 0; a < n && closed; ++a)
      if (mask >> a & 1u)
        for (int b = 0; b < n && closed; ++b)
          if (mask >> b & 1u) closed = mask >> mul[a][b] & 1u;
    if (!closed) continue;
    std::vector<int> H;
    for (int a = 0; a < n; ++a)
      if (mask >> a & 1u) H.push_back(a);
    out.push_back(std::move(H));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void FiniteAction::validate() const {
  const int n = group.order(), m = points();
  if (static_cast<int>(act.size()) != n) throw ArgumentError("action table needs one row per group element");
  for (const auto& row : act) {
    if (static_cast<int>(row.size()) != m) throw ArgumentError("action row length differs from the number of points");
    for (int y : row)
      if (y < 0 || y >= m) throw ArgumentError("action table entry out of range");
  }
  for (int y = 0; y < m; ++y)
    if (act[0][y] != y) throw ArgumentError("identity moves point " + std::to_string(y));
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      for (int y = 0; y < m; ++y)
        if (act[group.mul[g][h]][y] != act[g][act[h][y]])
          throw ArgumentError("action is not compatible with the group law at (" + std::to_string(g) + ", " +
                              std::to_string(h) + ", " + std::to_string(y) + ")");
  Rational total = 0;
  for (const auto& w : weights) {
    if (w < Rational(0)) throw ArgumentError("negative weight");
    total += w;
  }
  if (total != Rational(1)) throw ArgumentError("weights do not sum to 1");
}

FiniteAction FiniteAction::cosets(const FiniteGroup& G, const std::vector<int>& H) {
  const int n = G.order();
  std::vector<int> coset_of(n, -1);
  int count = 0;
  for (int g = 0; g < n; ++g) {
    if (coset_of[g] >= 0) continue;
    for (int h : H) coset_of[G.mul[g][h]] = count;
    ++count;
  }
  std::vector<int> rep(count, -1);
  for (int g = n - 1; g >= 0; --g) rep[coset_of[g]] = g;
  FiniteAction A;
  A.group = G;
  A.act.assign(n, std::vector<int>(count));
  for (int g = 0; g < n; ++g)
    for (int c = 0; c < count; ++c) A.act[g][c] = coset_of[G.mul[g][rep[c]]];
  A.weights.assign(count, Rational(1, count));
  return A;
}

FiniteAction FiniteAction::disjoint_union(const std::vector<FiniteAction>& parts) {
  if (parts.empty()) throw ArgumentError("disjoint union of no actions");
  FiniteAction A;
  A.group = parts.front().group;
  A.act.assign(A.group.order(), {});
  for (const auto& p : parts) {
    if (p.group.mul != A.group.mul) throw ArgumentError("disjoint union of actions of different groups");
    const int base = A.points();
    for (int g = 0; g < A.group.order(); ++g)
      for (int y : p.act[g]) A.act[g].push_back(base + y);
    A.weights.resize(base + p.points());
  }
  return A.with_weights({});
}

FiniteAction FiniteAction::with_weights(const std::vector<std::int64_t>& ramp) const {
  FiniteAction A = *this;
  const int m = points();
  if (ramp.empty()) {
    A.weights.assign(m, Rational(1, m));
    return A;
  }
  if (static_cast<int>(ramp.size()) != m) throw ArgumentError("weight vector length differs from the number of points");
  std::int64_t total = std::accumulate(ramp.begin(), ramp.end(), std::int64_t{0});
  if (total <= 0) throw ArgumentError("weights must have positive total");
  for (int y = 0; y < m; ++y) A.weights[y] = Rational(ramp[y], total);
  return A;
}

FinitePartition FinitePartition::from_labels(const std::vector<int>& labels) {
  FinitePartition P;
  std::map<int, int> ids;
  for (int l : labels) {
    auto [it, fresh] = ids.emplace(l, static_cast<int>(ids.size()));
    P.block_of.push_back(it->second);
  }
  P.blocks = static_cast<int>(ids.size());
  return P;
}

bool is_generating(const FiniteAction& act, const FinitePartition& part) {
  const int m = act.points();
  for (int x = 0; x < m; ++x)
    for (int y = x + 1; y < m; ++y) {
      bool separated = false;
      for (int g = 0; g < act.group.order() && !separated; ++g)
        separated = part.block_of[act.act[g][x]] != part.block_of[act.act[g][y]];
      if (!separated) return false;
    }
  return true;
}

FinitePartition refine(const FiniteAction& act, const FinitePartition& part, const std::vector<int>& Q) {
  // y lies in h P_i iff h^-1 y lies in P_i.
  const int m = act.points();
  std::map<std::vector<int>, int> atoms;
  FinitePartition out;
  out.block_of.resize(m);
  for (int y = 0; y < m; ++y) {
    std::vector<int> key;
    key.reserve(Q.size());
    for (int h : Q) key.push_back(part.block_of[act.act[act.group.inv[h]][y]]);
    auto [it, fresh] = atoms.emplace(std::move(key), static_cast<int>(atoms.size()));
    out.block_of[y] = it->second;
  }
  out.blocks = static_cast<int>(atoms.size());
  return out;
}

std::vector<int> fixed_points(const FiniteAction& act, int g) {
  std::vector<int> out;
  for (int y = 0; y < act.points(); ++y)
    if (act.act[g][y] == y) out.push_back(y);
  return out;
}

FixMeasureResult fix_measure_formula(const FiniteAction& act, const FinitePartition& part, int g) {
  const int n = act.group.order(), m = act.points();
  if (g < 0 || g >= n) throw ArgumentError("group element out of range");
  if (n > 20) throw ArgumentError("group too large for subset enumeration");
  FixMeasureResult r;
  for (int y : fixed_points(act, g)) r.lhs += act.weights[y];
  const int ginv = act.group.inv[g];
  bool first = true;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> Q;
    for (int h = 0; h < n; ++h)
      if (mask >> h & 1u) Q.push_back(h);
    FinitePartition PQ = refine(act, part, Q);
    // y lies in g P n P iff g^-1 y and y share an atom.
    Rational sum = 0;
    for (int y = 0; y < m; ++y)
      if (PQ.block_of[act.act[ginv][y]] == PQ.block_of[y]) sum += act.weights[y];
    if (first || sum < r.rhs) {
      r.rhs = sum;
      r.argmin_Q = Q;
      first = false;
    }
  }
  r.generating = is_generating(act, part);
  r.le = r.lhs <= r.rhs;
  r.equal = r.lhs == r.rhs;
  return r;
}

ClassBijectiveResult class_bijective_criterion(const FiniteAction& act, const std::vector<char>& A) {
  const int n = act.group.order(), m = act.points();
  if (static_cast<int>(A.size()) != m) throw ArgumentError("subset indicator length differs from the number of points");
  // f_A(x) as a bit pattern over G.
  std::vector<std::vector<char>> f(m, std::vector<char>(n));
  for (int x = 0; x < m; ++x)
    for (int h = 0; h < n; ++h) f[x][h] = A[act.act[act.group.inv[h]][x]];
  // Shift on {0,1}^G: (g w)(h) = w(g^-1 h).
  auto shifted = [&](const std::vector<char>& w, int g) {
    std::vector<char> out(n);
    for (int h = 0; h < n; ++h) out[h] = w[act.group.mul[act.group.inv[g]][h]];
    return out;
  };
  ClassBijectiveResult r;
  for (int g = 0; g < n; ++g) {
    Rational push = 0, fix = 0, col = 0;
    for (int x = 0; x < m; ++x) {
      if (shifted(f[x], g) == f[x]) push += act.weights[x];
      if (act.act[g][x] == x)
        fix += act.weights[x];
      else if (f[act.act[g][x]] == f[x])
        col += act.weights[x];
    }
    r.pushforward.push_back(push);
    r.fixed.push_back(fix);
    r.collapsed.push_back(col);
    r.inequality.push_back(push <= fix);
    r.null_collapse.push_back(col == Rational(0));
  }
  return r;
}

std::vector<int> three_coloring(const FiniteAction& act, int g) {
  const int m = act.points();
  const int ginv = act.group.inv[g];
  std::vector<int> pos(m, -1), verts;
  for (int y = 0; y < m; ++y)
    if (act.act[g][y] != y) {
      pos[y] = static_cast<int>(verts.size());
      verts.push_back(y);
    }
  std::vector<std::vector<int>> adj(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    for (int z : {act.act[g][verts[i]], act.act[ginv][verts[i]]})
      if (pos[z] >= 0) adj[i].push_back(pos[z]);
    std::sort(adj[i].begin(), adj[i].end());
    adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
  }
  std::vector<int> c = greedy_coloring(adj, 2);
  std::vector<int> out(m, -1);
  for (std::size_t i = 0; i < verts.size(); ++i) out[verts[i]] = c[i];
  return out;
}

namespace {

void multisets(int start, int budget, int kinds, const std::vector<int>& sizes, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (!cur.empty()) out.push_back(cur);
  for (int k = start; k < kinds; ++k)
    if (sizes[k] <= budget) {
      cur.push_back(k);
      multisets(k, budget - sizes[k], kinds, sizes, cur, out);
      cur.pop_back();
    }
}

void set_partitions(int m, std::vector<int>& labels, int next, std::vector<std::vector<int>>& out) {
  const int y = static_cast<int>(labels.size());
  if (y == m) {
    out.push_back(labels);
    return;
  }
  for (int l = 0; l <= next; ++l) {
    labels.push_back(l);
    set_partitions(m, labels, std::max(next, l + 1), out);
    labels.pop_back();
  }
}

std::vector<std::vector<int>> partitions_for(const FiniteAction& act) {
  const int m = act.points();
  std::vector<std::vector<int>> out;
  if (m <= 6) {
    std::vector<int> labels;
    set_partitions(m, labels, 0, out);
    return out;
  }
  for (int k = 1; k <= 4; ++k) {
    std::vector<int> a(m), b(m);
    for (int y = 0; y < m; ++y) {
      a[y] = y % k;
      b[y] = y / k;
    }
    out.push_back(a);
    out.push_back(b);
  }
  std::vector<int> orbit(m, -1);
  for (int y = 0; y < m; ++y)
    if (orbit[y] < 0)
      for (int g = 0; g < act.group.order(); ++g) orbit[act.act[g][y]] = y;
  out.push_back(orbit);
  std::vector<int> lone(m, 0);
  lone[0] = 1;
  out.push_back(lone);
  return out;
}

}  // namespace

std::vector<FiniteAction> sweep_actions(std::size_t min_actions) {
  std::vector<FiniteGroup> groups;
  for (int n = 1; n <= 6; ++n) groups.push_back(FiniteGroup::cyclic(n));
  groups.push_back(FiniteGroup::klein());
  groups.push_back(FiniteGroup::symmetric3());
  std::vector<std::vector<FiniteAction>> per_group;
  for (const auto& G : groups) {
    auto subs = G.subgroups();
    std::vector<FiniteAction> orbits;
    std::vector<int> sizes;
    for (const auto& H : subs) {
      orbits.push_back(FiniteAction::cosets(G, H));
      sizes.push_back(orbits.back().points());
    }
    std::vector<std::vector<int>> combos;
    std::vector<int> cur;
    multisets(0, 8, static_cast<int>(orbits.size()), sizes, cur, combos);
    std::vector<FiniteAction> list;
    for (const auto& combo : combos) {
      std::vector<FiniteAction> parts;
      for (int k : combo) parts.push_back(orbits[k]);
      FiniteAction A = FiniteAction::disjoint_union(parts);
      list.push_back(A);
      std::vector<std::int64_t> ramp(A.points());
      std::iota(ramp.begin(), ramp.end(), std::int64_t{1});
      list.push_back(A.with_weights(ramp));
    }
    per_group.push_back(std::move(list));
  }
  // Round robin over the groups so a prefix covers all of them.
  std::vector<FiniteAction> out;
  for (std::size_t i = 0; out.size() < min_actions; ++i) {
    bool any = false;
    for (const auto& list : per_group)
      if (i < list.size()) {
        out.push_back(list[i]);
        any = true;
      }
    if (!any) break;
  }
  return out;
}

MeasureSweep measure_sweep(std::size_t min_actions) {
  MeasureSweep s;
  auto note = [&](const std::string& what) {
    if (s.failures.size() < 8) s.failures.push_back(what);
  };
  for (const auto& act : sweep_actions(min_actions)) {
    act.validate();
    ++s.actions;
    const int n = act.group.order(), m = act.points();
    const std::string tag = act.group.name + " on " + std::to_string(m) + " points";
    for (const auto& labels : partitions_for(act)) {
      FinitePartition P = FinitePartition::from_labels(labels);
      for (int g = 0; g < n; ++g) {
        FixMeasureResult r = fix_measure_formula(act, P, g);
        ++s.instances;
        if (!r.le) {
          ++s.le_failures;
          note(tag + ": inequality fails at g = " + std::to_string(g));
        }
        if (r.generating) {
          ++s.generating_instances;
          if (!r.equal) {
            ++s.equality_failures;
            note(tag + ": equality fails for a generating partition at g = " + std::to_string(g));
          }
        }
      }
    }
    const std::uint32_t total = 1u << m;
    const std::uint32_t stride = std::max<std::uint32_t>(1, total / 64);
    for (std::uint32_t mask = 0; mask < total; mask += stride) {
      std::vector<char> A(m);
      for (int y = 0; y < m; ++y) A[y] = mask >> y & 1u;
      ClassBijectiveResult c = class_bijective_criterion(act, A);
      ++s.criterion_instances;
      if (!c.agree()) {
        ++s.criterion_disagreements;
        note(tag + ": criteria disagree for subset mask " + std::to_string(mask));
      }
    }
    for (int g = 0; g < n; ++g) {
      std::vector<int> col = three_coloring(act, g);
      for (int y = 0; y < m; ++y) {
        int z = act.act[g][y];
        bool bad = (z == y) != (col[y] < 0) || col[y] > 2 || (z != y && col[z] == col[y]);
        if (bad) {
          ++s.coloring_failures;
          note(tag + ": coloring fails at g = " + std::to_string(g));
          break;
        }
      }
    }
  }
  return s;
}

}  // namespace orbitforge
