#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "orbitforge/combinatorics.hpp"
#include "orbitforge/errors.hpp"

using namespace orbitforge;

namespace {

GroupElement z(int v) { return GroupElement{{v}}; }

std::shared_ptr<const Window> line(int r) { return std::make_shared<const Window>(GroupContext::lattice(1), r); }

PointSet points(const Window& w, std::vector<int> coords) {
  PointSet s;
  for (int c : coords) s.push_back(w.index_of(z(c)));
  std::sort(s.begin(), s.end());
  return s;
}

std::set<int> coords(const Window& w, const PointSet& s) {
  std::set<int> out;
  for (Index x : s) out.insert(w.element(x).data[0]);
  return out;
}

// Oracle: greedy with explicit translate sets.
std::vector<GroupElement> naive_greedy(const GroupContext& G, std::vector<GroupElement> Y, const FinSet& S) {
  std::sort(Y.begin(), Y.end(), [&](auto& a, auto& b) { return G.less(a, b); });
  std::vector<GroupElement> D;
  for (const auto& y : Y) {
    FinSet Sy = G.right_translate(S, y);
    bool ok = true;
    for (const auto& d : D)
      if (!G.disjoint(Sy, G.right_translate(S, d))) ok = false;
    if (ok) D.push_back(y);
  }
  return D;
}

}  // namespace

TEST_CASE("greedy maximal disjoint set examples") {
  auto w = line(20);
  const auto& G = w->group();
  PointSet Y;
  for (int c = 0; c <= 10; ++c) Y.push_back(w->index_of(z(c)));
  std::sort(Y.begin(), Y.end());
  auto D = greedy_max_disjoint(*w, Y, G.make_set({z(0), z(1)}));
  CHECK(coords(*w, D) == std::set<int>{0, 2, 4, 6, 8, 10});
  CHECK(greedy_max_disjoint(*w, Y, G.make_set({z(0)})) == Y);
  CHECK(greedy_max_disjoint(*w, {}, G.make_set({z(0), z(1)})).empty());
}

TEST_CASE("greedy agrees with explicit oracle on the free group") {
  auto G = GroupContext::free_group(2);
  Window w(G, 4);
  PointSet Y;
  std::vector<GroupElement> Ye;
  for (Index x = 0; x < w.size(); x += 3) {
    Y.push_back(x);
    Ye.push_back(w.element(x));
  }
  FinSet S = G.make_set({G.identity(), G.parse_element("a"), G.parse_element("b")});
  auto D = greedy_max_disjoint(w, Y, S);
  auto Dn = naive_greedy(G, Ye, S);
  REQUIRE(D.size() == Dn.size());
  for (std::size_t i = 0; i < D.size(); ++i) CHECK(w.element(D[i]) == Dn[i]);
}

TEST_CASE("greedy output is independent of the ball radius on the shared core") {
  auto a = line(200), b = line(250);
  const auto& G = a->group();
  FinSet S = G.make_set({z(0), z(2), z(5)});
  auto all = [](const Window& w) {
    PointSet s;
    for (Index x = 0; x < w.size(); ++x)
      if (w.element(x).data[0] % 3 != 1) s.push_back(x);
    return s;
  };
  auto Da = coords(*a, greedy_max_disjoint(*a, all(*a), S));
  auto Db = coords(*b, greedy_max_disjoint(*b, all(*b), S));
  for (int c = -200; c <= 200; ++c) CHECK(Da.count(c) == Db.count(c));
}

TEST_CASE("greedy coloring") {
  auto w = line(20);
  const auto& G = w->group();
  LocalGraph path{points(*w, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), G.make_set({z(1)}), 2};
  auto col = greedy_coloring(*w, path);
  for (std::size_t i = 0; i < path.vertices.size(); ++i) CHECK(col[i] == w->element(path.vertices[i]).data[0] % 2);

  LocalGraph edgeless{points(*w, {0, 5, 10}), G.make_set({z(1)}), 2};
  for (int c : greedy_coloring(*w, edgeless)) CHECK(c == 0);

  LocalGraph edge{points(*w, {3, 4}), G.make_set({z(1)}), 1};
  auto ec = greedy_coloring(*w, edge);
  CHECK(std::set<int>(ec.begin(), ec.end()) == std::set<int>{0, 1});

  LocalGraph dense{points(*w, {0, 1, 2}), G.make_set({z(1), z(2)}), 1};
  CHECK_THROWS_AS(greedy_coloring(*w, dense), InvariantError);
}

TEST_CASE("greedy coloring is proper and within the bound") {
  auto G = GroupContext::free_group(2);
  Window w(G, 5);
  PointSet all;
  for (Index x = 0; x < w.size(); ++x) all.push_back(x);
  LocalGraph g{all, G.make_set({G.parse_element("a"), G.parse_element("ab")}), 4};
  auto col = greedy_coloring(w, g);
  for (Index x = 0; x < w.size(); ++x) {
    CHECK(col[x] <= 4);
    for (const auto& h : g.H) {
      Index y = w.mul(h, x);
      if (y >= 0) CHECK(col[x] != col[y]);
    }
  }
}

TEST_CASE("syndetic split on the integers") {
  auto w = line(100);
  const auto& G = w->group();
  PointSet all;
  for (Index x = 0; x < w->size(); ++x) all.push_back(x);
  SyndeticWitness base{G.make_set({z(0)}), "X", 100, true};
  auto s = syndetic_split(*w, all, base);
  CHECK(G.format(s.g) == "1");
  CHECK(s.Q == G.ball(1));
  for (int c = -100; c <= 100; ++c) CHECK(coords(*w, s.M).count(c) == (c % 3 == 0 ? 1u : 0u));
  // Oracle: both coverings checked with explicit element arithmetic.
  auto Mc = coords(*w, s.M), Rc = coords(*w, s.rest);
  for (int c = -s.witness_M.scope; c <= s.witness_M.scope; ++c) {
    bool hit = false;
    for (const auto& f : s.witness_M.F) hit |= Mc.count(c - f.data[0]) > 0;
    CHECK(hit);
  }
  for (int c = -s.witness_rest.scope; c <= s.witness_rest.scope; ++c) {
    bool hit = false;
    for (const auto& f : s.witness_rest.F) hit |= Rc.count(c - f.data[0]) > 0;
    CHECK(hit);
  }
  CHECK_THROWS_AS(syndetic_split(*w, {}, base), ArgumentError);

  auto s2 = syndetic_split(*w, s.M, s.witness_M);
  CHECK(s2.witness_M.verified);
  CHECK(s2.witness_rest.verified);
  for (int c : coords(*w, s2.M)) CHECK(c % 15 == 0);
}

TEST_CASE("disjoint syndetic families") {
  auto w = line(10000);
  auto fam = disjoint_syndetic_family(*w, 3, 10000);
  REQUIRE(fam.size() == 3);
  std::vector<int> owner(w->size(), 0);
  for (auto& m : fam) {
    CHECK(m.witness.verified);
    auto inM = membership(*w, m.set);
    CHECK(first_uncovered(*w, inM, m.witness.F, m.witness.scope) == -1);
    for (Index x : m.set) ++owner[x];
  }
  bool some_uncovered = false;
  for (Index x = 0; x < w->ball_count(5000); ++x) {
    CHECK(owner[x] <= 1);
    some_uncovered |= owner[x] == 0;
  }
  CHECK(some_uncovered);
  CHECK(disjoint_syndetic_family(*w, 1, 100).size() == 1);
}

TEST_CASE("small density syndetic sets") {
  auto w = line(100000);
  auto full = small_density_syndetic(*w, Rational(1), 50000);
  CHECK(full.splits == 0);
  auto half = small_density_syndetic(*w, Rational(1, 2), 50000);
  CHECK(half.splits == 1);
  CHECK(half.density < Rational(1, 2));
  auto small = small_density_syndetic(*w, Rational(1, 100), 50000);
  CHECK(small.density <= Rational(1, 100));
  // Exact recount.
  std::int64_t hits = 0;
  for (Index x : small.M) hits += w->length(x) <= 50000 ? 1 : 0;
  CHECK(Rational(hits, 100001) == small.density);
  CHECK(first_uncovered(*w, membership(*w, small.M), small.witness.F, small.witness.scope) == -1);
  CHECK_THROWS_AS(small_density_syndetic(*line(60), Rational(1, 100), 60), WindowExhausted);
}

TEST_CASE("density on the free group is a ball frequency") {
  auto G = GroupContext::free_group(2);
  Window w(G, 6);
  CHECK(density_label(G) == "ball frequency");
  std::vector<char> all(w.size(), 1);
  CHECK(empirical_density(w, all, 3) == Rational(1));
}
