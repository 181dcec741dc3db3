#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "orbitforge/certification.hpp"
#include "orbitforge/errors.hpp"

using namespace orbitforge;

namespace {

GroupElement z(int v) { return GroupElement{{v}}; }

int mod(int a, int m) { return ((a % m) + m) % m; }

// Line config labelled by a function of the coordinate (-1 = undefined).
WindowConfig line_config(int radius, int core, const std::function<int(int)>& f) {
  WindowConfig cfg(std::make_shared<const Window>(GroupContext::lattice(1), radius), core);
  for (Index x = 0; x < cfg.size(); ++x) {
    int v = f(cfg.window().element(x).data[0]);
    cfg.set_label(x, v < 0 ? Label::Undefined : label_of_bit(v));
  }
  return cfg;
}

std::vector<char> line_member(const WindowConfig& cfg, const std::function<bool(int)>& f) {
  std::vector<char> m(cfg.size());
  for (Index x = 0; x < cfg.size(); ++x) m[x] = f(cfg.window().element(x).data[0]);
  return m;
}

// Oracle: point-pair comparison through tilde_eval.
bool naive_recognizable(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T, int core) {
  const Window& w = cfg.window();
  Index n = w.ball_count(core);
  std::vector<PartialPattern> pats;
  for (Index x = 0; x < n; ++x) pats.push_back(tilde_eval(cfg, w.element(x), T));
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (member[x] && !member[y] && compatible(pats[x], pats[y])) return false;
  return true;
}

}  // namespace

TEST_CASE("recognizability of parity") {
  auto parity = line_config(20, 10, [](int c) { return mod(c, 2); });
  auto evens = line_member(parity, [](int c) { return mod(c, 2) == 0; });
  const auto& G = parity.group();
  CHECK(verify_recognizable(parity, evens, G.make_set({z(0)}), 10).pass());
  auto ones = line_config(20, 10, [](int) { return 1; });
  auto v = verify_recognizable(ones, evens, G.ball(3), 10);
  CHECK(v.verdict == Verdict::Fail);
  CHECK_FALSE(v.counterexample.empty());
  CHECK(verify_recognizable(parity, evens, G.ball(15), 10).verdict == Verdict::Inconclusive);

  Tag y{Tag::Kind::Y, 0, 0};
  for (Index x = 0; x < parity.size(); ++x)
    if (evens[x]) parity.add_tag(x, y);
  CHECK(verify_recognizable(parity, y, G.make_set({z(0)}), 10).pass());
}

TEST_CASE("pattern classes agree with the pairwise oracle") {
  for (auto G : {GroupContext::lattice(1), GroupContext::lattice(2), GroupContext::free_group(2)}) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      WindowConfig cfg(std::make_shared<const Window>(G, 5), 2);
      for (Index x = 0; x < cfg.size(); ++x) cfg.set_label(x, static_cast<Label>(rng() % (trial % 2 ? 3 : 2)));
      std::vector<char> member(cfg.size());
      for (auto& m : member) m = rng() % 5 == 0;
      FinSet T = G.ball(static_cast<int>(rng() % 4));
      CHECK(verify_recognizable(cfg, member, T, 2).pass() == naive_recognizable(cfg, member, T, 2));
    }
  }
}

TEST_CASE("minimal witnesses") {
  auto parity = line_config(30, 10, [](int c) { return mod(c, 2); });
  const auto& G = parity.group();
  auto evens = line_member(parity, [](int c) { return mod(c, 2) == 0; });
  auto T = find_min_witness(parity, evens, 10, 10);
  REQUIRE(T.has_value());
  CHECK(*T == G.make_set({G.identity()}));

  auto constant = line_config(30, 10, [](int) { return 0; });
  CHECK_FALSE(find_min_witness(constant, evens, 20, 10).has_value());

  // 4Z in the period-4 word U100 needs the two points to its right.
  auto word = line_config(30, 10, [](int c) { return std::vector<int>{-1, 1, 0, 0}[mod(c, 4)]; });
  auto fours = line_member(word, [](int c) { return mod(c, 4) == 0; });
  auto W = find_min_witness(word, fours, 10, 10);
  REQUIRE(W.has_value());
  CHECK(verify_recognizable(word, fours, *W, 10).pass());
  CHECK(G.radius(*W) == 2);
  for (const auto& g : *W) {
    std::vector<GroupElement> smaller;
    for (const auto& h : *W)
      if (!(h == g)) smaller.push_back(h);
    CHECK_FALSE(verify_recognizable(word, fours, G.make_set(smaller), 10).pass());
  }
}

TEST_CASE("blocking") {
  auto period2 = line_config(120, 60, [](int c) { return mod(c, 2); });
  const auto& G = period2.group();
  for (int r = 0; r <= 50; ++r) CHECK(verify_blocking(period2, z(2), G.ball(r), 60).verdict == Verdict::Fail);
  CHECK_FALSE(find_blocking_witness(period2, z(2), 50, 60).has_value());
  CHECK(verify_blocking(period2, z(1), G.make_set({z(0)}), 60).pass());

  // A single 1 at the origin blocks every shift near it.
  auto spike = line_config(40, 10, [](int c) { return c == 0 ? 1 : 0; });
  auto T = find_blocking_witness(spike, z(1), 20, 10);
  REQUIRE(T.has_value());
  CHECK(verify_blocking(spike, z(-1), *T, 10).pass());
  CHECK(verify_blocking(spike, z(1), G.ball(2), 10).verdict == Verdict::Fail);
  CHECK(verify_blocking(spike, z(35), G.ball(10), 10).verdict == Verdict::Inconclusive);
}

TEST_CASE("separation of painted configurations") {
  // R = 4Z is recognized by {-1,-2} in the word U100 and covered by {0,1,2,3}.
  auto word = [](int c) { return std::vector<int>{-1, 1, 0, 0}[mod(c, 4)]; };
  auto painted = [&](int bit) { return line_config(40, 30, [&](int c) { return mod(c, 4) == 0 ? bit : word(c); }); };
  auto base = line_config(40, 30, word);
  const auto& G = base.group();
  auto cw = painted(0), cz = painted(1);
  Tag r1{Tag::Kind::R, 1, 0};
  for (auto* c : {&cw, &cz})
    for (Index x = 0; x < c->size(); ++x)
      if (mod(c->window().element(x).data[0], 4) == 0) c->add_tag(x, r1);
  FinSet S = G.make_set({z(0), z(1), z(2), z(3)});
  FinSet T = G.make_set({z(-1), z(-2)});
  CHECK(verify_recognizable(base, line_member(base, [](int c) { return mod(c, 4) == 0; }), T, 30).pass());
  auto sep = verify_separation(cw, cz, {0}, {1}, S, T, 30);
  CHECK(sep.result.pass());
  CHECK(sep.shared == 0);
  CHECK(sep.classes_w == 4);
  CHECK(verify_separation(cw, cw, {0}, {0}, S, T, 30).result.verdict == Verdict::Inconclusive);
  // A window too small to see the coded point is not separating.
  auto weak = verify_separation(cw, cz, {0}, {1}, G.make_set({z(0)}), G.make_set({z(0)}), 30);
  CHECK(weak.result.verdict == Verdict::Fail);
}

TEST_CASE("cylinder extraction") {
  auto parity = line_config(20, 10, [](int c) { return mod(c, 2); });
  const auto& G = parity.group();
  auto evens = line_member(parity, [](int c) { return mod(c, 2) == 0; });
  auto cyl = clopen_extract(parity, evens, G.make_set({G.identity()}), 10);
  REQUIRE(cyl.patterns.size() == 1);
  CHECK(cyl.patterns[0] == std::vector<int>{0});
  CHECK(cyl.equivalence.pass());
  std::vector<char> all(parity.size(), 1);
  auto full = clopen_extract(parity, all, G.ball(2), 10);
  CHECK(full.equivalence.pass());
  CHECK(full.patterns.size() == 2);
  auto constant = line_config(20, 10, [](int) { return 1; });
  CHECK(clopen_extract(constant, evens, G.ball(2), 10).equivalence.verdict == Verdict::Fail);
}

TEST_CASE("recognizable sets are closed under the algebra operations") {
  auto cfg = line_config(40, 20, [](int c) { return mod(c, 4) < 2 ? 0 : 1; });
  const auto& G = cfg.group();
  auto zero = line_member(cfg, [](int c) { return mod(c, 4) == 0; });
  auto two = line_member(cfg, [](int c) { return mod(c, 4) == 2; });
  FinSet T = G.make_set({z(0), z(1)});
  REQUIRE(verify_recognizable(cfg, zero, T, 20).pass());
  REQUIRE(verify_recognizable(cfg, two, T, 20).pass());
  auto rep = algebra_closure_check(cfg, zero, two, T, T, z(1), 20, 5);
  CHECK(rep.complement.pass());
  CHECK(rep.set_union.pass());
  CHECK(verify_recognizable(cfg, line_member(cfg, [](int c) { return mod(c, 2) == 0; }), rep.union_window, 20).pass());
  CHECK(rep.translate.pass());
  CHECK(rep.translate_window == G.make_set({z(1), z(2)}));
  CHECK(verify_recognizable(cfg, line_member(cfg, [](int c) { return mod(c, 4) == 1; }), rep.translate_window, 19).pass());

  auto parity = line_config(20, 10, [](int c) { return mod(c, 2); });
  auto evens = line_member(parity, [](int c) { return mod(c, 2) == 0; });
  auto odd_rep = algebra_closure_check(parity, evens, evens, G.make_set({z(0)}), G.make_set({z(0)}), z(1), 10, 3);
  CHECK(odd_rep.complement.pass());
  CHECK(odd_rep.translate.pass());
  CHECK(odd_rep.translate_window == G.make_set({z(1)}));
}

TEST_CASE("pullback colorings") {
  auto parity = line_config(20, 10, [](int c) { return mod(c, 2); });
  const auto& G = parity.group();
  auto constant = [](const std::vector<int>&) { return 0; };
  CHECK(pullback_coloring(parity, G.ball(1), constant, G.make_set({G.identity()}), 10).result.pass());
  auto by_value = [](const std::vector<int>& p) { return p[0]; };
  auto good = pullback_coloring(parity, G.make_set({z(0)}), by_value, G.make_set({z(1)}), 10);
  CHECK(good.result.pass());
  CHECK(good.colors.size() == 21);
  auto bad = pullback_coloring(parity, G.make_set({z(0)}), constant, G.make_set({z(1)}), 10);
  CHECK(bad.result.verdict == Verdict::Fail);
  CHECK_FALSE(bad.result.counterexample.empty());
}

TEST_CASE("entropy") {
  CHECK(binary_entropy(0) == 0);
  CHECK(binary_entropy(1) == 0);
  CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(binary_entropy(0.01) == doctest::Approx(0.0560).epsilon(1e-3));
  auto zeros = line_config(10, 5, [](int) { return 0; });
  auto rep = entropy_report(zeros);
  CHECK((rep.p == Rational(0)));
  CHECK(rep.H == 0);
  auto a = line_config(10, 5, [](int c) { return c > 2 ? 1 : 0; });
  auto b = line_config(10, 5, [](int c) { return c > 2 ? 0 : 1; });
  auto ra = entropy_report(a), rb = entropy_report(b);
  CHECK((ra.p == Rational(3, 11)));
  CHECK((rb.p == Rational(1) - ra.p));
  CHECK(ra.H == doctest::Approx(rb.H));
  auto holes = line_config(10, 5, [](int c) { return c == 0 ? -1 : 0; });
  CHECK_THROWS_AS(entropy_report(holes), ArgumentError);
}

TEST_CASE("syndeticity verifier") {
  auto w = std::make_shared<const Window>(GroupContext::lattice(1), 30);
  const auto& G = w->group();
  std::vector<char> threes(w->size());
  for (Index x = 0; x < w->size(); ++x) threes[x] = mod(w->element(x).data[0], 3) == 0;
  CHECK(verify_syndetic(*w, threes, G.ball(1), 29).pass());
  CHECK(verify_syndetic(*w, threes, G.make_set({z(0), z(1)}), 29).verdict == Verdict::Fail);
  CHECK(verify_syndetic(*w, threes, G.make_set({z(0), z(1), z(2)}), 29).pass());
}
