#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "orbitforge/group.hpp"
#include "orbitforge/window.hpp"

using namespace orbitforge;

namespace {

GroupElement z(std::vector<int> c) { return GroupElement{std::move(c)}; }

// Oracle: shortlex by building the least geodesic word spelled out letter
// by letter and comparing rank sequences.
bool naive_less(const GroupContext& G, const GroupElement& a, const GroupElement& b) {
  auto wa = G.word(a), wb = G.word(b);
  if (wa.size() != wb.size()) return wa.size() < wb.size();
  for (std::size_t i = 0; i < wa.size(); ++i)
    if (wa[i] != wb[i]) return G.letter_rank(wa[i]) < G.letter_rank(wb[i]);
  return false;
}

// Oracle: ball by closing {e} under generators r times.
std::set<std::string> ball_by_closure(const GroupContext& G, int r) {
  std::set<std::string> seen = {G.format(G.identity())};
  std::vector<GroupElement> frontier = {G.identity()};
  for (int step = 0; step < r; ++step) {
    std::vector<GroupElement> next;
    for (const auto& g : frontier)
      for (int l = 0; l < G.num_letters(); ++l) {
        GroupElement h = G.mul(G.letter(l), g);
        if (seen.insert(G.format(h)).second) next.push_back(h);
      }
    frontier = next;
  }
  return seen;
}

}  // namespace

TEST_CASE("lattice multiplication and inverses") {
  auto G = GroupContext::lattice(2);
  CHECK(G.mul(z({1, 2}), z({3, -1})) == z({4, 1}));
  CHECK(G.is_identity(G.mul(z({5, -7}), G.inv(z({5, -7})))));
  CHECK(G.length(z({-3, 4})) == 7);
}

TEST_CASE("free group reduction") {
  auto G = GroupContext::free_group(2);
  auto ab = G.parse_element("ab");
  auto Ba = G.parse_element("Ba");
  CHECK(G.format(G.mul(ab, Ba)) == "aa");
  CHECK(G.format(G.inv(ab)) == "BA");
  CHECK(G.is_identity(G.mul(ab, G.inv(ab))));
  CHECK_THROWS(G.parse_element("aA"));
}

TEST_CASE("random word round trips") {
  std::mt19937 rng(7);
  for (auto G : {GroupContext::free_group(2), GroupContext::free_group(3), GroupContext::lattice(3)}) {
    for (int t = 0; t < 300; ++t) {
      std::vector<int> w(rng() % 21);
      for (int& l : w) l = static_cast<int>(rng() % G.num_letters());
      GroupElement g = G.from_letters(w);
      std::vector<int> winv(w.rbegin(), w.rend());
      for (int& l : winv) l = GroupContext::inverse_letter(l);
      CHECK(G.is_identity(G.mul(g, G.from_letters(winv))));
      CHECK(G.parse_element(G.format(g)) == g);
      CHECK(G.length(g) == static_cast<int>(G.word(g).size()));
      // Associativity against a second random element.
      GroupElement h = G.from_letters(std::vector<int>(w.begin(), w.begin() + w.size() / 2));
      CHECK(G.mul(G.mul(g, h), g) == G.mul(g, G.mul(h, g)));
    }
  }
}

TEST_CASE("set operations") {
  auto Z = GroupContext::lattice(1);
  auto X = Z.make_set({z({0}), z({1})});
  auto Y = Z.make_set({z({0}), z({2})});
  auto P = Z.set_product(X, Y);
  REQUIRE(P.size() == 4);
  for (int v = 0; v < 4; ++v) CHECK(P.contains(z({v})));
  auto I = Z.set_inverse(Z.make_set({z({1}), z({2})}));
  CHECK(I.contains(z({-1})));
  CHECK(I.contains(z({-2})));
  CHECK(Z.set_inverse(I) == Z.make_set({z({1}), z({2})}));

  auto F = GroupContext::free_group(2);
  auto Q = F.set_product(F.make_set({F.parse_element("a")}), F.make_set({F.parse_element("A"), F.parse_element("b")}));
  REQUIRE(Q.size() == 2);
  CHECK(F.format(Q[0]) == "1");
  CHECK(F.format(Q[1]) == "ab");

  auto B1 = F.ball(1), B2 = F.ball(2);
  CHECK(F.set_product(B1, B1) == B2);
  CHECK(F.set_product(B1, B2).size() <= B1.size() * B2.size());
  auto g = F.parse_element("aB");
  CHECK(F.translate(g, F.set_product(B1, B2)) == F.set_product(F.translate(g, B1), B2));
}

TEST_CASE("balls and shortlex enumeration") {
  auto Z = GroupContext::lattice(1);
  auto b = Z.ball(2);
  REQUIRE(b.size() == 5);
  std::vector<int> seq;
  for (const auto& g : b) seq.push_back(g.data[0]);
  CHECK(seq == std::vector<int>{0, 1, -1, 2, -2});

  auto e4 = Z.enumerate_nonidentity(4);
  CHECK(e4[0] == z({1}));
  CHECK(e4[1] == z({-1}));
  CHECK(e4[2] == z({2}));
  CHECK(e4[3] == z({-2}));

  auto Z2 = GroupContext::lattice(2);
  CHECK(Z2.ball(1).size() == 5);
  auto e2 = Z2.enumerate_nonidentity(2);
  CHECK(e2[0] == z({1, 0}));
  CHECK(e2[1] == z({-1, 0}));

  auto F2 = GroupContext::free_group(2);
  auto f4 = F2.enumerate_nonidentity(4);
  CHECK(F2.format(f4[0]) == "a");
  CHECK(F2.format(f4[1]) == "A");
  CHECK(F2.format(f4[2]) == "b");
  CHECK(F2.format(f4[3]) == "B");
  CHECK(F2.ball(1).size() == 5);
}

TEST_CASE("ball sizes match closure oracle and closed form") {
  for (auto G : {GroupContext::lattice(1), GroupContext::lattice(2), GroupContext::lattice(3), GroupContext::free_group(1),
                 GroupContext::free_group(2), GroupContext::free_group(3)}) {
    std::size_t prev = 0;
    for (int r = 0; r <= 4; ++r) {
      auto b = G.ball(r);
      auto oracle = ball_by_closure(G, r);
      CHECK(b.size() == oracle.size());
      CHECK(static_cast<std::size_t>(G.ball_size(r)) == b.size());
      CHECK(b.size() > prev);
      prev = b.size();
      for (const auto& g : b) CHECK(oracle.count(G.format(g)) == 1);
    }
    CHECK(G.set_product(G.ball(2), G.ball(1)) == G.ball(3));
  }
}

TEST_CASE("shortlex is a total order matching the oracle") {
  for (auto G : {GroupContext::lattice(2), GroupContext::free_group(2), GroupContext::lattice(2, {"y-", "x+", "y+", "x-"})}) {
    auto b = G.ball(3);
    CHECK(G.format(b[0]) == G.format(G.identity()));
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) {
        bool lt = G.less(b[i], b[j]);
        CHECK(lt == naive_less(G, b[i], b[j]));
        CHECK(lt == (i < j));
      }
  }
}

TEST_CASE("group spec parsing") {
  auto G = GroupContext::parse("Z^2[y+,y-,x+,x-]");
  CHECK(G.spec() == "Z^2[y+,y-,x+,x-]");
  CHECK(GroupContext::parse(G.spec()) == G);
  CHECK(GroupContext::parse("F_2").spec() == "F_2[a,A,b,B]");
  CHECK_THROWS(GroupContext::parse("SL_2"));
  CHECK_THROWS(GroupContext::parse("Z^2[x+,x+,y+,y-]"));
}

TEST_CASE("window indexing agrees with shortlex balls") {
  for (auto G : {GroupContext::lattice(1), GroupContext::lattice(1, {"x-", "x+"}), GroupContext::lattice(2),
                 GroupContext::free_group(2)}) {
    Window w(G, 4);
    auto b = G.ball(4);
    REQUIRE(static_cast<std::size_t>(w.size()) == b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(w.element(static_cast<Window::Index>(i)) == b[i]);
      CHECK(w.index_of(b[i]) == static_cast<Window::Index>(i));
      CHECK(w.length(static_cast<Window::Index>(i)) == G.length(b[i]));
    }
    CHECK(w.ball_count(2) == static_cast<Window::Index>(G.ball(2).size()));
    for (const auto& g : G.ball(3)) {
      auto off = w.offset(g);
      for (std::size_t i = 0; i < b.size(); ++i) {
        GroupElement y = G.mul(g, b[i]);
        Window::Index expect = G.length(y) <= 4 ? w.index_of(y) : Window::kOutside;
        CHECK(w.mul(off, static_cast<Window::Index>(i)) == expect);
      }
    }
  }
}
