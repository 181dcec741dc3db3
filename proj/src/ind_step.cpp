#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "orbitforge/construction.hpp"
#include "orbitforge/errors.hpp"

namespace orbitforge {

bool StepResult::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  for (const auto& v : verifications)
    if (!v.pass()) return false;
  return true;
}

namespace {

constexpr std::uint8_t kU = 3;  // undefined in L vectors

struct Stage {
  const Window& w;
  const GroupContext& G;
  std::vector<Label> lab;
  std::vector<char> inM, inR;
  std::vector<Window::Offset> offA;
  std::vector<StageCheck>& checks;

  // c at x under the current labels; -1 if A x leaves the window.
  int c(Index x) const {
    int k = 0;
    for (const auto& o : offA) {
      Index y = w.mul(o, x);
      if (y < 0) return -1;
      if (!inR[y] && lab[y] == Label::One) ++k;
    }
    return k;
  }

  std::string name(Index x) const { return G.format(w.element(x)); }

  StageCheck& add(std::string stage, std::string name_, bool ok, std::int64_t checked, std::string detail = {}) {
    checks.push_back({std::move(stage), std::move(name_), ok, checked, std::move(detail)});
    return checks.back();
  }
};

std::vector<Window::Offset> offsets_of(const Window& w, const FinSet& S) { return w.offsets(S); }

// Marks S * base inside the window.
std::vector<char> mark(const Window& w, const FinSet& S, const PointSet& base) {
  std::vector<char> m(static_cast<std::size_t>(w.size()), 0);
  auto offs = w.offsets(S);
  for (Index x : base)
    for (const auto& o : offs) {
      Index y = w.mul(o, x);
      if (y >= 0) m[y] = 1;
    }
  return m;
}

Index count_within(const Window& w, int r) { return w.ball_count(std::max(0, std::min(r, w.radius()))); }

// c0 <= c <= c0 + 2, c > c0 implies first set, c > c0 + 1 implies second.
void sandwich(Stage& st, const std::string& stage, const std::vector<int>& c0, int r, const std::vector<char>& set1,
              const std::string& set1_name, const std::vector<char>& set2) {
  Index n = count_within(st.w, r);
  std::int64_t bad_s = 0, bad1 = 0, bad2 = 0;
  Index first_s = -1, first1 = -1, first2 = -1;
  for (Index x = 0; x < n; ++x) {
    int cx = st.c(x);
    int base = c0[x];
    if (cx < 0 || base < 0) {
      ++bad_s;
      if (first_s < 0) first_s = x;
      continue;
    }
    if (cx < base || cx > base + 2) {
      ++bad_s;
      if (first_s < 0) first_s = x;
    }
    if (cx > base && !set1[x]) {
      ++bad1;
      if (first1 < 0) first1 = x;
    }
    if (cx > base + 1 && !set2[x]) {
      ++bad2;
      if (first2 < 0) first2 = x;
    }
  }
  auto det = [&](std::int64_t bad, Index first) {
    return bad ? std::to_string(bad) + " violations, first at " + st.name(first) : std::string{};
  };
  st.add(stage, "c_phi <= c <= c_phi + 2", bad_s == 0, n, det(bad_s, first_s));
  st.add(stage, "c > c_phi implies x in " + set1_name, bad1 == 0, n, det(bad1, first1));
  st.add(stage, "c > c_phi + 1 implies x in B D", bad2 == 0, n, det(bad2, first2));
}

std::vector<char> union_mask(std::vector<char> a, const std::vector<char>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] |= b[i];
  return a;
}

int bit_of(long value, int i) { return static_cast<int>((value >> i) & 1); }

}  // namespace

FinSet select_A(const Window& w, const std::vector<char>& inM, const SyndeticWitness& witness, Mode mode, int valid) {
  const GroupContext& G = w.group();
  FinSet A = choose_A(G, witness);
  if (mode != Mode::Tightened) return A;
  std::vector<GroupElement> head;
  G.for_each_shortlex(std::numeric_limits<int>::max(), [&](const GroupElement& g) {
    head.push_back(g);
    return head.size() < A.size();
  });
  auto start = shortest_prefix_A(w, inM, valid - G.length(head.back()), A.size());
  for (std::size_t len = start ? start->size() : A.size(); len < A.size(); ++len) {
    FinSet cand = G.make_set(std::vector<GroupElement>(head.begin(), head.begin() + static_cast<long>(len)));
    if (first_thin_point(w, inM, cand, valid - G.radius(cand)) < 0) return cand;
  }
  return A;
}

StepResult ind_step(const StepInput& in) {
  const WindowConfig& cfg = in.cfg;
  const Window& w = cfg.window();
  const GroupContext& G = w.group();
  const int k = in.step;
  if (k < 1 || k > kMaxSteps) throw ArgumentError("ind_step: step index out of range");
  if (in.valid > w.radius()) throw ArgumentError("ind_step: valid radius exceeds the window");

  StepResult res;
  std::vector<StageCheck>& checks = res.checks;
  Stage st{w, G, cfg.labels(), {}, {}, {}, checks};
  const Index n = w.size();
  st.inM.assign(n, 0);
  st.inR.assign(n, 0);
  const Tag Mtag{Tag::Kind::M, k - 1, 0};
  const unsigned rmask = (1u << k) - 2u;
  for (Index x = 0; x < n; ++x) {
    st.inM[x] = cfg.has_tag(x, Mtag);
    st.inR[x] = (cfg.tags(x).r & rmask) != 0;
  }

  // Premises on the valid ball.
  {
    Index nv = count_within(w, in.valid);
    std::int64_t overlap = 0, labeled = 0;
    for (Index x = 0; x < nv; ++x) {
      if (st.inM[x] && st.inR[x]) ++overlap;
      if ((st.inM[x] || st.inR[x]) && st.lab[x] != Label::Undefined) ++labeled;
    }
    st.add("input", "M and R disjoint", overlap == 0, nv);
    st.add("input", "M and R unlabeled", labeled == 0, nv);
    if (overlap || labeled) throw ConstructionError("ind_step: input premises fail on the valid ball");
  }

  // A and the plan.
  PlanOptions popt = in.options;
  popt.mode = in.mode;
  FinSet A = in.A_override ? *in.A_override : select_A(w, st.inM, in.M_witness, in.mode, in.valid);
  res.plan = plan_step(G, A, in.s, in.T_R, popt, in.min_core);
  const StepPlan& plan = res.plan;
  const StepParameters& P = plan.params;
  const FinSet& B = P.B;
  const int N = P.N;
  const auto& lam = P.lambda();
  const int ell = P.ell;
  const int K = P.K;
  st.offA = offsets_of(w, A);

  std::vector<int> rad;  // radius after each shrink entry
  int r = in.valid;
  for (const auto& [name, loss] : plan.shrink) rad.push_back(r -= loss);
  const int r_c = rad[0], r_D = rad[1], r1 = rad[2], r2 = rad[3], r3 = rad[4], r_Delta = rad[5], r4 = rad[6],
            r5 = rad[7], r6 = rad[8], r_final = rad[9], core = rad[10];
  res.r0 = in.valid;
  res.core = core;
  res.valid_after = core;
  if (core < in.min_core) {
    Requirement req = Requirement::exactly(required_input_radius(plan, in.min_core));
    throw WindowExhausted("step " + std::to_string(k) + " needs input radius " + req.text() + ", have " +
                              std::to_string(in.valid),
                          req.text());
  }

  // |A x n M| >= 2 where c is read.
  {
    Index thin = first_thin_point(w, st.inM, A, r_c);
    st.add("parameters", "|A x n M| >= 2", thin < 0, count_within(w, r_c),
           thin < 0 ? std::string{} : "thin at " + st.name(thin));
    if (thin >= 0) throw ConstructionError("ind_step: A fails |A x n M| >= 2 at " + st.name(thin));
  }
  for (const auto& pc : check_parameters(G, P)) st.add("parameters", pc.name, pc.pass, 1, pc.detail);

  // c_phi.
  const Index n_c = count_within(w, r_c);
  std::vector<int> c0(static_cast<std::size_t>(n), -1);
  for (Index x = 0; x < n_c; ++x) c0[x] = st.c(x);
  {
    std::int64_t bad = 0;
    for (Index x = 0; x < n_c; ++x) bad += c0[x] < 0 || c0[x] > N;
    st.add("input", "c_phi <= N", bad == 0, n_c);
  }

  // Layers D_0..D_N.
  res.D.assign(N + 1, {});
  PointSet Dall;
  std::vector<int> layer_of(static_cast<std::size_t>(n), -1);
  for (int m = 0; m <= N; ++m) {
    std::vector<char> excluded(static_cast<std::size_t>(n), 0);
    if (m > 0) {
      PointSet prior;
      for (int i = 0; i < m; ++i) prior.insert(prior.end(), res.D[i].begin(), res.D[i].end());
      excluded = mark(w, plan.H[m], prior);
    }
    PointSet cand;
    for (Index x = 0; x < n_c; ++x)
      if (c0[x] == N - m && !excluded[x]) cand.push_back(x);
    res.D[m] = greedy_max_disjoint(w, cand, plan.FB);
    for (Index d : res.D[m]) layer_of[d] = m;
    Dall.insert(Dall.end(), res.D[m].begin(), res.D[m].end());
  }
  std::sort(Dall.begin(), Dall.end());
  {
    // (1) F B translates of D pairwise disjoint.
    std::vector<char> occ(static_cast<std::size_t>(n), 0);
    auto offs = w.offsets(plan.FB);
    std::int64_t clashes = 0, checked = 0;
    Index first = -1;
    Index nd = count_within(w, r_D);
    for (Index d : Dall) {
      if (d >= nd) continue;
      ++checked;
      for (const auto& o : offs) {
        Index y = w.mul(o, d);
        if (y < 0) continue;
        if (occ[y]) {
          ++clashes;
          if (first < 0) first = d;
        }
        occ[y] = 1;
      }
    }
    st.add("layers", "(1) F B d disjoint for distinct d in D", clashes == 0, checked,
           clashes ? "first clash at " + st.name(first) : std::to_string(Dall.size()) + " points in D");
    // Spacing between layers.
    std::int64_t spacing_bad = 0;
    for (int m = 1; m <= N; ++m) {
      PointSet prior;
      for (int i = 0; i < m; ++i) prior.insert(prior.end(), res.D[i].begin(), res.D[i].end());
      auto ex = mark(w, plan.H[m], prior);
      for (Index d : res.D[m]) spacing_bad += ex[d];
    }
    st.add("layers", "D_m misses B^(3m+1) F^-1 F B D_i for i < m", spacing_bad == 0,
           static_cast<std::int64_t>(Dall.size()));
    // (2) coverage.
    auto cover = mark(w, plan.H[N], Dall);
    std::int64_t miss = 0;
    Index first_miss = -1;
    for (Index x = 0; x < nd; ++x)
      if (!cover[x]) {
        ++miss;
        if (first_miss < 0) first_miss = x;
      }
    st.add("layers", "(2) ball(" + std::to_string(r_D) + ") in B^(3N+1) F^-1 F B D", miss == 0, nd,
           miss ? "first uncovered " + st.name(first_miss) : std::string{});
    // (3) local maxima.
    FinSet B3 = G.set_power(B, 3);
    auto offs3 = w.offsets(B3);
    Index n3 = count_within(w, r_c - G.radius(B3));
    std::int64_t bad = 0, chk = 0;
    for (Index d : Dall) {
      if (d >= n3) continue;
      ++chk;
      int m = layer_of[d];
      if (c0[d] != N - m) ++bad;
      for (const auto& o : offs3) {
        Index y = w.mul(o, d);
        if (y < 0 || c0[y] > N - m) ++bad;
      }
    }
    st.add("layers", "(3) c_phi <= c_phi(d) = N - m on B^3 d", bad == 0, chk);
  }

  const auto offB = w.offsets(B);
  std::vector<char> BD = mark(w, B, Dall);

  // phi1: two 1s in M n A d, 0 on the rest of M n B d.
  for (Index d : Dall) {
    int ones = 0;
    for (const auto& o : st.offA) {
      Index y = w.mul(o, d);
      if (y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined && ones < 2) {
        st.lab[y] = Label::One;
        ++ones;
      }
    }
    for (const auto& o : offB) {
      Index y = w.mul(o, d);
      if (y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined) st.lab[y] = Label::Zero;
    }
  }
  {
    Index nd = count_within(w, r_D);
    std::int64_t bad = 0, chk = 0;
    for (Index d : Dall) {
      if (d >= nd) continue;
      ++chk;
      int ones = 0;
      for (const auto& o : st.offA) {
        Index y = w.mul(o, d);
        if (y >= 0 && st.inM[y] && st.lab[y] == Label::One) ++ones;
      }
      bool zeros = true;
      for (const auto& o : offB) {
        Index y = w.mul(o, d);
        if (y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined) zeros = false;
      }
      bad += ones != 2 || !zeros;
    }
    st.add("phi1", "two 1s in M n A d and M n B d labeled", bad == 0, chk);
  }
  sandwich(st, "phi1", c0, r1, BD, "B D", BD);

  // phi2: distinct behaviour on the two verification blocks of each pair.
  const int nb = static_cast<int>(B.size());
  struct PairOffsets {
    int i, j;
    std::vector<Window::Offset> ai, aj;  // a v b_i, a v b_j for a in A
    std::vector<Window::Offset> bi, bj;  // b v b_i, b v b_j for b in B
    Window::Offset vi, vj;               // v b_i, v b_j
  };
  std::vector<PairOffsets> pairs;
  std::vector<GroupElement> set1;
  for (const auto& b : B) set1.push_back(b);
  for (std::size_t p = 0; p < P.v.pairs.size(); ++p) {
    auto [i, j] = P.v.pairs[p];
    const GroupElement& v = P.v.v[p];
    GroupElement vbi = G.mul(v, B[i]), vbj = G.mul(v, B[j]);
    for (const auto& b : B) {
      set1.push_back(G.mul(b, vbi));
      set1.push_back(G.mul(b, vbj));
    }
    if (i == j) continue;
    PairOffsets po{i, j, {}, {}, {}, {}, w.offset(vbi), w.offset(vbj)};
    for (const auto& a : A) {
      po.ai.push_back(w.offset(G.mul(a, vbi)));
      po.aj.push_back(w.offset(G.mul(a, vbj)));
    }
    for (const auto& b : B) {
      po.bi.push_back(w.offset(G.mul(b, vbi)));
      po.bj.push_back(w.offset(G.mul(b, vbj)));
    }
    pairs.push_back(std::move(po));
  }
  std::vector<char> S2 = mark(w, G.make_set(set1), Dall);
  auto lval = [&](Index y) -> std::uint8_t {
    if (y < 0) return kU;
    if (st.inR[y]) return 2;
    return st.lab[y] == Label::Undefined ? kU : static_cast<std::uint8_t>(st.lab[y]);
  };
  {
    Index nd = count_within(w, r_D);
    std::int64_t over_budget = 0, undistinguished = 0, chk = 0;
    Index first_budget = -1, first_undist = -1;
    for (Index d : Dall) {
      for (const auto& po : pairs) {
        auto ones = [&]() {
          std::vector<Index> ys;
          for (const auto* offs : {&po.ai, &po.aj})
            for (const auto& o : *offs) {
              Index y = w.mul(o, d);
              if (y < 0) return -1;
              ys.push_back(y);
            }
          std::sort(ys.begin(), ys.end());
          ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
          int n = 0;
          for (Index y : ys) n += st.lab[y] == Label::One;
          return n;
        };
        int before = ones();
        for (std::size_t a = 0; a < po.ai.size(); ++a) {
          Index p = w.mul(po.ai[a], d);
          if (p < 0 || !st.inM[p] || st.lab[p] != Label::Undefined) continue;
          Index q = w.mul(po.aj[a], d);
          if (q < 0) break;
          if (st.inR[q]) {
            st.lab[p] = Label::Zero;
          } else if (st.lab[q] != Label::Undefined) {
            st.lab[p] = st.lab[q] == Label::One ? Label::Zero : Label::One;
          } else {
            st.lab[q] = Label::Zero;
            st.lab[p] = Label::One;
          }
          break;
        }
        for (const auto* offs : {&po.bi, &po.bj})
          for (const auto& o : *offs) {
            Index y = w.mul(o, d);
            if (y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined) st.lab[y] = Label::Zero;
          }
        if (d >= nd) continue;
        ++chk;
        int after = ones();
        if (before < 0 || after > before + 1) {
          ++over_budget;
          if (first_budget < 0) first_budget = d;
        }
        bool distinct = false;
        for (std::size_t a = 0; a < po.ai.size() && !distinct; ++a) {
          std::uint8_t u = lval(w.mul(po.ai[a], d)), z = lval(w.mul(po.aj[a], d));
          distinct = u != z && u != kU && z != kU;
        }
        if (!distinct) {
          ++undistinguished;
          if (first_undist < 0) first_undist = d;
        }
      }
    }
    st.add("phi2", "at most one new 1 on A v {b1, b2} d", over_budget == 0, chk,
           over_budget ? "first at d = " + st.name(first_budget) : std::string{});
    st.add("phi2", "some a in A distinguishes the blocks", undistinguished == 0, chk,
           undistinguished ? "first at d = " + st.name(first_undist) : std::string{});
  }
  (void)nb;
  sandwich(st, "phi2", c0, r2, S2, "(B u B v b1) D", BD);

  // phi3: remaining M points of V B D get 0.
  const auto offVB = w.offsets(plan.VB);
  for (Index d : Dall)
    for (const auto& o : offVB) {
      Index y = w.mul(o, d);
      if (y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined) st.lab[y] = Label::Zero;
    }
  {
    Index nd = count_within(w, r_D);
    std::int64_t bad = 0, chk = 0;
    for (Index d : Dall) {
      if (d >= nd) continue;
      ++chk;
      for (const auto& o : offVB) {
        Index y = w.mul(o, d);
        if (y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined) ++bad;
      }
    }
    st.add("phi3", "M n V B D labeled", bad == 0, chk);
  }
  sandwich(st, "phi3", c0, r3, S2, "(B u B v b1) D", BD);

  // Pairing d -> p(d) in B d via the L order.
  const auto offV = w.offsets(P.V());
  std::vector<char> BVBD = union_mask(BD, mark(w, plan.VB, Dall));
  std::vector<std::uint8_t> Lbuf, Lbest;
  std::vector<std::vector<std::uint8_t>> Lall(B.size());
  {
    const int r_read = r3 - G.radius(B) - G.radius(P.V());
    const Index n_read = count_within(w, r_read);
    std::int64_t empty_S = 0, undefined = 0, not_distinct = 0, chk = 0;
    for (Index d : Dall) {
      int m = layer_of[d];
      bool checked = d < n_read;
      int best = -1;
      for (int b = 0; b < static_cast<int>(B.size()); ++b) {
        Index x = w.mul(offB[b], d);
        auto& L = Lall[b];
        L.assign(offV.size(), kU);
        for (std::size_t t = 0; t < offV.size(); ++t) {
          Index y = x < 0 ? -1 : w.mul(offV[t], x);
          L[t] = lval(y);
          if (checked && L[t] == kU) ++undefined;
        }
        if (x < 0 || st.c(x) != N - m + 2) continue;
        if (best < 0 || Lall[best] < L) best = b;
      }
      if (checked) {
        ++chk;
        if (best < 0) ++empty_S;
        std::vector<std::vector<std::uint8_t>> sorted(Lall.begin(), Lall.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) ++not_distinct;
      }
      if (best < 0) continue;
      res.Delta.push_back({w.mul(offB[best], d), d, m, best});
    }
    st.add("pairing", "some b d with c = N - m + 2", empty_S == 0, chk);
    st.add("pairing", "L defined on B d", undefined == 0, chk);
    st.add("pairing", "L distinct on B d", not_distinct == 0, chk);
  }
  std::sort(res.Delta.begin(), res.Delta.end(), [](const DeltaPoint& a, const DeltaPoint& b) { return a.x < b.x; });
  PointSet Delta;
  for (const auto& dp : res.Delta) Delta.push_back(dp.x);
  {
    std::vector<char> occ(static_cast<std::size_t>(n), 0);
    auto offF = w.offsets(P.F());
    Index nD = count_within(w, r_Delta);
    std::int64_t clash = 0, chk = 0;
    for (Index x : Delta) {
      if (x >= nD) continue;
      ++chk;
      for (const auto& o : offF) {
        Index y = w.mul(o, x);
        if (y < 0) continue;
        clash += occ[y];
        occ[y] = 1;
      }
    }
    st.add("pairing", "F delta disjoint for distinct delta", clash == 0, chk);
  }

  // phi4: one surviving unlabeled M point in each A lambda_i delta.
  std::vector<std::vector<Window::Offset>> offAL(ell);
  for (int i = 0; i < ell; ++i)
    for (const auto& a : A) offAL[i].push_back(w.offset(G.mul(a, lam[i])));
  std::vector<Window::Offset> offLam;
  for (const auto& l : lam) offLam.push_back(w.offset(l));
  const std::size_t nDelta = Delta.size();
  std::vector<Index> survivor(nDelta * ell, -1);
  std::vector<int> survivor_a(nDelta * ell, -1);
  std::vector<char> is_survivor(static_cast<std::size_t>(n), 0);
  for (std::size_t t = 0; t < nDelta; ++t)
    for (int i = 0; i < ell; ++i)
      for (std::size_t a = 0; a < offAL[i].size(); ++a) {
        Index y = w.mul(offAL[i][a], Delta[t]);
        if (y < 0 || !st.inM[y] || st.lab[y] != Label::Undefined || is_survivor[y]) continue;
        if (survivor[t * ell + i] < 0) {
          survivor[t * ell + i] = y;
          survivor_a[t * ell + i] = static_cast<int>(a);
          is_survivor[y] = 1;
        } else {
          st.lab[y] = Label::Zero;
        }
      }
  for (Index x = 0; x < n; ++x)
    if (st.lab[x] == Label::Undefined && !st.inR[x] && !is_survivor[x]) st.lab[x] = Label::Zero;
  std::vector<char> BLD = mark(w, plan.BL, Delta);
  {
    Index nD = count_within(w, r_Delta);
    std::int64_t bad = 0, chk = 0;
    for (std::size_t t = 0; t < nDelta; ++t) {
      if (Delta[t] >= nD) continue;
      for (int i = 0; i < ell; ++i) {
        ++chk;
        int open = 0;
        for (const auto& o : offAL[i]) {
          Index y = w.mul(o, Delta[t]);
          open += y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined;
        }
        bad += open != 1;
      }
    }
    st.add("phi4", "exactly one unlabeled M point in A lambda_i delta", bad == 0, chk);
    Index n4 = count_within(w, r4);
    std::int64_t line1 = 0, line2 = 0, dom = 0;
    for (Index x = 0; x < n4; ++x) {
      int open = 0;
      for (const auto& o : st.offA) {
        Index y = w.mul(o, x);
        open += y >= 0 && st.inM[y] && st.lab[y] == Label::Undefined;
      }
      line1 += open > 1;
      if (open > 0 && (st.c(x) != c0[x] || !BLD[x])) ++line2;
      if (st.lab[x] == Label::Undefined && !st.inR[x] && !is_survivor[x]) ++dom;
    }
    st.add("phi4", "|{a : a x in M, unlabeled}| <= 1", line1 == 0, n4);
    st.add("phi4", "unlabeled M in A x implies c = c_phi and x in B Lambda Delta", line2 == 0, n4);
    st.add("phi4", "X minus (R u A Lambda Delta) labeled", dom == 0, n4);
  }
  sandwich(st, "phi4", c0, r4, BVBD, "(B u V B) D", BD);

  // Parity coding at lambda_1..lambda_K, lambda_(K+1)..lambda_2K and beyond.
  auto code_parity = [&](std::size_t t, int i, int bit) {
    Index s = survivor[t * ell + i];
    if (s < 0) return;
    Index x = w.mul(offLam[i], Delta[t]);
    int cur = x < 0 ? 0 : std::max(0, st.c(x));
    st.lab[s] = label_of_bit((bit ^ cur) & 1);
  };
  auto parity_check = [&](const std::string& stage, const std::string& what, int from, int count,
                          const std::function<long(std::size_t)>& value, int radius) {
    Index nr = count_within(w, radius);
    std::int64_t bad = 0, chk = 0;
    for (std::size_t t = 0; t < nDelta; ++t) {
      if (Delta[t] >= nr) continue;
      ++chk;
      for (int i = 0; i < count; ++i) {
        Index x = w.mul(offLam[from + i], Delta[t]);
        if ((st.c(x) & 1) != bit_of(value(t), i)) ++bad;
      }
    }
    st.add(stage, what, bad == 0, chk);
  };
  std::vector<char> S5 = union_mask(BVBD, BLD);

  for (std::size_t t = 0; t < nDelta; ++t)
    for (int i = 0; i < K; ++i) code_parity(t, i, bit_of(res.Delta[t].b, i));
  parity_check("phi5", "c(lambda_i delta) = digit i of r(b) mod 2", 0, K,
               [&](std::size_t t) { return static_cast<long>(res.Delta[t].b); }, r5 - G.radius(plan.AL));
  sandwich(st, "phi5", c0, r5, S5, "(B u V B) D u B Lambda Delta", BD);

  // Tags for D and Delta, then the phi5 snapshot.
  WindowConfig out = cfg;
  for (int m = 0; m <= N; ++m)
    for (Index d : res.D[m]) out.add_tag(d, Tag{Tag::Kind::D, k, m});
  for (Index x : Delta) out.add_tag(x, Tag{Tag::Kind::Delta, k, 0});
  res.phi5 = out;
  res.phi5.set_labels(st.lab);
  res.phi5.set_core_radius(core);

  // Claim (star) on pattern classes over T_star.
  {
    Index n5 = count_within(w, r5);
    std::vector<Index> pts;
    std::vector<int> cls_c0, kind;  // kind 1: c = c_phi + 2, kind 2: c <= c_phi + 1
    for (Index x = 0; x < n5; ++x) {
      int c5 = st.c(x);
      if (c5 == c0[x] + 2) {
        pts.push_back(x);
        kind.push_back(1);
      } else if (c5 <= c0[x] + 1) {
        pts.push_back(x);
        kind.push_back(2);
      }
    }
    PatternClasses pc(res.phi5, plan.T_star, pts);
    if (pc.exhausted()) {
      st.add("phi5", "(star) on T_star", false, 0, "window exhausted at " + st.name(pc.exhausted_point()));
    } else {
      const std::size_t nc = pc.num_classes();
      std::vector<int> maxX(nc, -1), minY(nc, 1 << 30);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        int cl = pc.class_of(i);
        if (kind[i] == 1) maxX[cl] = std::max(maxX[cl], c0[pts[i]]);
        else minY[cl] = std::min(minY[cl], c0[pts[i]]);
      }
      std::int64_t bad = 0;
      for (std::size_t a = 0; a < nc; ++a) {
        if (maxX[a] < 0) continue;
        for (std::size_t b = 0; b < nc; ++b)
          if (minY[b] <= maxX[a] && !pc.incompatible(static_cast<int>(a), static_cast<int>(b))) ++bad;
      }
      st.add("phi5", "(star) on T_star", bad == 0, static_cast<std::int64_t>(pts.size()),
             std::to_string(nc) + " pattern classes");
    }
  }

  // phi6: R' at lambda_l, its offset coded at lambda_(K+1)..lambda_2K.
  std::vector<char> inRp(static_cast<std::size_t>(n), 0), inMp(static_cast<std::size_t>(n), 0);
  std::vector<long> ra(nDelta, 0);
  for (std::size_t t = 0; t < nDelta; ++t) {
    Index y = survivor[t * ell + ell - 1];
    if (y >= 0) {
      inRp[y] = 1;
      res.Rprime.push_back(y);
      ra[t] = B.position(A[survivor_a[t * ell + ell - 1]]);
    }
    for (int i = 0; i < K; ++i) code_parity(t, K + i, bit_of(ra[t], i));
  }
  parity_check("phi6", "c(lambda_(K+i) delta) = digit i of r(a) mod 2", K, K, [&](std::size_t t) { return ra[t]; },
               r6 - G.radius(plan.AL));
  sandwich(st, "phi6", c0, r6, S5, "(B u V B) D u B Lambda Delta", BD);

  // kappa on the graph delta ~ h s h^-1 delta.
  res.kappa = greedy_coloring(w, LocalGraph{Delta, plan.conj, P.degree_bound});
  res.kappa_colors = res.kappa.empty() ? 0 : *std::max_element(res.kappa.begin(), res.kappa.end()) + 1;
  {
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    for (std::size_t t = 0; t < nDelta; ++t) pos[Delta[t]] = static_cast<int>(t);
    auto offC = w.offsets(plan.conj);
    Index nr = count_within(w, r_Delta);
    std::int64_t bad = 0, chk = 0, wide = 0;
    for (std::size_t t = 0; t < nDelta; ++t) {
      if (Delta[t] >= nr) continue;
      ++chk;
      if (res.kappa[t] >= (1 << P.kappa_bits)) ++wide;
      for (const auto& o : offC) {
        Index y = w.mul(o, Delta[t]);
        if (y >= 0 && pos[y] >= 0 && res.kappa[pos[y]] == res.kappa[t]) ++bad;
      }
    }
    st.add("phi'", "kappa proper on delta ~ h s h^-1 delta", bad == 0, chk,
           std::to_string(res.kappa_colors) + " colors");
    st.add("phi'", "kappa < 2^(l - 2K - 2)", wide == 0, chk);
  }
  for (std::size_t t = 0; t < nDelta; ++t) {
    for (int i = 0; i < P.kappa_bits; ++i) code_parity(t, 2 * K + i, bit_of(res.kappa[t], i));
    for (int i = 2 * K + P.kappa_bits; i < ell - 2; ++i) {
      Index y = survivor[t * ell + i];
      if (y >= 0) st.lab[y] = Label::Zero;
    }
    Index y = survivor[t * ell + ell - 2];
    if (y >= 0) {
      inMp[y] = 1;
      res.Mprime.push_back(y);
    }
  }
  std::sort(res.Rprime.begin(), res.Rprime.end());
  std::sort(res.Mprime.begin(), res.Mprime.end());
  parity_check("phi'", "c(lambda_(2K+i) delta) = digit i of kappa mod 2", 2 * K, P.kappa_bits,
               [&](std::size_t t) { return static_cast<long>(res.kappa[t]); }, r_final - G.radius(plan.AL));
  sandwich(st, "phi'", c0, r_final, S5, "(B u V B) D u B Lambda Delta", BD);

  // Output configuration.
  out.set_labels(st.lab);
  for (Index x : res.Mprime) out.add_tag(x, Tag{Tag::Kind::M, k, 0});
  for (Index x : res.Rprime) out.add_tag(x, Tag{Tag::Kind::R, k, 0});
  out.set_core_radius(core);
  res.cfg = out;

  // (i)-(iv) and the recognizability witnesses.
  auto& ver = res.verifications;
  {
    Verification v;
    v.claim = "(i) M' and R' disjoint subsets of M";
    v.scope = w.radius();
    v.points_checked = n;
    for (Index x = 0; x < n; ++x)
      if ((inMp[x] && inRp[x]) || ((inMp[x] || inRp[x]) && !st.inM[x])) {
        if (!v.failures) v.counterexample = st.name(x);
        ++v.failures;
      }
    v.verdict = v.failures ? Verdict::Fail : Verdict::Pass;
    v.detail = std::to_string(res.Mprime.size()) + " points in M', " + std::to_string(res.Rprime.size()) + " in R'";
    ver.push_back(v);
  }
  {
    Verification v;
    v.claim = "(ii) phi' extends phi";
    v.scope = w.radius();
    v.points_checked = n;
    std::int64_t unlabeled = 0;
    Index nc = count_within(w, core);
    for (Index x = 0; x < n; ++x) {
      if (cfg.label(x) != Label::Undefined && cfg.label(x) != st.lab[x]) {
        if (!v.failures) v.counterexample = st.name(x);
        ++v.failures;
      }
      if (x < nc && st.lab[x] == Label::Undefined && !st.inR[x] && !inMp[x] && !inRp[x]) ++unlabeled;
    }
    v.failures += unlabeled;
    v.verdict = v.failures ? Verdict::Fail : Verdict::Pass;
    v.detail = "domain is X minus (M' u R' u R) on the core; " + std::to_string(unlabeled) + " stray unlabeled points";
    ver.push_back(v);
  }
  auto named = [](Verification v, std::string claim) {
    v.claim = std::move(claim);
    return v;
  };
  ver.push_back(named(verify_syndetic(w, inMp, plan.W_Mprime, core), "(iii) M' syndetic"));
  ver.push_back(named(verify_syndetic(w, inRp, plan.W_Rprime, core), "(iii) R' syndetic"));
  ver.push_back(named(verify_recognizable(out, inRp, plan.T_Rprime, core), "(iii) R' recognizable"));
  ver.push_back(named(verify_blocking(out, in.s, plan.T_block, core), "(iv) blocking s"));
  ver.push_back(named(verify_blocking(out, G.inv(in.s), plan.T_block, core - G.length(in.s)), "(iv) blocking s^-1"));
  ver.push_back(named(verify_recognizable(out, membership(w, Delta), plan.T_Delta, core), "Delta recognizable"));
  for (int m = 0; m <= N; ++m) {
    PointSet Dm_delta;
    for (const auto& dp : res.Delta)
      if (dp.layer == m) Dm_delta.push_back(dp.x);
    ver.push_back(named(verify_recognizable(res.phi5, membership(w, Dm_delta), plan.T_Delta_m[m], core),
                        "Delta_" + std::to_string(m) + " recognizable"));
    ver.push_back(named(verify_recognizable(res.phi5, membership(w, res.D[m]), plan.T_D[m], core),
                        "D_" + std::to_string(m) + " recognizable"));
  }

  res.M_witness = SyndeticWitness{plan.W_Mprime, Tag{Tag::Kind::M, k, 0}.name(), core, ver[2].pass()};
  res.R_witness = SyndeticWitness{plan.W_Rprime, Tag{Tag::Kind::R, k, 0}.name(), core, ver[3].pass()};
  return res;
}

}  // namespace orbitforge
