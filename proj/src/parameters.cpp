#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "orbitforge/construction.hpp"
#include "orbitforge/errors.hpp"

namespace orbitforge {

namespace mp = boost::multiprecision;

std::string to_string(Mode m) { return m == Mode::Faithful ? "faithful" : "tightened"; }

Mode parse_mode(const std::string& text) {
  if (text == "faithful") return Mode::Faithful;
  if (text == "tightened") return Mode::Tightened;
  throw ParseError("unknown mode '" + text + "' (expected faithful or tightened)");
}

Requirement Requirement::exactly(long long r, std::string why) {
  Requirement q;
  q.exact = true;
  q.radius = r;
  q.log10_radius = r > 0 ? std::log10(static_cast<double>(r)) : 0;
  q.reason = std::move(why);
  return q;
}

Requirement Requirement::at_least_log10(double lg, std::string why) {
  Requirement q;
  q.exact = false;
  q.log10_radius = lg;
  q.radius = lg < 18 ? static_cast<long long>(std::floor(std::pow(10.0, lg))) : std::numeric_limits<long long>::max();
  q.reason = std::move(why);
  return q;
}

bool Requirement::exceeds(long long cap) const {
  if (exact) return radius > cap;
  return log10_radius > std::log10(static_cast<double>(cap));
}

std::string Requirement::text() const {
  std::ostringstream os;
  if (exact) {
    os << radius;
  } else if (log10_radius < 15) {
    os << ">= " << radius;
  } else {
    os.precision(4);
    os << ">= 10^" << log10_radius;
  }
  return os.str();
}

Requirement Requirement::parse(const std::string& text, std::string why) {
  if (text.rfind(">= 10^", 0) == 0) return at_least_log10(std::stod(text.substr(6)), std::move(why));
  if (text.rfind(">= ", 0) == 0) return at_least_log10(std::log10(std::stod(text.substr(3))), std::move(why));
  if (text.empty()) throw ParseError("empty radius requirement");
  return exactly(std::stoll(text), std::move(why));
}

namespace {

BigInt pow2(const BigInt& e) { return BigInt(1) << static_cast<unsigned>(e); }

// 2^(n - p/q) >= (p/q) s^2, i.e. 2^(nq - p) q^q >= (p s^2)^q.
bool ratio_inequality(std::size_t n, std::size_t s, const BigInt& p, const BigInt& q) {
  unsigned qq = static_cast<unsigned>(q);
  BigInt e = BigInt(n) * q - p;
  BigInt rhs = mp::pow(p * BigInt(s) * BigInt(s), qq);
  BigInt qpow = mp::pow(q, qq);
  if (e >= 0) return pow2(e) * qpow >= rhs;
  return qpow >= rhs * pow2(-e);
}

void require_ratio(const BigInt& p, const BigInt& q) {
  if (p <= 0 || q <= 0) throw ArgumentError("counting lemma: r must be positive");
  if (q > 4096) throw ArgumentError("counting lemma: denominator of r too large");
}

// Smallest r with |ball(r)| >= 10^lg, as a lower bound on log10 of a radius.
double radius_lower_bound_log10(const GroupContext& G, double lg) {
  if (G.kind() == GroupKind::Lattice) {
    // ball(r) lies in the box of side 2r+1.
    double per = lg / G.rank();
    if (per < 15) return std::log10(std::max(1.0, (std::pow(10.0, per) - 1) / 2));
    return per - std::log10(2.0) - 1e-9;
  }
  // |ball(r)| <= (2k)^(r+1).
  double r = lg / std::log10(2.0 * G.rank()) - 1;
  return std::log10(std::max(1.0, r));
}

double log10_big(const BigInt& x) {
  if (x <= 0) return 0;
  std::size_t bits = mp::msb(x);
  if (bits < 60) return std::log10(static_cast<double>(static_cast<unsigned long long>(x)));
  BigInt top = x >> static_cast<unsigned>(bits - 52);
  return std::log10(static_cast<double>(static_cast<unsigned long long>(top))) + (bits - 52) * std::log10(2.0);
}

}  // namespace

int counting_lemma_n(std::size_t c, std::size_t b, const BigInt& p, const BigInt& q, int n_cap) {
  require_ratio(p, q);
  for (int n = 1; n <= n_cap; ++n)
    if (ratio_inequality(static_cast<std::size_t>(n), c + static_cast<std::size_t>(n) * b, p, q)) return n;
  throw WindowExhausted("counting lemma: no n up to " + std::to_string(n_cap));
}

bool counting_inequality(std::size_t lambda, std::size_t f, const BigInt& p, const BigInt& q) {
  require_ratio(p, q);
  return ratio_inequality(lambda, f, p, q);
}

CountingResult counting_lemma(const GroupContext& G, const FinSet& B, const FinSet& C, const BigInt& p,
                              const BigInt& q, std::optional<int> n) {
  if (B.empty()) throw ArgumentError("counting lemma: B is empty");
  CountingResult out;
  out.n = n ? *n : counting_lemma_n(C.size(), B.size(), p, q);
  std::unordered_set<GroupElement, GroupElementHash> occupied(C.begin(), C.end());
  int reach = std::max(0, G.radius(C)) + 2 * G.radius(B) + out.n * (2 * G.radius(B) + 1) + 2;
  G.for_each_shortlex(reach, [&](const GroupElement& lam) {
    if (static_cast<int>(out.lambda.size()) == out.n) return false;
    std::vector<GroupElement> block;
    for (const auto& b : B) {
      GroupElement y = G.mul(b, lam);
      if (occupied.count(y)) return true;
      block.push_back(std::move(y));
    }
    for (auto& y : block) occupied.insert(std::move(y));
    out.lambda.push_back(lam);
    return true;
  });
  if (static_cast<int>(out.lambda.size()) < out.n) throw WindowExhausted("counting lemma: search radius exhausted");
  out.Lambda = G.make_set(out.lambda);
  out.F = G.set_union(C, G.set_product(B, out.Lambda));
  return out;
}

CountingResult counting_lemma(const GroupContext& G, const FinSet& B, const FinSet& C, Rational r) {
  return counting_lemma(G, B, C, BigInt(r.numerator()), BigInt(r.denominator()));
}

const GroupElement& VerificationFunction::at(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (pairs[k].first == i && pairs[k].second == j) return v[k];
  throw ArgumentError("verification function: pair out of range");
}

VerificationFunction make_verification_function(const GroupContext& G, const FinSet& B) {
  if (!B.contains(G.identity())) throw ArgumentError("verification function: identity not in B");
  if (!(G.set_inverse(B) == B)) throw ArgumentError("verification function: B is not symmetric");
  VerificationFunction out;
  std::unordered_set<GroupElement, GroupElementHash> occupied(B.begin(), B.end());
  const int nb = static_cast<int>(B.size());
  std::vector<GroupElement> all;
  for (int i = 0; i < nb; ++i)
    for (int j = i; j < nb; ++j) {
      GroupElement found;
      bool ok = false;
      G.for_each_shortlex(std::numeric_limits<int>::max(), [&](const GroupElement& v) {
        // B v b_i u B v b_j; the two halves of one pair may overlap.
        std::unordered_set<GroupElement, GroupElementHash> mine;
        for (int k : {i, j}) {
          GroupElement vb = G.mul(v, B[k]);
          for (const auto& b : B) {
            GroupElement y = G.mul(b, vb);
            if (occupied.count(y)) return true;
            mine.insert(std::move(y));
          }
        }
        for (const auto& y : mine) occupied.insert(y);
        found = v;
        ok = true;
        return false;
      });
      if (!ok) throw WindowExhausted("verification function: search exhausted");
      out.pairs.emplace_back(i, j);
      out.v.push_back(found);
      for (const auto& b : B) all.push_back(G.mul(b, found));
    }
  out.V = G.make_set(std::move(all));
  return out;
}

FinSet choose_A(const GroupContext& G, const SyndeticWitness& witness) {
  if (witness.F.empty()) throw ArgumentError("choose_A: empty witness");
  FinSet Finv = G.set_inverse(witness.F);
  FinSet avoid = G.set_product(witness.F, Finv);
  GroupElement g;
  G.for_each_shortlex(G.radius(avoid) + 1, [&](const GroupElement& h) {
    if (avoid.contains(h)) return true;
    g = h;
    return false;
  });
  FinSet A = G.set_union(Finv, G.right_translate(Finv, G.inv(g)));
  return G.set_union(A, G.make_set({G.identity()}));
}

Index first_thin_point(const Window& w, const std::vector<char>& inM, const FinSet& A, int region) {
  auto offs = w.offsets(A);
  Index n = w.ball_count(std::max(0, region));
  for (Index x = 0; x < n; ++x) {
    int hits = 0;
    for (const auto& o : offs) {
      Index y = w.mul(o, x);
      if (y >= 0 && inM[y] && ++hits >= 2) break;
    }
    if (hits < 2) return x;
  }
  return -1;
}

std::optional<FinSet> shortest_prefix_A(const Window& w, const std::vector<char>& inM, int region, std::size_t k_max) {
  const GroupContext& G = w.group();
  std::vector<GroupElement> prefix;
  G.for_each_shortlex(std::numeric_limits<int>::max(), [&](const GroupElement& g) {
    prefix.push_back(g);
    return prefix.size() < k_max;
  });
  if (region < 0) return std::nullopt;
  Index n = w.ball_count(region);
  std::vector<std::uint8_t> cnt(static_cast<std::size_t>(n), 0);
  Index thin = n;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    auto o = w.offset(prefix[k]);
    for (Index x = 0; x < n; ++x) {
      if (cnt[x] >= 2) continue;
      Index y = w.mul(o, x);
      if (y >= 0 && inM[y] && ++cnt[x] == 2) --thin;
    }
    if (k >= 1 && thin == 0)
      return G.make_set(std::vector<GroupElement>(prefix.begin(), prefix.begin() + static_cast<long>(k + 1)));
  }
  return std::nullopt;
}

std::vector<ParameterCheck> check_parameters(const GroupContext& G, const StepParameters& p) {
  std::vector<ParameterCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  const FinSet& B = p.B;
  const FinSet& F = p.F();
  const FinSet& V = p.V();
  add("N = |A| - 2", p.N == static_cast<int>(p.A.size()) - 2, std::to_string(p.N));
  add("B = A^-1 A", B == G.set_product(G.set_inverse(p.A), p.A), std::to_string(B.size()) + " elements");
  add("B = B^-1", G.set_inverse(B) == B);

  // v: symmetry, avoidance of B, disjointness across ordered pairs.
  const int nb = static_cast<int>(B.size());
  bool sym = true;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) sym &= p.v.at(i, j) == p.v.at(j, i);
  add("v symmetric", sym);
  std::unordered_map<GroupElement, std::size_t, GroupElementHash> owner;
  bool avoid = true, disjoint = true;
  for (std::size_t k = 0; k < p.v.pairs.size(); ++k) {
    auto [i, j] = p.v.pairs[k];
    for (int t : {i, j}) {
      GroupElement vb = G.mul(p.v.v[k], B[t]);
      for (const auto& b : B) {
        GroupElement y = G.mul(b, vb);
        if (B.contains(y)) avoid = false;
        auto [it, fresh] = owner.emplace(y, k);
        if (!fresh && it->second != k) disjoint = false;
      }
    }
  }
  const std::size_t blocks = p.v.pairs.size();
  add("B v(b1,b2) b1 misses B", avoid);
  add("blocks B v {b1,b2} of distinct unordered pairs disjoint", disjoint, std::to_string(blocks) + " pairs");
  std::vector<GroupElement> vall;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (const auto& b : B) vall.push_back(G.mul(b, p.v.at(i, j)));
  add("V = union of B v(b1,b2)", G.make_set(vall) == V, std::to_string(V.size()) + " elements");

  // Counting lemma clauses.
  const FinSet& L = p.counting.Lambda;
  FinSet BL = G.set_product(B, L);
  auto subset = [&](const FinSet& x, const FinSet& y) {
    return std::all_of(x.begin(), x.end(), [&](const GroupElement& g) { return y.contains(g); });
  };
  bool translates_disjoint = BL.size() == B.size() * L.size();
  add("counting (i) C in F", subset(p.C, F));
  add("counting (ii) B Lambda in F", subset(BL, F));
  add("counting (iii) B-translates of Lambda disjoint", translates_disjoint);
  add("counting (iv) B Lambda misses C", G.disjoint(BL, p.C));
  if (p.mode == Mode::Faithful)
    add("counting (v) |Lambda| >= log2(r |F|^2) + r", counting_inequality(L.size(), F.size(), p.r_num, p.r_den),
        "|Lambda| = " + std::to_string(L.size()) + ", |F| = " + std::to_string(F.size()) +
            ", r = " + p.r_num.str() + "/" + p.r_den.str());

  FinSet B3 = G.set_power(B, 3);
  FinSet VB = G.set_product(V, B);
  add("(a) B^3 u V B in F", subset(B3, F) && subset(VB, F));
  add("(b) B Lambda in F", subset(BL, F));
  add("(c) B lambda disjoint from B lambda'", translates_disjoint);
  add("(d) B Lambda B misses B u V B", G.disjoint(G.set_product(BL, B), G.set_union(B, VB)));
  BigInt F2 = BigInt(F.size()) * F.size();
  BigInt q = 2 * p.beta * F2 + 1;
  std::size_t ell = L.size();
  if (p.mode == Mode::Faithful) {
    BigInt rhs = q * BigInt(B.size()) * B.size() * 16;
    add("(e) |Lambda| >= log2(2|B|^(3N+3)|F|^2+1) + 2log2|B| + 4", (BigInt(1) << static_cast<unsigned>(ell)) >= rhs,
        "l = " + std::to_string(ell));
  }
  add("K least with 2^K > |B|",
      (std::size_t{1} << p.K) > B.size() && (p.K == 0 || (std::size_t{1} << (p.K - 1)) <= B.size()),
      "K = " + std::to_string(p.K));
  add("r injective into [0, 2^K)", B.size() <= (std::size_t{1} << p.K));
  if (p.mode == Mode::Faithful) {
    bool ok = static_cast<int>(ell) - 2 * p.K - 2 >= 0 &&
              (BigInt(1) << static_cast<unsigned>(ell - 2 * p.K - 2)) >= q;
    add("l - 2K - 2 >= log2(2|B|^(3N+3)|F|^2 + 1)", ok);
  }
  add("l = 2K + 2 + kappa bits", static_cast<int>(ell) == 2 * p.K + 2 + p.kappa_bits,
      "kappa bits = " + std::to_string(p.kappa_bits));
  return out;
}

StepPlan plan_step(const GroupContext& G, const FinSet& A, const GroupElement& s, const FinSet& T_R,
                   const PlanOptions& opt, int min_core) {
  if (G.is_identity(s)) throw ArgumentError("ind_step: s must not be the identity");
  if (!A.contains(G.identity()) || A.size() < 2) throw ArgumentError("plan_step: A must contain e and have 2 elements");
  StepPlan plan;
  plan.s = s;
  plan.T_R = T_R;
  StepParameters& P = plan.params;
  P.mode = opt.mode;
  P.A = A;
  P.N = static_cast<int>(A.size()) - 2;
  P.B = G.set_product(G.set_inverse(A), A);
  const FinSet& B = P.B;
  const std::size_t nb = B.size();

  // F contains |B|^2 pairwise disjoint blocks B v b1 of size |B|.
  double lg_F = 3 * std::log10(static_cast<double>(nb));
  P.beta = mp::pow(BigInt(nb), static_cast<unsigned>(3 * P.N + 3));
  if (opt.mode == Mode::Faithful) lg_F = std::max(lg_F, log10_big((2 * P.beta + 1) * nb));
  double lg_lb = std::log10(static_cast<double>(P.N + 1)) + radius_lower_bound_log10(G, lg_F);
  auto refuse = [&](const std::string& why) {
    Requirement req = Requirement::at_least_log10(lg_lb, why);
    throw WindowExhausted("step parameters not materialized: " + why + "; required radius " + req.text(), req.text());
  };
  if (std::pow(10.0, lg_F) > static_cast<double>(opt.max_set))
    refuse("|F| >= " + std::string(lg_F < 15 ? std::to_string(static_cast<long long>(std::pow(10.0, lg_F)))
                                             : "10^" + std::to_string(lg_F)) +
           " exceeds the set cap " + std::to_string(opt.max_set));
  if (lg_lb > std::log10(static_cast<double>(opt.max_radius)))
    refuse("lower bound exceeds max_radius " + std::to_string(opt.max_radius));

  P.v = make_verification_function(G, B);
  const FinSet& V = P.V();
  FinSet B2 = G.set_power(B, 2);
  FinSet B3 = G.set_product(B2, B);
  plan.VB = G.set_product(V, B);
  P.C = G.set_union(B3, G.set_product(plan.VB, B));
  P.K = 0;
  while ((std::size_t{1} << P.K) <= nb) ++P.K;

  FinSet Ainv = G.set_inverse(A);
  auto conjugates = [&](const FinSet& Hp) {
    std::vector<GroupElement> out;
    GroupElement sinv = G.inv(s);
    for (const auto& h : Hp) {
      GroupElement hi = G.inv(h);
      GroupElement c = G.mul(G.mul(h, s), hi);
      if (!G.is_identity(c)) {
        out.push_back(c);
        out.push_back(G.inv(c));
      }
      if (G.abelian()) break;
      (void)sinv;
    }
    return G.make_set(std::move(out));
  };
  auto hprime = [&](const FinSet& F) {
    FinSet Hp = G.set_product(B2, G.set_product(G.set_inverse(F), F));
    return G.set_product(Hp, G.set_power(B, 3 * P.N + 1));
  };

  if (opt.mode == Mode::Faithful) {
    P.r_num = 2 * P.beta + 1;
    P.r_den = 1;
    if (P.r_num > 1000000) refuse("counting lemma ratio r = " + P.r_num.str() + " too large to realize");
    P.counting = counting_lemma(G, B, P.C, P.r_num, P.r_den);
    P.ell = P.counting.n;
    P.kappa_bits = P.ell - 2 * P.K - 2;
    if (P.kappa_bits < 1) throw ConstructionError("plan_step: l too small for kappa coding");
    BigInt bound = 2 * P.beta * BigInt(P.F().size()) * P.F().size();
    P.degree_bound = bound > BigInt(std::numeric_limits<long long>::max())
                         ? std::numeric_limits<long long>::max()
                         : static_cast<long long>(bound);
    plan.Hprime = hprime(P.F());
    plan.conj = conjugates(plan.Hprime);
  } else {
    P.r_num = 1;
    P.r_den = 1;
    int bits = 1;
    for (int iter = 0; iter < 32; ++iter) {
      P.kappa_bits = bits;
      P.ell = 2 * P.K + 2 + bits;
      P.counting = counting_lemma(G, B, P.C, P.r_num, P.r_den, P.ell);
      plan.Hprime = hprime(P.F());
      plan.conj = conjugates(plan.Hprime);
      int need = 1;
      while ((std::size_t{1} << need) < plan.conj.size() + 1) ++need;
      if (need <= bits) break;
      bits = need;
    }
    P.degree_bound = static_cast<long long>(plan.conj.size());
  }
  const FinSet& F = P.F();
  const auto& lam = P.lambda();

  plan.FB = G.set_product(F, B);
  FinSet FF = G.set_product(G.set_inverse(F), F);
  FinSet FFB = G.set_product(FF, B);
  FinSet Bpow = B;
  for (int m = 0; m <= P.N; ++m) {
    plan.H.push_back(G.set_product(Bpow, FFB));
    Bpow = G.set_product(Bpow, B3);
  }
  plan.AL = G.set_product(A, P.counting.Lambda);
  plan.BL = G.set_product(B, P.counting.Lambda);

  // Witness windows in the pattern convention: pattern at g x over T is the
  // pattern at x over g^-1 T.
  plan.T_star = G.set_union(Ainv, G.set_product(Ainv, T_R));
  FinSet Vinv = G.set_inverse(V);
  plan.T_L = G.set_union(Vinv, G.set_product(Vinv, T_R));
  FinSet base = G.set_product(B2, G.set_union(plan.T_star, plan.T_L));
  std::vector<GroupElement> lamK_inv;
  for (int i = 0; i < P.K; ++i) lamK_inv.push_back(G.inv(lam[i]));
  FinSet LKinvT = G.set_product(G.make_set(lamK_inv), plan.T_star);
  FinSet prior;
  for (int m = 0; m <= P.N; ++m) {
    FinSet Tm = base;
    if (m > 0) Tm = G.set_union(Tm, G.set_product(G.set_product(B, plan.H[m]), prior));
    plan.T_Delta_m.push_back(Tm);
    plan.T_D.push_back(G.set_product(B, G.set_union(Tm, LKinvT)));
    prior = G.set_union(prior, plan.T_D.back());
  }
  plan.T_Delta = plan.T_Delta_m[0];
  for (const auto& t : plan.T_Delta_m) plan.T_Delta = G.set_union(plan.T_Delta, t);

  std::vector<GroupElement> code_inv;
  for (int i = 0; i < P.K; ++i) code_inv.push_back(G.inv(lam[P.K + i]));
  FinSet inner = G.set_union(plan.T_Delta, G.set_product(G.make_set(code_inv), plan.T_star));
  plan.T_Rprime = G.set_product(G.right_translate(A, lam[P.ell - 1]), inner);

  FinSet HB = G.set_product(plan.H[P.N], B);
  plan.W_Mprime = G.set_product(G.right_translate(HB, G.inv(lam[P.ell - 2])), Ainv);
  plan.W_Rprime = G.set_product(G.right_translate(HB, G.inv(lam[P.ell - 1])), Ainv);

  FinSet probes = G.set_union(G.set_inverse(plan.T_Delta), plan.AL);
  probes = G.set_union(probes, G.set_product(G.set_inverse(T_R), plan.AL));
  plan.T_block = G.set_inverse(G.set_product(probes, plan.Hprime));

  int radA = G.radius(A), radB = G.radius(B), radVB = G.radius(plan.VB), radAL = G.radius(plan.AL);
  int layers = 0;
  for (int m = 1; m <= P.N; ++m) layers += G.radius(plan.H[m]);
  plan.shrink = {{"counting function", radA},
                 {"layers", layers},
                 {"phi1", 2 * radB},
                 {"phi2", 2 * radVB},
                 {"phi3", radVB},
                 {"pairing", 2 * radB + G.radius(G.set_union(A, V))},
                 {"phi4", 2 * radAL},
                 {"phi5", 2 * radAL},
                 {"phi6", 2 * radAL},
                 {"phi'", 2 * radAL}};
  int margin = std::max({G.radius(plan.T_block) + G.length(s), G.radius(plan.T_Delta), G.radius(plan.T_Rprime),
                         G.radius(plan.W_Mprime), G.radius(plan.W_Rprime), G.radius(F) + radB + radA,
                         G.radius(plan.W_Rprime) + G.radius(plan.T_Rprime)});
  for (const auto& t : plan.T_D) margin = std::max(margin, G.radius(t));
  plan.core_margin = margin;
  plan.shrink.emplace_back("witness reach", margin);
  plan.total_shrink = 0;
  for (const auto& [name, r] : plan.shrink) plan.total_shrink += r;

  long long need = static_cast<long long>(plan.total_shrink) + min_core;
  if (need > opt.max_radius) {
    Requirement req = Requirement::exactly(need, "exceeds max_radius");
    throw WindowExhausted("step requires input radius " + req.text() + " above max_radius " +
                              std::to_string(opt.max_radius),
                          req.text());
  }
  return plan;
}

int required_input_radius(const StepPlan& plan, int min_core) { return plan.total_shrink + min_core; }

}  // namespace orbitforge
