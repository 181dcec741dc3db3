#include "orbitforge/certification.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "orbitforge/errors.hpp"

namespace orbitforge {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

std::vector<Index> core_points(const Window& w, int core) {
  Index n = w.ball_count(std::max(0, std::min(core, w.radius())));
  std::vector<Index> pts(static_cast<std::size_t>(n));
  for (Index x = 0; x < n; ++x) pts[x] = x;
  return pts;
}

std::vector<Window::Offset> inverse_offsets(const Window& w, const FinSet& T) {
  std::vector<Window::Offset> out;
  out.reserve(T.size());
  for (const auto& t : T) out.push_back(w.offset(w.group().inv(t)));
  return out;
}

std::string name_of(const Window& w, Index x) { return w.group().format(w.element(x)); }

Verification exhausted_result(std::string claim, const Window& w, Index x, int scope) {
  Verification v;
  v.claim = std::move(claim);
  v.verdict = Verdict::Inconclusive;
  v.scope = scope;
  v.detail = "window exhausted at " + name_of(w, x);
  return v;
}

// Recognizability on an explicit point list.
Verification recognizable_on(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T,
                             const std::vector<Index>& pts, int scope) {
  Verification out;
  out.claim = "recognizable";
  out.scope = scope;
  PatternClasses pc(cfg, T, pts);
  if (pc.exhausted()) return exhausted_result(out.claim, cfg.window(), pc.exhausted_point(), scope);
  std::vector<Index> rep_in(pc.num_classes(), -1), rep_out(pc.num_classes(), -1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int c = pc.class_of(i);
    auto& rep = member[pts[i]] ? rep_in : rep_out;
    if (rep[c] < 0) rep[c] = pts[i];
  }
  std::vector<int> ins, outs;
  for (int c = 0; c < static_cast<int>(pc.num_classes()); ++c) {
    if (rep_in[c] >= 0) ins.push_back(c);
    if (rep_out[c] >= 0) outs.push_back(c);
  }
  out.points_checked = static_cast<std::int64_t>(pts.size());
  for (int a : ins)
    for (int b : outs)
      if (!pc.incompatible(a, b)) {
        ++out.failures;
        if (out.counterexample.empty())
          out.counterexample = "in " + name_of(cfg.window(), rep_in[a]) + " vs out " + name_of(cfg.window(), rep_out[b]);
      }
  out.verdict = out.failures ? Verdict::Fail : Verdict::Pass;
  out.detail = std::to_string(ins.size()) + " inside classes, " + std::to_string(outs.size()) + " outside classes";
  return out;
}

std::vector<int> pattern_vector(const PatternClasses& pc, int cls) {
  std::vector<int> v(pc.width());
  for (std::size_t k = 0; k < pc.width(); ++k) v[k] = pc.value(cls, k);
  return v;
}

}  // namespace

PatternClasses::PatternClasses(const WindowConfig& cfg, const FinSet& T, const std::vector<Index>& points)
    : width_(T.size()), words_((T.size() + 63) / 64) {
  const Window& w = cfg.window();
  auto offs = inverse_offsets(w, T);
  std::unordered_map<std::string, int> seen;
  std::vector<std::uint64_t> key(2 * words_);
  class_of_.reserve(points.size());
  for (Index x : points) {
    std::fill(key.begin(), key.end(), 0);
    for (std::size_t k = 0; k < offs.size(); ++k) {
      Index y = w.mul(offs[k], x);
      if (y < 0) {
        exhausted_point_ = x;
        return;
      }
      Label l = cfg.label(y);
      if (l == Label::Undefined) continue;
      key[k / 64] |= std::uint64_t{1} << (k % 64);
      if (l == Label::One) key[words_ + k / 64] |= std::uint64_t{1} << (k % 64);
    }
    std::string id(reinterpret_cast<const char*>(key.data()), key.size() * sizeof(std::uint64_t));
    auto [it, fresh] = seen.emplace(std::move(id), static_cast<int>(ids_.size()));
    if (fresh) {
      ids_.push_back(it->first);
      bits_.insert(bits_.end(), key.begin(), key.end());
    }
    class_of_.push_back(it->second);
  }
}

bool PatternClasses::incompatible(int a, int b) const {
  const std::uint64_t* pa = &bits_[static_cast<std::size_t>(a) * 2 * words_];
  const std::uint64_t* pb = &bits_[static_cast<std::size_t>(b) * 2 * words_];
  for (std::size_t i = 0; i < words_; ++i)
    if (pa[i] & pb[i] & (pa[words_ + i] ^ pb[words_ + i])) return true;
  return false;
}

int PatternClasses::value(int cls, std::size_t k) const {
  const std::uint64_t* p = &bits_[static_cast<std::size_t>(cls) * 2 * words_];
  if (!((p[k / 64] >> (k % 64)) & 1)) return -1;
  return static_cast<int>((p[words_ + k / 64] >> (k % 64)) & 1);
}

Verification verify_syndetic(const Window& w, const std::vector<char>& member, const FinSet& F, int core) {
  Verification out;
  out.claim = "syndetic";
  out.scope = core;
  auto offs = inverse_offsets(w, F);
  bool inconclusive = false;
  for (Index x : core_points(w, core)) {
    ++out.points_checked;
    bool hit = false, outside = false;
    for (const auto& o : offs) {
      Index m = w.mul(o, x);
      if (m < 0)
        outside = true;
      else if (member[m]) {
        hit = true;
        break;
      }
    }
    if (hit) continue;
    if (outside) {
      inconclusive = true;
      continue;
    }
    if (!out.failures) out.counterexample = name_of(w, x);
    ++out.failures;
  }
  out.verdict = out.failures ? Verdict::Fail : inconclusive ? Verdict::Inconclusive : Verdict::Pass;
  return out;
}

Verification verify_recognizable(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T,
                                 int core) {
  return recognizable_on(cfg, member, T, core_points(cfg.window(), core), core);
}

Verification verify_recognizable(const WindowConfig& cfg, const Tag& tag, const FinSet& T, int core) {
  std::vector<char> member(cfg.size(), 0);
  for (Index x = 0; x < cfg.size(); ++x) member[x] = cfg.has_tag(x, tag) ? 1 : 0;
  Verification v = verify_recognizable(cfg, member, T, core);
  v.claim = "recognizable " + tag.name();
  return v;
}

namespace {

std::string pattern_string(const PatternClasses& pc, int cls) {
  std::string s(pc.width(), 'u');
  for (std::size_t k = 0; k < pc.width(); ++k) {
    int v = pc.value(cls, k);
    if (v >= 0) s[k] = static_cast<char>('0' + v);
  }
  return s;
}

}  // namespace

std::optional<PatternTable> pattern_table(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T,
                                          int core) {
  std::vector<Index> pts = core_points(cfg.window(), core);
  PatternClasses pc(cfg, T, pts);
  if (pc.exhausted()) return std::nullopt;
  std::set<std::string> in, out;
  std::vector<char> seen_in(pc.num_classes(), 0), seen_out(pc.num_classes(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int c = pc.class_of(i);
    auto& seen = member[pts[i]] ? seen_in : seen_out;
    if (seen[c]) continue;
    seen[c] = 1;
    (member[pts[i]] ? in : out).insert(pattern_string(pc, c));
  }
  return PatternTable{{in.begin(), in.end()}, {out.begin(), out.end()}};
}

Verification check_pattern_table(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T, int core,
                                 const PatternTable& table) {
  Verification out;
  out.claim = "pattern table";
  out.scope = core;
  std::vector<Index> pts = core_points(cfg.window(), core);
  PatternClasses pc(cfg, T, pts);
  if (pc.exhausted()) return exhausted_result(out.claim, cfg.window(), pc.exhausted_point(), core);
  std::set<std::string> in(table.inside.begin(), table.inside.end()), outs(table.outside.begin(), table.outside.end());
  std::vector<std::string> names(pc.num_classes());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ++out.points_checked;
    std::string& p = names[pc.class_of(i)];
    if (p.empty()) p = pattern_string(pc, pc.class_of(i));
    if ((member[pts[i]] ? in : outs).count(p)) continue;
    if (!out.failures) out.counterexample = name_of(cfg.window(), pts[i]);
    ++out.failures;
  }
  out.verdict = out.failures ? Verdict::Fail : Verdict::Pass;
  out.detail = std::to_string(out.failures) + " points with an uncertified pattern";
  return out;
}

std::optional<FinSet> find_min_witness(const WindowConfig& cfg, const std::vector<char>& member, int r_max, int core,
                                       std::int64_t max_points) {
  const GroupContext& G = cfg.group();
  std::vector<Index> pts = core_points(cfg.window(), core);
  if (max_points > 0 && static_cast<std::int64_t>(pts.size()) > max_points) {
    std::size_t stride = (pts.size() + max_points - 1) / max_points;
    std::vector<Index> sample;
    for (std::size_t i = 0; i < pts.size(); i += stride) sample.push_back(pts[i]);
    pts = std::move(sample);
  }
  r_max = std::min(r_max, cfg.radius() - core);
  if (r_max < 0) return std::nullopt;
  auto passes = [&](const FinSet& T) { return recognizable_on(cfg, member, T, pts, core).pass(); };
  if (!passes(G.ball(r_max))) return std::nullopt;
  int lo = 0, hi = r_max;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (passes(G.ball(mid)))
      hi = mid;
    else
      lo = mid + 1;
  }
  std::vector<GroupElement> keep = G.ball(lo).elements();
  for (std::size_t i = keep.size(); i-- > 0;) {
    std::vector<GroupElement> trial = keep;
    trial.erase(trial.begin() + static_cast<long>(i));
    if (!trial.empty() && passes(G.make_set(trial))) keep = std::move(trial);
  }
  return G.make_set(keep);
}

Verification verify_blocking(const WindowConfig& cfg, const GroupElement& s, const FinSet& T, int core) {
  const Window& w = cfg.window();
  Verification out;
  out.claim = "blocking " + w.group().format(s);
  out.scope = core;
  auto offs = inverse_offsets(w, T);
  auto so = w.offset(s);
  std::int64_t undecided = 0;
  std::string first_undecided;
  for (Index x : core_points(w, core)) {
    ++out.points_checked;
    Index sx = w.mul(so, x);
    bool blocked = false, outside = sx < 0;
    if (sx >= 0)
      for (const auto& o : offs) {
        Index a = w.mul(o, x), b = w.mul(o, sx);
        if (a < 0 || b < 0) {
          outside = true;
          continue;
        }
        Label la = cfg.label(a), lb = cfg.label(b);
        if (la != Label::Undefined && lb != Label::Undefined && la != lb) {
          blocked = true;
          break;
        }
      }
    if (blocked) continue;
    if (outside) {
      if (!undecided) first_undecided = name_of(w, x);
      ++undecided;
      continue;
    }
    if (!out.failures) out.counterexample = name_of(w, x);
    ++out.failures;
  }
  if (out.failures)
    out.verdict = Verdict::Fail;
  else if (undecided) {
    out.verdict = Verdict::Inconclusive;
    out.detail = std::to_string(undecided) + " points undecided, first " + first_undecided;
  }
  return out;
}

std::optional<FinSet> find_blocking_witness(const WindowConfig& cfg, const GroupElement& s, int r_max, int core) {
  for (int r = 0; r <= r_max; ++r) {
    Verification v = verify_blocking(cfg, s, cfg.group().ball(r), core);
    if (v.pass()) return cfg.group().ball(r);
  }
  return std::nullopt;
}

SeparationWitness verify_separation(const WindowConfig& cfg_w, const WindowConfig& cfg_z, const std::vector<int>& w,
                                    const std::vector<int>& z, const FinSet& S, const FinSet& T, int core) {
  const GroupContext& G = cfg_w.group();
  SeparationWitness out;
  out.window = G.set_union(S, G.set_product(S, T));
  out.w = w;
  out.z = z;
  out.scope = core;
  out.result.claim = "separation";
  out.result.scope = core;
  int levels = std::max(cfg_w.max_r_level(), cfg_z.max_r_level());
  bool separated = false;
  for (int k = 0; k < levels; ++k) {
    int a = k < static_cast<int>(w.size()) ? w[k] : -1;
    int b = k < static_cast<int>(z.size()) ? z[k] : -1;
    if (a >= 0 && b >= 0 && a != b) separated = true;
  }
  if (!separated) {
    out.result.verdict = Verdict::Inconclusive;
    out.result.detail = "no separating bit among constructed levels";
    return out;
  }
  auto pts = core_points(cfg_w.window(), core);
  PatternClasses pw(cfg_w, out.window, pts), pz(cfg_z, out.window, pts);
  if (pw.exhausted()) {
    out.result = exhausted_result("separation", cfg_w.window(), pw.exhausted_point(), core);
    return out;
  }
  if (pz.exhausted()) {
    out.result = exhausted_result("separation", cfg_z.window(), pz.exhausted_point(), core);
    return out;
  }
  auto key = [](const PatternClasses& pc, int c) {
    std::string k;
    for (std::size_t i = 0; i < pc.width(); ++i) k.push_back(static_cast<char>('0' + pc.value(c, i) + 1));
    return k;
  };
  std::unordered_map<std::string, Index> wkeys;
  std::vector<Index> rep(pw.num_classes(), -1);
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (rep[pw.class_of(i)] < 0) rep[pw.class_of(i)] = pts[i];
  for (int c = 0; c < static_cast<int>(pw.num_classes()); ++c) wkeys.emplace(key(pw, c), rep[c]);
  std::vector<char> done(pz.num_classes(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int c = pz.class_of(i);
    if (done[c]) continue;
    done[c] = 1;
    if (auto it = wkeys.find(key(pz, c)); it != wkeys.end()) {
      ++out.shared;
      if (out.result.counterexample.empty())
        out.result.counterexample =
            "w at " + name_of(cfg_w.window(), it->second) + " equals z at " + name_of(cfg_z.window(), pts[i]);
    }
  }
  out.classes_w = pw.num_classes();
  out.classes_z = pz.num_classes();
  out.result.points_checked = static_cast<std::int64_t>(2 * pts.size());
  out.result.failures = static_cast<std::int64_t>(out.shared);
  out.result.verdict = out.shared ? Verdict::Fail : Verdict::Pass;
  out.result.detail = std::to_string(out.classes_w) + " and " + std::to_string(out.classes_z) + " classes";
  return out;
}

Cylinder clopen_extract(const WindowConfig& cfg, const std::vector<char>& member, const FinSet& T, int core) {
  Cylinder out;
  out.T = T;
  out.equivalence.claim = "cylinder equivalence";
  out.equivalence.scope = core;
  auto pts = core_points(cfg.window(), core);
  PatternClasses pc(cfg, T, pts);
  if (pc.exhausted()) {
    out.equivalence = exhausted_result("cylinder equivalence", cfg.window(), pc.exhausted_point(), core);
    return out;
  }
  std::vector<char> listed(pc.num_classes(), 0);
  std::vector<int> list;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int c = pc.class_of(i);
    if (member[pts[i]] && !listed[c]) {
      listed[c] = 1;
      list.push_back(c);
      out.patterns.push_back(pattern_vector(pc, c));
    }
  }
  // A class is in the cylinder iff it is compatible with some listed pattern.
  std::vector<char> inside(pc.num_classes(), 0);
  for (int c = 0; c < static_cast<int>(pc.num_classes()); ++c)
    for (int l : list)
      if (!pc.incompatible(c, l)) {
        inside[c] = 1;
        break;
      }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ++out.equivalence.points_checked;
    if (static_cast<bool>(inside[pc.class_of(i)]) != static_cast<bool>(member[pts[i]])) {
      if (!out.equivalence.failures) out.equivalence.counterexample = name_of(cfg.window(), pts[i]);
      ++out.equivalence.failures;
    }
  }
  out.equivalence.verdict = out.equivalence.failures ? Verdict::Fail : Verdict::Pass;
  out.equivalence.detail = std::to_string(list.size()) + " cylinder patterns";
  return out;
}

ClosureReport algebra_closure_check(const WindowConfig& cfg, const std::vector<char>& m1, const std::vector<char>& m2,
                                    const FinSet& T1, const FinSet& T2, const GroupElement& g, int core, int r_max) {
  const GroupContext& G = cfg.group();
  const Window& w = cfg.window();
  ClosureReport out;

  std::vector<char> comp(m1.size());
  for (std::size_t i = 0; i < m1.size(); ++i) comp[i] = !m1[i];
  out.complement = verify_recognizable(cfg, comp, T1, core);
  out.complement.claim = "complement";

  std::vector<char> uni(m1.size());
  for (std::size_t i = 0; i < m1.size(); ++i) uni[i] = m1[i] || m2[i];
  FinSet base = G.set_union(T1, T2);
  out.set_union.claim = "union";
  out.set_union.verdict = Verdict::Inconclusive;
  out.set_union.detail = "no window found up to radius " + std::to_string(r_max);
  for (int r = -1; r <= r_max; ++r) {
    FinSet T = r < 0 ? base : G.set_union(base, G.ball(r));
    Verification v = verify_recognizable(cfg, uni, T, core);
    if (v.verdict == Verdict::Inconclusive) break;
    if (v.pass()) {
      out.set_union = v;
      out.set_union.claim = "union";
      out.union_window = T;
      break;
    }
  }

  // x in gR iff g^-1 x in R; the pattern at g^-1 x over T is the pattern at x over gT.
  std::vector<char> moved(m1.size(), 0);
  auto ginv = w.offset(G.inv(g));
  for (Index x = 0; x < w.size(); ++x) {
    Index y = w.mul(ginv, x);
    moved[x] = y >= 0 && m1[y];
  }
  out.translate_window = G.translate(g, T1);
  int tcore = core - G.length(g);
  out.translate = verify_recognizable(cfg, moved, out.translate_window, tcore);
  out.translate.claim = "translate " + G.format(g);
  return out;
}

PullbackResult pullback_coloring(const WindowConfig& cfg, const FinSet& W,
                                 const std::function<int(const std::vector<int>&)>& image_coloring,
                                 const FinSet& S_edges, int core) {
  const GroupContext& G = cfg.group();
  const Window& w = cfg.window();
  PullbackResult out;
  out.result.claim = "pullback coloring";
  out.result.scope = core;
  auto pts = core_points(w, core);
  PatternClasses pc(cfg, W, pts);
  if (pc.exhausted()) {
    out.result = exhausted_result("pullback coloring", w, pc.exhausted_point(), core);
    return out;
  }
  std::vector<int> class_color(pc.num_classes());
  for (int c = 0; c < static_cast<int>(pc.num_classes()); ++c) class_color[c] = image_coloring(pattern_vector(pc, c));
  out.colors.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out.colors[i] = class_color[pc.class_of(i)];
  FinSet edges = G.set_union(S_edges, G.set_inverse(S_edges));
  std::vector<Window::Offset> offs;
  for (const auto& s : edges)
    if (!G.is_identity(s)) offs.push_back(w.offset(s));
  Index n = static_cast<Index>(pts.size());
  for (Index x = 0; x < n; ++x) {
    ++out.result.points_checked;
    for (const auto& o : offs) {
      Index y = w.mul(o, x);
      if (y < 0 || y >= n) continue;
      if (out.colors[x] == out.colors[y]) {
        if (!out.result.failures) out.result.counterexample = name_of(w, x) + " -- " + name_of(w, y);
        ++out.result.failures;
      }
    }
  }
  out.result.verdict = out.result.failures ? Verdict::Fail : Verdict::Pass;
  return out;
}

double binary_entropy(double p) {
  auto term = [](double q) { return q <= 0 ? 0.0 : -q * std::log(q); };
  return term(p) + term(1 - p);
}

EntropyReport entropy_report(const WindowConfig& cfg) {
  EntropyReport out;
  Index n = cfg.core_count();
  for (Index x = 0; x < n; ++x) {
    Label l = cfg.label(x);
    if (l == Label::Undefined)
      throw ArgumentError("entropy_report: core point " + name_of(cfg.window(), x) + " is unlabeled");
    out.ones += l == Label::One ? 1 : 0;
  }
  out.total = n;
  out.p = Rational(out.ones, out.total);
  out.H = binary_entropy(static_cast<double>(out.ones) / static_cast<double>(out.total));
  return out;
}

}  // namespace orbitforge
