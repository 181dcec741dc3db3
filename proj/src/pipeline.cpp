#include <algorithm>
#include <cmath>
#include <memory>

#include "orbitforge/construction.hpp"
#include "orbitforge/errors.hpp"

namespace orbitforge {

bool PipelineState::pass() const {
  if (refusal) return false;
  for (const auto& s : steps)
    if (!s.pass()) return false;
  for (const auto& c : chain_checks)
    if (!c.pass) return false;
  return true;
}

namespace {

std::vector<int> cyclic_core(const GroupContext& G, const GroupElement& g) {
  std::vector<int> w = G.word(g);
  std::size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && w[lo] == GroupContext::inverse_letter(w[hi - 1])) {
    ++lo;
    --hi;
  }
  return std::vector<int>(w.begin() + static_cast<long>(lo), w.begin() + static_cast<long>(hi));
}

Mode step_mode(const PipelineOptions& opt, int step) {
  if (step >= 2 && opt.mode == Mode::Faithful && opt.tighten_later) return opt.later_mode;
  return opt.mode;
}

struct Runner {
  const GroupContext& G;
  const Seed& seed;
  const PipelineOptions& opt;
  std::vector<GroupElement> s;

  WindowConfig initial(const WindowPtr& w) const {
    WindowConfig cfg(w, w->radius());
    std::vector<Label> labels(static_cast<std::size_t>(w->size()), Label::Undefined);
    for (Index x = 0; x < w->size(); ++x) {
      GroupElement g = w->element(x);
      if (seed.Y && seed.Y(g)) {
        cfg.add_tag(x, Tag{Tag::Kind::Y, 0, 0});
        labels[x] = label_of_bit(seed.phi0 ? seed.phi0(g) : 0);
      } else {
        cfg.add_tag(x, Tag{Tag::Kind::M, 0, 0});
      }
    }
    cfg.set_labels(std::move(labels));
    return cfg;
  }

  std::vector<char> members(const WindowConfig& cfg, const Tag& t) const {
    std::vector<char> m(static_cast<std::size_t>(cfg.size()), 0);
    for (Index x = 0; x < cfg.size(); ++x) m[x] = cfg.has_tag(x, t);
    return m;
  }

  SyndeticWitness seed_witness(const PipelineState& st) const {
    const Window& w = *st.window;
    auto inM = members(st.initial, Tag{Tag::Kind::M, 0, 0});
    if (seed.M_witness) {
      int scope = std::max(0, w.radius() - G.radius(*seed.M_witness));
      bool ok = first_uncovered(w, inM, *seed.M_witness, scope) < 0;
      return SyndeticWitness{*seed.M_witness, "M0", scope, ok};
    }
    int r_max = std::max(0, std::min(256, w.radius() / 2));
    auto found = complement_witness(w, inM, w.radius() - r_max, r_max);
    if (!found) throw WindowExhausted("no syndetic witness for X minus Y within radius " + std::to_string(r_max));
    return *found;
  }

  StepInput input_for(const PipelineState& st, int k) const {
    StepInput in{k == 1 ? st.initial : st.current, k, {}, {}, s[k - 1], step_mode(opt, k), 0, 1, {}, {}};
    in.options.mode = in.mode;
    in.options.max_set = opt.max_set;
    in.options.max_radius = opt.max_radius;
    if (k == 1) {
      in.M_witness = seed_witness(st);
      in.valid = st.radius;
    } else {
      const StepResult& prev = st.steps.back();
      in.M_witness = prev.M_witness;
      in.valid = prev.valid_after;
      FinSet TR;
      for (const auto& step : st.steps) TR = G.set_union(TR, step.plan.T_Rprime);
      in.T_R = TR;
    }
    in.min_core = k == opt.steps ? opt.min_core : 1;
    return in;
  }

  void chain(PipelineState& st, const WindowConfig& before, const WindowConfig& after, int k) const {
    const Index n = after.size();
    std::int64_t r_overlap = 0, m_grow = 0, phi_change = 0;
    for (Index x = 0; x < n; ++x) {
      const auto& t = after.tags(x);
      unsigned rk = t.r & (1u << k);
      if (rk && (t.r & ((1u << k) - 1u))) ++r_overlap;
      if (((t.m >> k) & 1) && !((t.m >> (k - 1)) & 1)) ++m_grow;
      if (before.label(x) != Label::Undefined && before.label(x) != after.label(x)) ++phi_change;
    }
    std::string stage = "step " + std::to_string(k);
    st.chain_checks.push_back({stage, "R_k disjoint from earlier R_j", r_overlap == 0, n, {}});
    st.chain_checks.push_back({stage, "M_k contained in M_(k-1)", m_grow == 0, n, {}});
    st.chain_checks.push_back({stage, "phi_k extends phi_(k-1)", phi_change == 0, n, {}});
  }

  // Runs steps 1..upto on a ball of the given radius.
  PipelineState run(int radius, int upto) const {
    PipelineState st;
    st.group = G;
    st.first_mode = step_mode(opt, 1);
    st.later_mode = step_mode(opt, 2);
    st.window = std::make_shared<const Window>(G, radius);
    st.radius = radius;
    st.s = s;
    st.initial = initial(st.window);
    st.current = st.initial;
    st.core = radius;
    for (int k = 1; k <= upto; ++k) {
      try {
        StepInput in = input_for(st, k);
        StepResult r = ind_step(in);
        chain(st, st.current, r.cfg, k);
        st.current = r.cfg;
        st.core = r.core;
        st.planned.emplace_back(k, Requirement::exactly(required_input_radius(r.plan, in.min_core)));
        st.steps.push_back(std::move(r));
      } catch (const WindowExhausted& e) {
        int used = k == 1 ? 0 : radius - st.steps.back().valid_after;
        Requirement req;
        if (e.required_radius().empty()) {
          req = Requirement::exactly(radius + 1, e.what());
        } else {
          Requirement step_req = Requirement::parse(e.required_radius(), e.what());
          if (step_req.exact) {
            req = Requirement::exactly(step_req.radius + used, e.what());
          } else {
            req = step_req;
          }
        }
        st.refusal = Refusal{k, req, e.what()};
        return st;
      } catch (const ConstructionError& e) {
        throw ConstructionError("step " + std::to_string(k) + ": " + e.what());
      }
    }
    return st;
  }
};

}  // namespace

bool conjugate(const GroupContext& G, const GroupElement& a, const GroupElement& b) {
  if (G.abelian()) return a == b;
  auto x = cyclic_core(G, a), y = cyclic_core(G, b);
  if (x.size() != y.size()) return false;
  if (x.empty()) return true;
  std::vector<int> xx(x);
  xx.insert(xx.end(), x.begin(), x.end());
  return std::search(xx.begin(), xx.end(), y.begin(), y.end()) != xx.end();
}

std::vector<GroupElement> blocking_sequence(const GroupContext& G, int n) {
  std::vector<GroupElement> out;
  if (n <= 0) return out;
  G.for_each_shortlex(std::numeric_limits<int>::max(), [&](const GroupElement& g) {
    if (G.is_identity(g)) return true;
    GroupElement gi = G.inv(g);
    for (const auto& s : out)
      if (conjugate(G, g, s) || conjugate(G, gi, s)) return true;
    out.push_back(g);
    return static_cast<int>(out.size()) < n;
  });
  return out;
}

std::optional<SyndeticWitness> complement_witness(const Window& w, const std::vector<char>& inM, int scope, int r_max) {
  const GroupContext& G = w.group();
  scope = std::max(0, scope);
  for (int r = 0; r <= r_max; ++r) {
    FinSet F = G.ball(r);
    if (first_uncovered(w, inM, F, scope) < 0) return SyndeticWitness{F, "M0", scope, true};
  }
  return std::nullopt;
}

PipelineState pipeline(const GroupContext& G, const Seed& seed, const PipelineOptions& opt) {
  if (opt.steps < 0) throw ArgumentError("pipeline: negative step count");
  Runner run{G, seed, opt, blocking_sequence(G, opt.steps)};
  if (opt.radius) return run.run(*opt.radius, opt.steps);
  if (opt.steps == 0) return run.run(std::max(1, opt.min_core), 0);

  // Plan each step on a state just large enough to choose its A.
  int radius = std::max(256, opt.min_core / 4);
  for (int k = 1; k <= opt.steps; ++k) {
    PipelineState st = run.run(radius, k - 1);
    if (st.refusal) return st;
    StepInput in = run.input_for(st, k);
    std::vector<char> inM(static_cast<std::size_t>(in.cfg.size()), 0);
    for (Index x = 0; x < in.cfg.size(); ++x) inM[x] = in.cfg.has_tag(x, Tag{Tag::Kind::M, k - 1, 0});
    FinSet A = select_A(*st.window, inM, in.M_witness, in.mode, in.valid);
    int need;
    try {
      StepPlan plan = plan_step(G, A, in.s, in.T_R, in.options, 0);
      int next_core = opt.min_core;
      if (k < opt.steps) {
        SyndeticWitness nw{plan.W_Mprime, "M", 0, false};
        next_core = std::max(opt.min_core, 4 * G.radius(choose_A(G, nw)) + 64);
      }
      need = plan.total_shrink + next_core;
    } catch (const WindowExhausted& e) {
      Requirement req = Requirement::parse(e.required_radius(), e.what());
      if (req.exact) req = Requirement::exactly(req.radius + (radius - in.valid), e.what());
      st.refusal = Refusal{k, req, e.what()};
      st.planned.emplace_back(k, req);
      return st;
    }
    long long total = static_cast<long long>(radius - in.valid) + need;
    if (total > opt.max_radius) {
      Requirement req = Requirement::exactly(total, "exceeds max_radius");
      st.refusal = Refusal{k, req, "step " + std::to_string(k) + " requires radius " + req.text() +
                                        " above max_radius " + std::to_string(opt.max_radius)};
      st.planned.emplace_back(k, req);
      return st;
    }
    radius = static_cast<int>(total);
  }
  PipelineState st = run.run(radius, opt.steps);
  for (int attempt = 0; attempt < 4 && st.refusal && st.refusal->required.exact; ++attempt) {
    long long want = st.refusal->required.radius;
    if (want <= radius || want > opt.max_radius) break;
    radius = static_cast<int>(want);
    st = run.run(radius, opt.steps);
  }
  return st;
}

FamilyResult family_builder(const PipelineState& state, const std::vector<std::vector<int>>& bit_sequences) {
  FamilyResult out;
  out.bits = bit_sequences;
  const WindowConfig& cfg = state.current;
  const int levels = std::max(0, cfg.max_r_level());
  const Index nc = cfg.core_count();
  Verification& v = out.finite_bits;
  v.claim = "f_w depends only on bits of constructed R levels";
  v.scope = cfg.core_radius();
  for (const auto& bits : bit_sequences) {
    WindowConfig painted = paint_family(cfg, bits);
    for (std::size_t b = 0; b < bits.size(); ++b) {
      std::vector<int> flipped = bits;
      flipped[b] ^= 1;
      WindowConfig other = paint_family(cfg, flipped);
      const int level = static_cast<int>(b) + 1;
      for (Index x = 0; x < nc; ++x) {
        ++v.points_checked;
        bool differs = painted.label(x) != other.label(x);
        bool expect = level <= levels && cfg.has_tag(x, Tag{Tag::Kind::R, level, 0});
        if (differs != expect) {
          if (!v.failures)
            v.counterexample = "bit " + std::to_string(b) + " at " + cfg.group().format(cfg.window().element(x));
          ++v.failures;
        }
      }
    }
    out.configs.push_back(std::move(painted));
  }
  v.verdict = v.failures ? Verdict::Fail : Verdict::Pass;
  v.detail = std::to_string(levels) + " R levels";
  return out;
}

ApproximationResult approximate_with_free_map(const GroupContext& G,
                                              const std::function<bool(const GroupElement&)>& B_tags,
                                              Rational epsilon, int density_radius, const PipelineOptions& opt) {
  if (G.kind() != GroupKind::Lattice) throw ArgumentError("approximation needs a lattice group");
  if (epsilon <= Rational(0) || epsilon > Rational(1)) throw ArgumentError("epsilon must lie in (0, 1]");
  ApproximationResult out;
  auto dw = std::make_shared<const Window>(G, density_radius);
  out.M = small_density_syndetic(*dw, epsilon, density_radius);
  out.density_ok = out.M.density < epsilon;
  auto inM = std::make_shared<std::vector<char>>(membership(*dw, out.M.M));
  Seed seed;
  seed.Y = [dw, inM](const GroupElement& g) {
    Index x = dw->index_of(g);
    return x < 0 || !(*inM)[x];
  };
  seed.phi0 = [&B_tags](const GroupElement& g) { return B_tags && B_tags(g) ? 1 : 0; };
  seed.M_witness = out.M.witness.F;
  PipelineOptions o = opt;
  o.max_radius = std::min<long long>(opt.max_radius, density_radius);
  out.state = pipeline(G, seed, o);
  if (out.state.refusal || out.state.steps.empty()) return out;
  std::vector<int> zeros(static_cast<std::size_t>(std::max(1, out.state.current.max_r_level())), 0);
  WindowConfig painted = paint_family(out.state.current, zeros);
  const Window& w = painted.window();
  std::vector<char> diff(static_cast<std::size_t>(w.size()), 0);
  const Index nc = painted.core_count();
  for (Index x = 0; x < nc; ++x) {
    bool in_A = painted.label(x) == Label::One;
    bool in_B = B_tags && B_tags(w.element(x));
    diff[x] = in_A != in_B;
  }
  out.core_points = nc;
  out.symmetric_difference = empirical_density(w, diff, painted.core_radius());
  out.output = std::move(painted);
  return out;
}

}  // namespace orbitforge
