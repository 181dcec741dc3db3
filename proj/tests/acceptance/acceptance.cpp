// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failing criteria (capped at 100).

#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "orbitforge/cli.hpp"

using namespace orbitforge;
namespace fs = std::filesystem;
using boost::multiprecision::cpp_int;

namespace {

// Pinned tolerances and sizes.
constexpr int kFlagshipCore = 100000;
constexpr long long kRadiusCap = 10000000;
constexpr std::int64_t kMinSampled = 10000;
constexpr int kNegativeControlRadius = 50;
constexpr int kDensityRadius = 1000000;
const Rational kEntropyEpsilon{1, 10};
const Rational kEntropyDensity{1, 100};
constexpr double kEntropyBound = 0.0561;
const Rational kApproxEpsilon{1, 20};
constexpr std::size_t kMeasureActions = 120;

int failures = 0;

void report(int n, bool pass, const std::string& what, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  " << what;
  if (!detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << std::endl;
  failures += !pass;
}

const GroupContext Z = GroupContext::lattice(1);

PipelineOptions flagship_options(Mode mode, int steps) {
  PipelineOptions o;
  o.mode = mode;
  o.steps = steps;
  o.min_core = kFlagshipCore;
  o.max_radius = kRadiusCap;
  return o;
}

std::vector<char> tag_member(const WindowConfig& cfg, const Tag& t) {
  std::vector<char> m(static_cast<std::size_t>(cfg.size()));
  for (Index x = 0; x < cfg.size(); ++x) m[x] = cfg.has_tag(x, t);
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Least K with 2^K > b.
int oracle_K(std::size_t b) {
  int K = 0;
  while ((std::size_t{1} << K) <= b) ++K;
  return K;
}

cpp_int pow_big(std::size_t base, int e) {
  cpp_int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void criterion1(const PipelineState& st) {
  bool ok = !st.refusal && st.steps.size() == 1;
  std::string detail = "radius " + std::to_string(st.radius) + ", core " + std::to_string(st.core);
  if (ok) {
    const StepResult& r = st.steps[0];
    for (const auto& v : r.verifications) {
      bool core_claim = v.claim.rfind("(i", 0) == 0;
      if (core_claim && (!v.pass() || v.failures != 0)) {
        ok = false;
        detail += "; " + v.claim + " " + to_string(v.verdict);
      }
    }
    int blocking = 0;
    for (const auto& v : r.verifications)
      if (v.claim.rfind("(iv)", 0) == 0) {
        ++blocking;
        ok = ok && v.verdict == Verdict::Pass && v.failures == 0 && v.points_checked > 0;
      }
    ok = ok && blocking == 2 && st.core >= kFlagshipCore && r.pass();
  } else if (st.refusal) {
    detail += "; refused: " + st.refusal->reason;
  }
  report(1, ok, "flagship step on Z: (i)-(iv) verified exhaustively on the core", detail);
}

void criterion2(const PipelineState& st) {
  if (st.steps.empty()) return report(2, false, "parameter inequalities", "no step");
  const StepParameters& P = st.steps[0].plan.params;
  bool ok = true;
  std::string bad;
  for (const auto& c : check_parameters(Z, P))
    if (!c.pass) {
      ok = false;
      bad += c.name + "; ";
    }
  // Independent recomputation of the headline inequalities.
  const std::size_t b = P.B.size(), f = P.F().size();
  ok = ok && P.K == oracle_K(b);
  cpp_int beta = pow_big(b, 3 * P.N + 3);
  ok = ok && beta == P.beta;
  // l - 2K - 2 >= log2(2 beta |F|^2 + 1)
  ok = ok && (cpp_int(1) << (P.ell - 2 * P.K - 2)) >= 2 * beta * f * f + 1;
  // (v): |Lambda| >= log2(r |F|^2) + r, r = p/q: 2^(q|L| - p) q^q >= (p |F|^2)^q.
  const cpp_int& p = P.r_num;
  const cpp_int& q = P.r_den;
  const int qi = static_cast<int>(q), pi = static_cast<int>(p);
  const int lam = static_cast<int>(P.counting.Lambda.size());
  cpp_int lhs = (cpp_int(1) << (qi * lam - pi)) * pow_big(static_cast<std::size_t>(qi), qi);
  cpp_int rhs = 1;
  for (int i = 0; i < qi; ++i) rhs *= p * f * f;
  ok = ok && lhs >= rhs;
  report(2, ok, "counting lemma (i)-(v), conditions (a)-(e), K minimal, l - 2K - 2 bound, exact",
         "|B| " + std::to_string(b) + ", |F| " + std::to_string(f) + ", K " + std::to_string(P.K) + ", l " +
             std::to_string(P.ell) + (bad.empty() ? "" : ", failing: " + bad));
}

void criterion3(const PipelineState& st) {
  if (st.steps.empty()) return report(3, false, "c sandwich", "no step");
  const StepResult& r = st.steps[0];
  bool ok = true;
  std::int64_t checked = 0;
  for (const std::string stage : {"phi1", "phi2", "phi3", "phi4", "phi5", "phi6", "phi'"}) {
    int found = 0;
    for (const auto& c : r.checks)
      if (c.stage == stage && (c.name.rfind("c_phi <= c <=", 0) == 0 || c.name.rfind("c > c_phi", 0) == 0)) {
        ++found;
        checked += c.checked;
        ok = ok && c.pass && c.checked > 0;
      }
    ok = ok && found == 3;
  }
  // Oracle on phi5 and phi': phi is empty, so c_phi = 0 and c counts the
  // a in A with a + x labeled 1; c = 2 only on B + D_0.
  const FinSet& A = r.plan.params.A;
  const FinSet& B = r.plan.params.B;
  const Tag D0{Tag::Kind::D, 1, 0};
  std::int64_t violations = 0;
  for (const WindowConfig* cfg : {&r.phi5, &r.cfg}) {
    const Window& w = cfg->window();
    auto at = [&](long long v) { return w.index_of(Z.from_coords({static_cast<int>(v)})); };
    for (Index x = 0; x < cfg->core_count(); ++x) {
      const long long xv = w.element(x).data[0];
      int c = 0;
      for (const auto& a : A) c += cfg->label(at(a.data[0] + xv)) == Label::One;
      if (c > 2) ++violations;
      if (c == 2) {
        bool inBD = false;
        for (const auto& b : B) {
          Index d = at(xv - b.data[0]);
          inBD = inBD || (d >= 0 && cfg->has_tag(d, D0));
        }
        violations += !inBD;
      }
    }
  }
  ok = ok && violations == 0;
  report(3, ok, "c sandwich and implications at phi1..phi6, phi'",
         std::to_string(checked) + " stage-point checks, " + std::to_string(violations) + " oracle violations");
}

void criterion4(const PipelineState& st) {
  if (st.steps.empty()) return report(4, false, "Delta recognizability", "no step");
  const StepResult& r = st.steps[0];
  const WindowConfig& cfg = r.cfg;
  const int core = r.core;
  std::vector<char> member = tag_member(cfg, Tag{Tag::Kind::Delta, 1, 0});
  Verification constructive = verify_recognizable(cfg, member, r.plan.T_Delta, core);
  const int rT = Z.radius(r.plan.T_Delta);
  const Index nc = cfg.window().ball_count(core);
  auto found = find_min_witness(cfg, member, rT, core, kMinSampled);
  bool ok = constructive.pass() && found.has_value();
  std::string detail = "constructive radius " + std::to_string(rT);
  if (found) {
    detail += ", searched radius " + std::to_string(Z.radius(*found)) + " (" + std::to_string(found->size()) + " elements)";
    // Same tag on a stride sample of at least kMinSampled core points.
    const Index stride = std::max<Index>(1, nc / (2 * kMinSampled));
    std::vector<Index> pts;
    for (Index x = 0; x < nc; x += stride) pts.push_back(x);
    PatternClasses pc(cfg, *found, pts);
    std::vector<int> cls(pc.num_classes(), -1);
    std::int64_t mismatch = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int& c = cls[pc.class_of(i)];
      int m = member[pts[i]];
      if (c < 0) c = m;
      mismatch += c != m;
    }
    Verification full = verify_recognizable(cfg, member, *found, core);
    ok = ok && Z.radius(*found) <= rT && static_cast<std::int64_t>(pts.size()) >= kMinSampled && mismatch == 0 &&
         full.pass();
    detail += ", " + std::to_string(pts.size()) + " sampled points, " + std::to_string(mismatch) + " mismatches";
  }
  report(4, ok, "Delta: constructive witness and searched minimal witness agree", detail);
}

void criterion5() {
  auto w = std::make_shared<const Window>(Z, 2 * kNegativeControlRadius + 40);
  const int core = 20;
  WindowConfig periodic(w, core);
  for (Index x = 0; x < w->size(); ++x) periodic.set_label(x, label_of_bit(((w->element(x).data[0] % 2) + 2) % 2));
  bool ok = !find_blocking_witness(periodic, Z.from_coords({2}), kNegativeControlRadius, core).has_value();
  int blocked = 0;
  for (int r = 0; r <= kNegativeControlRadius; ++r)
    blocked += verify_blocking(periodic, Z.from_coords({2}), Z.ball(r), core).pass();
  ok = ok && blocked == 0;
  report(5, ok, "period-2 configuration admits no blocking window for s = 2 up to radius 50",
         std::to_string(blocked) + " radii certified");
}

void criterion6(const PipelineState& st) {
  if (st.steps.empty()) return report(6, false, "family separation", "no step");
  FamilyResult fam = family_builder(st, {{0}, {1}});
  const StepPlan& p = st.steps[0].plan;
  SeparationWitness sw = verify_separation(fam.configs[0], fam.configs[1], {0}, {1}, p.W_Rprime, p.T_Rprime, st.core);
  bool ok = fam.finite_bits.pass() && sw.result.pass() && sw.shared == 0;
  report(6, ok, "w = (0), z = (1): disjoint pattern classes over S u ST, finite-bit dependence",
         std::to_string(sw.classes_w) + " and " + std::to_string(sw.classes_z) + " classes, " + std::to_string(sw.shared) +
             " shared; window " + std::to_string(sw.window.size()) + "; toggles " + to_string(fam.finite_bits.verdict));
}

void criterion7() {
  PipelineOptions o = flagship_options(Mode::Faithful, 1);
  o.min_core = 10000;
  ApproximationResult a = approximate_with_free_map(Z, {}, kEntropyDensity, kDensityRadius, o);
  bool density = a.M.density <= kEntropyDensity;
  std::string detail = "M density " + format_rational(a.M.density) + " (" + (density ? "ok" : "too large") + ")";
  bool ok = density && a.output.has_value() && a.state.pass();
  if (a.state.refusal) detail += "; build refused: required radius " + a.state.refusal->required.text();
  if (a.output) {
    EntropyReport e = entropy_report(*a.output);
    ok = ok && e.p <= kEntropyDensity && e.H <= kEntropyBound && e.H < boost::rational_cast<double>(kEntropyEpsilon);
    detail += "; p " + format_rational(e.p) + ", H " + std::to_string(e.H);
  }
  report(7, ok, "entropy: M density <= 0.01 on radius 10^6, 1-density p <= 0.01, H < 0.1", detail);
}

void criterion8() {
  PipelineOptions o = flagship_options(Mode::Faithful, 1);
  o.min_core = 10000;
  auto even = [](const GroupElement& g) { return g.data[0] % 2 == 0; };
  ApproximationResult a = approximate_with_free_map(Z, even, kApproxEpsilon, kDensityRadius, o);
  std::string detail = "M density " + format_rational(a.M.density);
  bool ok = a.density_ok && a.output.has_value() && a.state.pass() && a.symmetric_difference < kApproxEpsilon;
  if (a.state.refusal) detail += "; build refused: required radius " + a.state.refusal->required.text();
  if (a.output) detail += "; symmetric difference " + format_rational(a.symmetric_difference);
  report(8, ok, "approximation of the even integers with symmetric difference < 0.05", detail);
}

void criterion9() {
  auto t0 = std::chrono::steady_clock::now();
  MeasureSweep s = measure_sweep(kMeasureActions);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = s.pass() && s.actions >= 100 && s.generating_instances > 0 && s.criterion_instances > 0;
  std::ostringstream d;
  d << s.actions << " actions, " << s.instances << " instances (" << s.generating_instances << " generating), "
    << s.criterion_instances << " subset checks, " << secs << " s";
  for (const auto& f : s.failures) d << "; " << f;
  report(9, ok, "fixed-point measure equality, inequality, class-bijectivity agreement", d.str());
}

void criterion10() {
  const fs::path root = fs::temp_directory_path() / "orbitforge-acceptance";
  fs::remove_all(root);
  RunConfig cfg = RunConfig::load(std::string(ORBITFORGE_SOURCE_DIR) + "/configs/flagship.cfg");
  cfg.verbosity = 0;
  std::ostringstream log;
  cfg.out = (root / "a").string();
  int ca = cmd_build(cfg, log);
  cfg.out = (root / "b").string();
  int cb = cmd_build(cfg, log);
  bool ok = ca == exit_code::kPass && cb == exit_code::kPass;
  std::string detail;
  for (const char* f : {"bundle.json", "initial.dump", "step1.dump", "step1.phi5.dump"}) {
    bool same = slurp(root / "a" / f) == slurp(root / "b" / f);
    ok = ok && same;
    if (!same) detail += std::string(f) + " differs; ";
  }
  const std::string bundle = (root / "a" / "bundle.json").string();
  VerifyOutcome v = verify_bundle(bundle, std::nullopt);
  ok = ok && v.match() && v.failures == 0 && v.claims > 0;
  detail += std::to_string(v.claims) + " claims reproduced";

  // Flip the first 1 in the coded region around the origin.
  std::string dump = slurp(root / "a" / "step1.dump");
  std::istringstream in(dump);
  std::ostringstream out;
  std::string line;
  std::getline(in, line);
  out << line << "\n";
  bool flipped = false;
  std::string where;
  while (std::getline(in, line)) {
    auto sp = line.find(' ');
    if (!flipped && line.compare(sp, 3, " 1 ") == 0) {
      line[sp + 1] = '0';
      flipped = true;
      where = line.substr(0, sp);
    }
    out << line << "\n";
  }
  const fs::path tampered = root / "tampered.dump";
  std::ofstream(tampered, std::ios::binary) << out.str();
  VerifyOutcome t = verify_bundle(bundle, tampered.string());
  int code = cmd_verify(bundle, tampered.string(), log);
  ok = ok && flipped && !t.match() && code == exit_code::kCertificateFailure;
  detail += "; flip at " + where + ": " + std::to_string(t.mismatches) + " verdicts changed";
  report(10, ok, "byte-identical rebuilds, verify reproduces verdicts, single flip detected", detail);
}

void criterion11() {
  PipelineState st = pipeline(Z, Seed{}, flagship_options(Mode::Tightened, 2));
  bool ok;
  std::string detail;
  if (st.refusal) {
    ok = !st.refusal->required.text().empty() && st.refusal->required.exceeds(kRadiusCap);
    detail = "refused at step " + std::to_string(st.refusal->step) + ": required radius " + st.refusal->required.text();
  } else {
    ok = st.steps.size() == 2;
    for (const auto& r : st.steps)
      for (const auto& v : r.verifications)
        if (v.claim.rfind("(iv)", 0) == 0) ok = ok && v.pass();
    detail = "built at radius " + std::to_string(st.radius);
  }
  report(11, ok, "tightened second step: certified, or refused with the computed radius", detail);
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  PipelineState flagship = pipeline(Z, Seed{}, flagship_options(Mode::Faithful, 1));
  criterion1(flagship);
  criterion2(flagship);
  criterion3(flagship);
  criterion4(flagship);
  criterion5();
  criterion6(flagship);
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << failures << " of 11 criteria failed (" << secs << " s)" << std::endl;
  return std::min(failures, 100);
}
