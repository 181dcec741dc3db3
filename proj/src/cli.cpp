#include "orbitforge/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace orbitforge {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

void write_dump_file(const fs::path& p, const WindowConfig& cfg) {
  std::ostringstream s;
  write_dump(cfg, s);
  write_file(p, s.str());
}

WindowConfig read_dump_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read dump '" + path + "'");
  return read_dump(in);
}

void print_verification(std::ostream& log, const Verification& v) {
  log << "  " << to_string(v.verdict) << "  " << v.claim << "  (" << v.points_checked << " points";
  if (v.failures) log << ", " << v.failures << " failures, first at " << v.counterexample;
  log << ")\n";
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void print_refusal(std::ostream& log, const Refusal& r) {
  log << "refused at step " << r.step << ": required radius " << r.required.text() << "\n  " << r.reason << "\n";
}

}  // namespace

int cmd_build(const RunConfig& cfg, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  GroupContext G = cfg.make_group();
  PipelineState state = pipeline(G, cfg.make_seed(), cfg.pipeline_options());
  const double build_ms = ms_since(t0);

  const fs::path out(cfg.out);
  ensure_dir(out);
  DumpNames names = dump_names(state);
  write_dump_file(out / names.initial, state.initial);
  for (std::size_t k = 0; k < state.steps.size(); ++k) {
    write_dump_file(out / names.steps[k], state.steps[k].cfg);
    write_dump_file(out / names.phi5[k], state.steps[k].phi5);
  }
  write_file(out / "bundle.json", bundle_text(state, cfg, names));
  json timing{{"build_ms", build_ms}, {"total_ms", ms_since(t0)}};
  write_file(out / "timing.json", timing.dump(2) + "\n");

  log << "group " << G.spec() << ", radius " << state.radius << ", core " << state.core << ", steps built "
      << state.steps.size() << " of " << cfg.steps << "\n";
  for (std::size_t k = 0; k < state.steps.size(); ++k) {
    const StepResult& r = state.steps[k];
    int failed = 0;
    for (const auto& c : r.checks) failed += !c.pass;
    log << "step " << k + 1 << " (s = " << G.format(r.plan.s) << ", " << to_string(r.plan.params.mode) << "): "
        << r.checks.size() << " stage checks, " << failed << " failed\n";
    if (cfg.verbosity > 0)
      for (const auto& v : r.verifications) print_verification(log, v);
  }
  if (state.refusal) {
    print_refusal(log, *state.refusal);
    return exit_code::kRefusal;
  }
  log << (state.pass() ? "all certificates pass" : "certificate failure") << "; bundle at " << (out / "bundle.json").string()
      << "\n";
  return state.pass() ? exit_code::kPass : exit_code::kCertificateFailure;
}

int cmd_verify(const std::string& bundle_path, const std::optional<std::string>& dump_path, std::ostream& log) {
  VerifyOutcome v = verify_bundle(bundle_path, dump_path);
  log << v.claims << " claims recomputed, " << v.mismatches << " verdict mismatches, " << v.failures
      << " non-passing\n";
  for (const auto& d : v.diff) log << "  mismatch: " << d << "\n";
  if (!v.match() || v.failures) return exit_code::kCertificateFailure;
  if (v.refused) {
    log << "bundle records a refusal\n";
    return exit_code::kRefusal;
  }
  return exit_code::kPass;
}

int cmd_family(const RunConfig& cfg, std::ostream& log) {
  GroupContext G = cfg.make_group();
  PipelineState state = pipeline(G, cfg.make_seed(), cfg.pipeline_options());
  if (state.refusal) {
    print_refusal(log, *state.refusal);
    return exit_code::kRefusal;
  }
  if (!state.pass()) {
    log << "underlying build has failing certificates\n";
    return exit_code::kCertificateFailure;
  }
  FamilyResult fam = family_builder(state, cfg.bits);
  const fs::path out(cfg.out);
  ensure_dir(out);
  json report;
  report["bits"] = cfg.bits;
  report["finite_bits"] = json{{"claim", fam.finite_bits.claim},
                               {"verdict", to_string(fam.finite_bits.verdict)},
                               {"points_checked", fam.finite_bits.points_checked},
                               {"failures", fam.finite_bits.failures}};
  for (std::size_t i = 0; i < fam.configs.size(); ++i) write_dump_file(out / ("family" + std::to_string(i) + ".dump"), fam.configs[i]);
  print_verification(log, fam.finite_bits);
  bool ok = fam.finite_bits.pass();
  const StepPlan& p = state.steps.front().plan;
  json seps = json::array();
  for (std::size_t i = 0; i + 1 < fam.configs.size(); ++i) {
    SeparationWitness sw =
        verify_separation(fam.configs[i], fam.configs[i + 1], cfg.bits[i], cfg.bits[i + 1], p.W_Rprime, p.T_Rprime, state.core);
    print_verification(log, sw.result);
    ok = ok && sw.result.pass();
    seps.push_back(json{{"pair", {i, i + 1}},
                        {"window_size", sw.window.size()},
                        {"scope", sw.scope},
                        {"classes", {sw.classes_w, sw.classes_z}},
                        {"shared", sw.shared},
                        {"verdict", to_string(sw.result.verdict)},
                        {"detail", sw.result.detail}});
  }
  report["separation"] = seps;
  write_file(out / "family.json", report.dump(2) + "\n");
  return ok ? exit_code::kPass : exit_code::kCertificateFailure;
}

int cmd_entropy(const RunConfig& cfg, std::ostream& log) {
  GroupContext G = cfg.make_group();
  Rational target = cfg.density_target.value_or(cfg.epsilon / 10);
  ApproximationResult a = approximate_with_free_map(G, cfg.B_tags.predicate(G), target, cfg.density_radius, cfg.pipeline_options());
  json report;
  report["epsilon"] = format_rational(cfg.epsilon);
  report["density_target"] = format_rational(target);
  report["M_density"] = format_rational(a.M.density);
  report["M_measure"] = a.M.measure;
  report["M_witness_size"] = a.M.witness.F.size();
  log << "M density " << format_rational(a.M.density) << " (" << a.M.measure << ", target " << format_rational(target)
      << ")\n";
  int code = exit_code::kPass;
  if (a.state.refusal) {
    print_refusal(log, *a.state.refusal);
    report["refusal"] = json{{"step", a.state.refusal->step},
                             {"required_radius", a.state.refusal->required.text()},
                             {"reason", a.state.refusal->reason}};
    code = exit_code::kRefusal;
  } else if (a.output) {
    EntropyReport e = entropy_report(*a.output);
    report["p"] = format_rational(e.p);
    report["H_nats"] = e.H;
    report["symmetric_difference"] = format_rational(a.symmetric_difference);
    report["certificates_pass"] = a.state.pass();
    log << "1-density p = " << format_rational(e.p) << ", H = " << e.H << " nats, symmetric difference "
        << format_rational(a.symmetric_difference) << "\n";
    bool ok = a.density_ok && a.state.pass() && e.H < boost::rational_cast<double>(cfg.epsilon);
    code = ok ? exit_code::kPass : exit_code::kCertificateFailure;
  }
  const fs::path out(cfg.out);
  ensure_dir(out);
  write_file(out / "entropy.json", report.dump(2) + "\n");
  return code;
}

namespace {

MeasureInput builtin_measure() {
  // Z/2 swapping two of four points.
  MeasureInput m;
  m.group_table = FiniteGroup::cyclic(2).mul;
  m.action_table = {{0, 1, 2, 3}, {1, 0, 2, 3}};
  m.weights.assign(4, Rational(1, 4));
  m.partition = {0, 1, 2, 3};
  m.subset = {1, 0, 0, 0};
  m.element = 1;
  return m;
}

}  // namespace

int cmd_measure_demo(const std::optional<RunConfig>& cfg, std::ostream& log) {
  MeasureInput in = cfg && cfg->measure ? *cfg->measure : builtin_measure();
  FiniteAction act = make_action(in);
  if (in.partition.empty()) in.partition.assign(act.points(), 0);
  if (static_cast<int>(in.partition.size()) != act.points()) throw ArgumentError("partition length differs from the number of points");
  if (in.element < 0 || in.element >= act.group.order()) throw ArgumentError("measure_element out of range");
  FinitePartition P = FinitePartition::from_labels(in.partition);
  bool ok = true;
  for (int g = 0; g < act.group.order(); ++g) {
    FixMeasureResult r = fix_measure_formula(act, P, g);
    log << "g = " << g << ": nu(Fix) = " << format_rational(r.lhs) << ", min over Q = " << format_rational(r.rhs)
        << (r.generating ? ", generating" : ", not generating") << (r.equal ? ", equal" : ", strict") << "\n";
    ok = ok && r.le && (!r.generating || r.equal);
  }
  if (!in.subset.empty()) {
    std::vector<char> A(in.subset.begin(), in.subset.end());
    ClassBijectiveResult c = class_bijective_criterion(act, A);
    for (int g = 0; g < act.group.order(); ++g)
      log << "class bijectivity at g = " << g << ": pushforward " << format_rational(c.pushforward[g]) << " vs fixed "
          << format_rational(c.fixed[g]) << ", collapsed " << format_rational(c.collapsed[g])
          << (c.inequality[g] ? ", holds" : ", fails") << "\n";
    ok = ok && c.agree();
  }
  std::vector<int> col = three_coloring(act, in.element);
  log << "coloring of moved points for g = " << in.element << ":";
  for (int c : col) log << " " << c;
  log << "\n";
  return ok ? exit_code::kPass : exit_code::kCertificateFailure;
}

std::string render_pgm(const WindowConfig& cfg) {
  const GroupContext& G = cfg.group();
  if (G.kind() != GroupKind::Lattice || G.rank() > 2) throw ArgumentError("render supports Z and Z^2 only");
  const int R = cfg.radius();
  const int side = 2 * R + 1;
  const int width = side, height = G.rank() == 1 ? 1 : side;
  std::string pixels;
  pixels.reserve(static_cast<std::size_t>(width) * height);
  auto value = [&](Index x) -> char {
    if (x < 0) return static_cast<char>(128);
    switch (cfg.label(x)) {
      case Label::Zero:
        return 0;
      case Label::One:
        return static_cast<char>(255);
      default:
        return static_cast<char>(128);
    }
  };
  for (int row = 0; row < height; ++row)
    for (int col = 0; col < width; ++col) {
      std::vector<int> c{col - R};
      if (G.rank() == 2) c.push_back(R - row);
      pixels.push_back(value(cfg.window().index_of(G.from_coords(c))));
    }
  return "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n" + pixels;
}

int cmd_render(const std::string& dump_path, const std::string& pgm_path, std::ostream& log) {
  WindowConfig cfg = read_dump_file(dump_path);
  write_file(pgm_path, render_pgm(cfg));
  log << "wrote " << pgm_path << "\n";
  return exit_code::kPass;
}

int cmd_selftest(const std::string& scratch_dir, std::ostream& log) {
  bool ok = true;
  auto report = [&](const std::string& what, bool pass) {
    log << (pass ? "PASS " : "FAIL ") << what << "\n";
    ok = ok && pass;
  };
  RunConfig cfg = RunConfig::parse("group = \"Z\"\ncore = 64\nmode = tightened\nverbosity = 0\n");
  cfg.out = (fs::path(scratch_dir) / "selftest").string();
  std::ostringstream quiet;
  report("build small tightened step on Z", cmd_build(cfg, quiet) == exit_code::kPass);
  report("verify bundle round trip", cmd_verify((fs::path(cfg.out) / "bundle.json").string(), std::nullopt, quiet) ==
                                         exit_code::kPass);

  GroupContext G = GroupContext::lattice(1);
  auto w = std::make_shared<const Window>(G, 120);
  WindowConfig periodic(w, 20);
  for (Index x = 0; x < w->size(); ++x) periodic.set_label(x, label_of_bit(((w->element(x).data[0] % 2) + 2) % 2));
  report("period-2 configuration admits no blocking window for s = 2",
         !find_blocking_witness(periodic, G.from_coords({2}), 50, 20).has_value());

  MeasureSweep s = measure_sweep(20);
  report("fixed-point measure identities on 20 finite actions", s.pass());
  return ok ? exit_code::kPass : exit_code::kCertificateFailure;
}

}  // namespace orbitforge
