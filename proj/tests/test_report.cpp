#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "orbitforge/cli.hpp"

using namespace orbitforge;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("orbitforge-test-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("run config parsing") {
  RunConfig c = RunConfig::parse(
      "# flagship\n"
      "group = \"Z\"\n"
      "gen_order = [\"x+\", \"x-\"]\n"
      "core = 500        # comment\n"
      "mode = tightened\n"
      "epsilon = 0.05\n"
      "bits = [[0], [1]]\n"
      "Y = \"ap(0,3) | ball(2)\"\n"
      "radius = auto\n");
  CHECK(c.core == 500);
  CHECK(c.mode == Mode::Tightened);
  CHECK((c.epsilon == Rational(1, 20)));
  CHECK_FALSE(c.radius.has_value());
  CHECK(c.bits.size() == 2);
  GroupContext G = c.make_group();
  CHECK(c.Y.contains(G, G.from_coords({6})));
  CHECK(c.Y.contains(G, G.from_coords({-2})));
  CHECK_FALSE(c.Y.contains(G, G.from_coords({4})));
  CHECK_FALSE(c.Y.contains(G, G.from_coords({-4})));
  CHECK(c.Y.contains(G, G.from_coords({-3})));
}

TEST_CASE("run config errors") {
  CHECK_THROWS_AS(RunConfig::parse("colour = 3\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("core = 3\ncore = 4\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("core\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("mode = sloppy\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("group = \"SL2\"\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("Y = \"ap(1,0)\"\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("bits = [[2]]\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::parse("bits = [[0]\n"), ParseError);
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/run.cfg"), IoError);
}

TEST_CASE("rationals") {
  CHECK((parse_rational("0.01") == Rational(1, 100)));
  CHECK((parse_rational("3/12") == Rational(1, 4)));
  CHECK((parse_rational("\"2\"") == Rational(2)));
  CHECK((parse_rational("-0.5") == Rational(-1, 2)));
  CHECK(format_rational(Rational(6, 4)) == "3/2");
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
}

TEST_CASE("finite actions from run config tables") {
  RunConfig c = RunConfig::parse(
      "measure_group = \"Z/2\"\n"
      "measure_action = [[0,1,2,3],[1,0,2,3]]\n"
      "measure_weights = [\"1/4\",\"1/4\",\"1/4\",\"1/4\"]\n"
      "measure_partition = [0,1,2,3]\n");
  REQUIRE(c.measure.has_value());
  FiniteAction A = make_action(*c.measure);
  CHECK(A.points() == 4);
  std::ostringstream log;
  CHECK(cmd_measure_demo(c, log) == exit_code::kPass);
  CHECK(log.str().find("nu(Fix) = 1/2, min over Q = 1/2") != std::string::npos);
  RunConfig bad = RunConfig::parse(
      "measure_group = \"Z/2\"\n"
      "measure_action = [[0,1],[1,0]]\n"
      "measure_weights = [\"1/2\",\"1/3\"]\n");
  CHECK_THROWS_AS(make_action(*bad.measure), ArgumentError);
}

TEST_CASE("render") {
  GroupContext G = GroupContext::lattice(1);
  WindowConfig cfg(std::make_shared<const Window>(G, 2), 2);
  for (Index x = 0; x < cfg.size(); ++x) cfg.set_label(x, Label::One);
  std::string pgm = render_pgm(cfg);
  REQUIRE(pgm.rfind("P5\n5 1\n255\n", 0) == 0);
  std::string px = pgm.substr(std::string("P5\n5 1\n255\n").size());
  CHECK(px == std::string(5, static_cast<char>(255)));
  cfg.set_label(cfg.window().index_of(G.from_coords({-2})), Label::Zero);
  cfg.set_label(cfg.window().index_of(G.from_coords({2})), Label::Undefined);
  px = render_pgm(cfg).substr(std::string("P5\n5 1\n255\n").size());
  CHECK(px[0] == 0);
  CHECK(px[4] == static_cast<char>(128));

  GroupContext Z2 = GroupContext::lattice(2);
  WindowConfig sq(std::make_shared<const Window>(Z2, 1), 1);
  std::string p2 = render_pgm(sq);
  CHECK(p2.rfind("P5\n3 3\n255\n", 0) == 0);
  CHECK(p2.size() == std::string("P5\n3 3\n255\n").size() + 9);
  WindowConfig fr(std::make_shared<const Window>(GroupContext::free_group(2), 1), 1);
  CHECK_THROWS_AS(render_pgm(fr), ArgumentError);
}

TEST_CASE("build, verify and tamper") {
  fs::path dir = scratch("roundtrip");
  RunConfig c = RunConfig::parse("group = \"Z\"\ncore = 80\nmode = tightened\nverbosity = 0\n");
  c.out = dir.string();
  std::ostringstream log;
  REQUIRE(cmd_build(c, log) == exit_code::kPass);
  const fs::path bundle = dir / "bundle.json";
  CHECK(cmd_verify(bundle.string(), std::nullopt, log) == exit_code::kPass);

  // Deterministic output.
  fs::path dir2 = scratch("roundtrip2");
  c.out = dir2.string();
  REQUIRE(cmd_build(c, log) == exit_code::kPass);
  CHECK(slurp(dir / "bundle.json") == slurp(dir2 / "bundle.json"));
  CHECK(slurp(dir / "step1.dump") == slurp(dir2 / "step1.dump"));

  // Flip a coded label near the origin.
  std::string dump = slurp(dir / "step1.dump");
  std::istringstream in(dump);
  std::ostringstream out;
  std::string line;
  bool flipped = false;
  std::getline(in, line);
  out << line << "\n";
  while (std::getline(in, line)) {
    if (!flipped && line.find(" 1 ") != std::string::npos) {
      line.replace(line.find(" 1 "), 3, " 0 ");
      flipped = true;
    }
    out << line << "\n";
  }
  REQUIRE(flipped);
  fs::path tampered = dir / "tampered.dump";
  std::ofstream(tampered) << out.str();
  VerifyOutcome v = verify_bundle(bundle.string(), tampered.string());
  CHECK_FALSE(v.match());
  CHECK(cmd_verify(bundle.string(), tampered.string(), log) == exit_code::kCertificateFailure);

  // Truncated dump.
  fs::path cut = dir / "cut.dump";
  std::ofstream(cut) << dump.substr(0, dump.size() / 2);
  CHECK(run_command(log, [&] { return cmd_verify(bundle.string(), cut.string(), log); }) == exit_code::kUsage);
  CHECK(run_command(log, [&] { return cmd_verify((dir / "missing.json").string(), std::nullopt, log); }) ==
        exit_code::kIo);
}

TEST_CASE("refusal exit code") {
  fs::path dir = scratch("refusal");
  RunConfig c = RunConfig::parse("group = \"Z\"\ncore = 80\nradius = 120\nverbosity = 0\n");
  c.out = dir.string();
  std::ostringstream log;
  CHECK(cmd_build(c, log) == exit_code::kRefusal);
  CHECK(log.str().find("required radius") != std::string::npos);
}
