#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "orbitforge/cli.hpp"

using namespace orbitforge;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> mode;
  std::optional<int> radius, steps;
  std::optional<std::string> out;

  void attach(CLI::App* app, bool config_required) {
    auto* c = app->add_option("config", config, "run-config file");
    if (config_required) c->required();
    app->add_option("--mode", mode, "faithful or tightened")->check(CLI::IsMember({"faithful", "tightened"}));
    app->add_option("--radius", radius, "window radius (default: computed requirement)")->check(CLI::PositiveNumber);
    app->add_option("--steps", steps, "number of inductive steps")->check(CLI::Range(1, kMaxSteps));
    app->add_option("--out", out, "output directory");
  }

  RunConfig load() const {
    RunConfig cfg = RunConfig::load(config);
    if (mode) cfg.mode = parse_mode(*mode);
    if (radius) cfg.radius = *radius;
    if (steps) cfg.steps = *steps;
    if (out) cfg.out = *out;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orbitforge: window-scale equivariant constructions with certificates"};
  app.require_subcommand(1);

  Overrides build_o, family_o, entropy_o, demo_o;
  auto* build = app.add_subcommand("build", "run the construction and write dumps and a certificate bundle");
  build_o.attach(build, true);
  auto* family = app.add_subcommand("family", "paint bit sequences on a build and check separation");
  family_o.attach(family, true);
  auto* entropy = app.add_subcommand("entropy", "small-density seed, build, and report the 1-density entropy");
  entropy_o.attach(entropy, true);
  auto* demo = app.add_subcommand("measure-demo", "fixed-point measure identity on a finite action");
  demo_o.attach(demo, false);

  std::string bundle;
  std::optional<std::string> dump;
  auto* verify = app.add_subcommand("verify", "recompute every claim of a bundle from its dumps");
  verify->add_option("bundle", bundle, "bundle.json")->required();
  verify->add_option("--dump", dump, "replacement for the final step dump");

  std::string render_in, render_out = "config.pgm";
  auto* render = app.add_subcommand("render", "write a dump as a binary graymap");
  render->add_option("dump", render_in, "configuration dump")->required();
  render->add_option("--out", render_out, "output .pgm path");

  std::string scratch = "selftest-out";
  auto* selftest = app.add_subcommand("selftest", "fast internal checks");
  selftest->add_option("--out", scratch, "scratch directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? exit_code::kPass : exit_code::kUsage;
  }

  return run_command(std::cerr, [&]() -> int {
    if (*build) return cmd_build(build_o.load(), std::cout);
    if (*family) return cmd_family(family_o.load(), std::cout);
    if (*entropy) return cmd_entropy(entropy_o.load(), std::cout);
    if (*demo) {
      std::optional<RunConfig> cfg;
      if (!demo_o.config.empty()) cfg = demo_o.load();
      return cmd_measure_demo(cfg, std::cout);
    }
    if (*verify) return cmd_verify(bundle, dump, std::cout);
    if (*render) return cmd_render(render_in, render_out, std::cout);
    if (*selftest) return cmd_selftest(scratch, std::cout);
    return exit_code::kUsage;
  });
}
