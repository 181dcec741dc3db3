#pragma once

#include <ostream>
#include <optional>
#include <string>

#include "orbitforge/errors.hpp"
#include "orbitforge/report.hpp"

namespace orbitforge {

namespace exit_code {
constexpr int kPass = 0;
constexpr int kCertificateFailure = 1;
constexpr int kRefusal = 2;
constexpr int kUsage = 3;
constexpr int kIo = 4;
}  // namespace exit_code

// Each command returns an exit code and reports on log. Exceptions are
// mapped by run_command.
int cmd_build(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const std::string& bundle_path, const std::optional<std::string>& dump_path, std::ostream& log);
int cmd_family(const RunConfig& cfg, std::ostream& log);
int cmd_entropy(const RunConfig& cfg, std::ostream& log);
int cmd_measure_demo(const std::optional<RunConfig>& cfg, std::ostream& log);
int cmd_render(const std::string& dump_path, const std::string& pgm_path, std::ostream& log);
int cmd_selftest(const std::string& scratch_dir, std::ostream& log);

// Binary portable graymap: 0 black, 1 white, undefined mid-gray. Z is a
// 1 x (2R+1) strip, Z^2 the (2R+1) x (2R+1) square with rows from the top.
std::string render_pgm(const WindowConfig& cfg);

// Maps the error classes to exit codes.
template <class F>
int run_command(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kIo;
  } catch (const WindowExhausted& e) {
    err << "refused: " << e.what();
    if (!e.required_radius().empty()) err << "; required radius " << e.required_radius();
    err << "\n";
    return exit_code::kRefusal;
  } catch (const ConstructionError& e) {
    err << "construction failed: " << e.what() << "\n";
    return exit_code::kCertificateFailure;
  } catch (const InvariantError& e) {
    err << "construction failed: " << e.what() << "\n";
    return exit_code::kCertificateFailure;
  }
}

}  // namespace orbitforge
