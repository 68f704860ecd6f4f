#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "pwsynth/commands.hpp"
#include "pwsynth/errors.hpp"

namespace {

// Exit codes: 0 pass, 1 failed check or invalid input, 2 non-convergence,
// 3 config/usage error.
constexpr int kExitInput = 1;
constexpr int kExitConvergence = 2;
constexpr int kExitConfig = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for completeness defects of exponential systems"};
  app.require_subcommand(1);

  pwsynth::CommandIO io;
  auto add_common = [&](CLI::App* sub, bool with_partition) {
    sub->add_option("--config", io.config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", io.out_json, "JSON report path");
    sub->add_option("--csv", io.csv_path, "CSV series path");
    sub->add_option("--window", io.window_override,
                    "integer window override (power of two, >= 1024)");
    if (with_partition) {
      sub->add_option("--partition", io.partition, "column range \"lo:hi\"");
    }
  };

  CLI::App* validate =
      app.add_subcommand("validate", "structural checks of the interval family");
  CLI::App* brk =
      app.add_subcommand("break", "construct and audit a synthesis-breaking pair");
  CLI::App* certify =
      app.add_subcommand("certify", "synthesis certificate conditions and index sets");
  CLI::App* defect =
      app.add_subcommand("defect", "windowed least-squares defect of a mixed system");
  CLI::App* example =
      app.add_subcommand("example", "sample a model on grids, integers, and zeros");
  add_common(validate, false);
  add_common(brk, false);
  add_common(certify, false);
  add_common(defect, true);
  add_common(example, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (validate->parsed()) return pwsynth::cmd_validate(io);
    if (brk->parsed()) return pwsynth::cmd_break(io);
    if (certify->parsed()) return pwsynth::cmd_certify(io);
    if (defect->parsed()) return pwsynth::cmd_defect(io);
    if (example->parsed()) return pwsynth::cmd_example(io);
    std::fprintf(stderr, "no subcommand selected\n");
    return kExitConfig;
  } catch (const pwsynth::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const pwsynth::ContractionError& e) {
    std::fprintf(stderr, "contraction failure: %s\n", e.what());
    return kExitConvergence;
  } catch (const pwsynth::ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s\n", e.what());
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
}
