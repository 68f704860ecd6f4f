#pragma once

#include <cstdint>
#include <string>

#include "pwsynth/config.hpp"

namespace pwsynth {

// Shared command-line surface of the subcommands. Empty out_json falls back
// to "<command>_report.json"; an empty csv_path skips the CSV series (the
// example command, whose point is the series, defaults to "example.csv").
struct CommandIO {
  std::string config_path;
  std::string out_json;
  std::string csv_path;
  std::int64_t window_override = 0;  // 0 keeps the config window
  std::string partition;             // defect only, "lo:hi"
};

// Each command returns its process exit code: 0 on a clean pass, 1 when the
// run finished but a check failed. Convergence and input errors are thrown
// and mapped to codes by the CLI driver.
int cmd_validate(const CommandIO& io);
int cmd_break(const CommandIO& io);
int cmd_certify(const CommandIO& io);
int cmd_defect(const CommandIO& io);
int cmd_example(const CommandIO& io);

}  // namespace pwsynth
