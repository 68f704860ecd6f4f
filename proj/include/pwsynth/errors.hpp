// errors.hpp -- exception types shared across the library.
//
// Contract violations raise std::domain_error / std::invalid_argument /
// std::out_of_range directly.  The types below carry extra state for the
// failure modes that calling code is expected to inspect.

#pragma once

#include <stdexcept>
#include <string>

namespace pwsynth {

// An iteration failed to reach its tolerance within its budget.  Carries the
// last two iterate summaries so a caller (or a report) can show the stall.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last, double previous)
      : std::runtime_error(what), last_value(last), previous_value(previous) {}

  double last_value = 0.0;
  double previous_value = 0.0;
};

// A contraction-mapping iteration observed a step ratio >= 1.  The message
// includes the remedy expected at call sites (drop more prefix intervals).
class ContractionError : public std::runtime_error {
 public:
  ContractionError(const std::string& what, double ratio)
      : std::runtime_error(what), observed_ratio(ratio) {}

  double observed_ratio = 0.0;
};

// Evaluation requested exactly at a pole.
class PoleError : public std::domain_error {
 public:
  PoleError(const std::string& what, double where)
      : std::domain_error(what), location(where) {}

  double location = 0.0;
};

// Malformed or out-of-contract run configuration.  `key` names the offending
// config entry so the CLI can print it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key_in, const std::string& what)
      : std::runtime_error("config key '" + key_in + "': " + what), key(key_in) {}

  std::string key;
};

}  // namespace pwsynth
