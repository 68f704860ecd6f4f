#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pwsynth/breaker.hpp"
#include "pwsynth/certifier.hpp"
#include "pwsynth/genfun.hpp"
#include "pwsynth/intervals.hpp"

namespace pwsynth {

struct SpectrumConfig {
  std::string kind;  // integers | integers_excluding_zero | shifted |
                     // symmetric_shifted | explicit
  double shift = 0.0;
  double delta0 = 0.0;
  std::vector<double> points;
};

struct ModelConfig {
  std::string kind;  // simple_example | kadets | pv
  int k_cap = 60;    // simple_example
  double delta0 = 0.0, delta = 0.0;  // kadets
  int k_min = 0, k_max = -1;         // kadets band range
  SpectrumConfig spectrum;           // pv
  PvOptions pv;
};

struct FamilyConfig {
  std::string kind;  // powers_of_two | explicit
  FamilyRule rule;
  std::vector<Interval> intervals;
  int k_offset = 0;
};

struct TruncationConfig {
  std::int64_t window = std::int64_t{1} << 20;
  double tol = 1e-10;
  int max_doublings = 40;
};

struct OutputConfig {
  std::string json;
  std::string csv;
};

struct RunConfig {
  ModelConfig model;
  FamilyConfig family;
  TruncationConfig truncation;
  BreakerOptions breaker;
  CertifierOptions certifier;
  OutputConfig output;
};

// Parses and validates a JSON config file. Violations raise ConfigError
// carrying the dotted key path.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

std::shared_ptr<const Spectrum> make_spectrum(const SpectrumConfig& cfg);
std::shared_ptr<const GenFnModel> make_model(const ModelConfig& cfg);
IntervalFamily make_family(const FamilyConfig& cfg);

}  // namespace pwsynth
