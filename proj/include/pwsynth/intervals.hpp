#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pwsynth {

// One candidate interval [rho - d, rho + d] centered at rho with half-length d > 0.
struct Interval {
  double rho = 0.0;
  double d = 0.0;
  double lo() const { return rho - d; }
  double hi() const { return rho + d; }
};

// Generating rule: centers rho_k = 2^k + center_shift, half-lengths from a
// power law d_k = rho_k^exponent or a fixed ratio d_k = value * rho_k.
struct FamilyRule {
  enum class DKind { power, ratio };
  int k_min = 0;
  int k_max = -1;
  double center_shift = 0.0;
  DKind d_kind = DKind::power;
  double d_value = 0.2;

  bool valid() const { return k_max >= k_min; }
  Interval make(int k) const;
};

// Finite increasing interval family. Entry i carries index k_offset + i so a
// family produced by a rule keeps the rule's k numbering after prefix drops.
// Construction enforces only basic well-formedness (d > 0, centers positive
// and strictly increasing); the structural checks with tolerances live in
// validate_family so that violating families can still be built and reported.
class IntervalFamily {
 public:
  IntervalFamily() = default;
  explicit IntervalFamily(std::vector<Interval> entries, int k_offset = 0);
  static IntervalFamily from_rule(const FamilyRule& rule);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Interval& at(std::size_t i) const;
  const std::vector<Interval>& entries() const { return entries_; }
  int k_offset() const { return k_offset_; }
  int k_of(std::size_t i) const { return k_offset_ + static_cast<int>(i); }
  int last_k() const { return k_offset_ + static_cast<int>(entries_.size()) - 1; }

  bool has_rule() const { return rule_.has_value(); }
  const FamilyRule& rule() const;

  // Intervals the rule would generate past k_max with centers <= hi. Used to
  // exclude rule-generated peaks from "outside" sums on windows that extend
  // beyond the configured range. Empty for rule-less families.
  std::vector<Interval> rule_extension(double hi) const;

  IntervalFamily drop_first(std::size_t n) const;

 private:
  std::vector<Interval> entries_;
  int k_offset_ = 0;
  std::optional<FamilyRule> rule_;
};

// Partial sum of d_k / rho_k over entries with index k <= k_max.
// k_max below the first index or above the last one is a range error,
// except that an empty family always sums to 0.
double log_length(const IntervalFamily& family, int k_max);

struct Violation {
  std::string check;
  int k = std::numeric_limits<int>::min();  // min() when not tied to one entry
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  double min_center_dist_to_int = std::numeric_limits<double>::infinity();
  // Spectrum-based observations; NaN when no spectrum was supplied.
  double spectrum_min_dist_to_int = std::numeric_limits<double>::quiet_NaN();
  double spectrum_max_gap = std::numeric_limits<double>::quiet_NaN();
  bool ok() const { return violations.empty(); }
};

class Spectrum;

// Structural checks: centers at least doubling, d_k <= 0.1 rho_k, disjoint
// intervals, centers at distance >= 1/3 from the integers. When a spectrum is
// given, additionally checks on [win_lo, win_hi] that its points keep a
// positive distance from the integers and that the window is populated.
ValidationReport validate_family(const IntervalFamily& family,
                                 const Spectrum* spectrum = nullptr,
                                 double win_lo = 0.0, double win_hi = 0.0);

struct SideInterval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

struct SideEntry {
  double s = 0.0;
  SideInterval minus;  // [rho - d - 2s, rho - d - s]
  SideInterval plus;   // [rho + d + s, rho + d + 2s]
  bool oversize = false;   // s > 0.1 rho, the side-interval size bound fails
  bool throwaway = false;  // d >= 0.1 s, interval carries too little mass
  bool degenerate = false; // g == 0
};

struct SideIntervalData {
  std::vector<SideEntry> entries;
};

// s_k = s_scale * sqrt(d_k g_k rho_k) and the two side intervals J_k^-/J_k^+.
// g must be per-entry nonnegative mass; negative g is a domain error.
SideIntervalData side_intervals(const IntervalFamily& family,
                                const std::vector<double>& g,
                                double s_scale = 1.0);

// Removes the smallest prefix for which the remaining tail satisfies
// sum d_k / rho_k < eta.
IntervalFamily drop_prefix(const IntervalFamily& family, double eta = 0.01);

// Point set generator. points_in returns the points of the spectrum inside
// [lo, hi], sorted strictly increasing.
class Spectrum {
 public:
  virtual ~Spectrum() = default;
  virtual std::vector<double> points_in(double lo, double hi) const = 0;
  // Largest gap between consecutive points in the window; hi - lo when the
  // window holds fewer than two points.
  virtual double density_gap(double lo, double hi) const;
  // Smallest distance from any point in the window to the integer lattice;
  // +inf when the window is empty.
  virtual double dist_to_integers(double lo, double hi) const;
};

// The integers, optionally with 0 removed.
class IntegerLatticeSpectrum final : public Spectrum {
 public:
  explicit IntegerLatticeSpectrum(bool exclude_zero = false)
      : exclude_zero_(exclude_zero) {}
  std::vector<double> points_in(double lo, double hi) const override;

 private:
  bool exclude_zero_;
};

// The shifted lattice { n + shift : n in Z }.
class ShiftedLatticeSpectrum final : public Spectrum {
 public:
  explicit ShiftedLatticeSpectrum(double shift) : shift_(shift) {}
  std::vector<double> points_in(double lo, double hi) const override;

 private:
  double shift_;
};

// The symmetric set { +-(n + delta0) : n = 0, 1, 2, ... }.
class SymmetricShiftedSpectrum final : public Spectrum {
 public:
  explicit SymmetricShiftedSpectrum(double delta0);
  std::vector<double> points_in(double lo, double hi) const override;

 private:
  double delta0_;
};

class ExplicitSpectrum final : public Spectrum {
 public:
  explicit ExplicitSpectrum(std::vector<double> points);
  std::vector<double> points_in(double lo, double hi) const override;

 private:
  std::vector<double> points_;
};

}  // namespace pwsynth
