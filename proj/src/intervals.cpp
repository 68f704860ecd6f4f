#include "pwsynth/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pwsynth/summation.hpp"

namespace pwsynth {

Interval FamilyRule::make(int k) const {
  Interval iv;
  iv.rho = std::ldexp(1.0, k) + center_shift;
  switch (d_kind) {
    case DKind::power:
      iv.d = std::pow(iv.rho, d_value);
      break;
    case DKind::ratio:
      iv.d = d_value * iv.rho;
      break;
  }
  return iv;
}

IntervalFamily::IntervalFamily(std::vector<Interval> entries, int k_offset)
    : entries_(std::move(entries)), k_offset_(k_offset) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Interval& iv = entries_[i];
    if (!(iv.d > 0.0) || !std::isfinite(iv.d)) {
      throw std::invalid_argument("interval family: half-length must be positive and finite");
    }
    if (!(iv.rho > 0.0) || !std::isfinite(iv.rho)) {
      throw std::invalid_argument("interval family: centers must be positive and finite");
    }
    if (i > 0 && !(entries_[i - 1].rho < iv.rho)) {
      throw std::invalid_argument("interval family: centers must be strictly increasing");
    }
  }
}

IntervalFamily IntervalFamily::from_rule(const FamilyRule& rule) {
  if (!rule.valid()) {
    throw std::invalid_argument("interval family rule: k_max must be >= k_min");
  }
  std::vector<Interval> entries;
  entries.reserve(static_cast<std::size_t>(rule.k_max - rule.k_min + 1));
  for (int k = rule.k_min; k <= rule.k_max; ++k) {
    entries.push_back(rule.make(k));
  }
  IntervalFamily fam(std::move(entries), rule.k_min);
  fam.rule_ = rule;
  return fam;
}

const Interval& IntervalFamily::at(std::size_t i) const {
  if (i >= entries_.size()) {
    throw std::out_of_range("interval family: index out of range");
  }
  return entries_[i];
}

const FamilyRule& IntervalFamily::rule() const {
  if (!rule_) {
    throw std::logic_error("interval family: no generating rule attached");
  }
  return *rule_;
}

std::vector<Interval> IntervalFamily::rule_extension(double hi) const {
  std::vector<Interval> out;
  if (!rule_) return out;
  // Centers double, so the loop is logarithmic in hi; the hard cap guards
  // against a degenerate rule.
  for (int k = rule_->k_max + 1; k <= rule_->k_max + 300; ++k) {
    Interval iv = rule_->make(k);
    if (iv.rho > hi) break;
    out.push_back(iv);
  }
  return out;
}

IntervalFamily IntervalFamily::drop_first(std::size_t n) const {
  if (n > entries_.size()) {
    throw std::out_of_range("interval family: cannot drop more entries than present");
  }
  IntervalFamily out;
  out.entries_.assign(entries_.begin() + static_cast<std::ptrdiff_t>(n), entries_.end());
  out.k_offset_ = k_offset_ + static_cast<int>(n);
  out.rule_ = rule_;
  return out;
}

double log_length(const IntervalFamily& family, int k_max) {
  if (family.empty()) return 0.0;
  if (k_max < family.k_offset() || k_max > family.last_k()) {
    throw std::out_of_range("log_length: k_max outside the family index range");
  }
  KahanAccumulator acc;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (family.k_of(i) > k_max) break;
    const Interval& iv = family.at(i);
    acc.add(iv.d / iv.rho);
  }
  return acc.result();
}

ValidationReport validate_family(const IntervalFamily& family, const Spectrum* spectrum,
                                 double win_lo, double win_hi) {
  ValidationReport rep;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Interval& iv = family.at(i);
    const int k = family.k_of(i);
    if (i > 0) {
      const Interval& prev = family.at(i - 1);
      if (!(2.0 * prev.rho <= iv.rho)) {
        rep.violations.push_back({"lacunarity", k,
                                  "center ratio " + std::to_string(iv.rho / prev.rho) +
                                      " below 2"});
      }
      if (!(prev.hi() < iv.lo())) {
        rep.violations.push_back({"overlap", k, "interval meets its predecessor"});
      }
    }
    if (!(iv.d <= 0.1 * iv.rho)) {
      rep.violations.push_back({"half_length_bound", k,
                                "d exceeds rho/10 (d=" + std::to_string(iv.d) + ")"});
    }
    const double dist = std::abs(iv.rho - std::nearbyint(iv.rho));
    rep.min_center_dist_to_int = std::min(rep.min_center_dist_to_int, dist);
    if (!(dist >= 1.0 / 3.0)) {
      rep.violations.push_back({"center_integer_distance", k,
                                "center within " + std::to_string(dist) + " of an integer"});
    }
  }
  if (spectrum != nullptr && win_hi > win_lo) {
    rep.spectrum_min_dist_to_int = spectrum->dist_to_integers(win_lo, win_hi);
    rep.spectrum_max_gap = spectrum->density_gap(win_lo, win_hi);
    if (!(rep.spectrum_min_dist_to_int > 0.0)) {
      rep.violations.push_back({"spectrum_integer_distance", std::numeric_limits<int>::min(),
                                "a spectrum point lies on the integer lattice"});
    }
  }
  return rep;
}

SideIntervalData side_intervals(const IntervalFamily& family, const std::vector<double>& g,
                                double s_scale) {
  if (g.size() != family.size()) {
    throw std::invalid_argument("side_intervals: g must have one entry per interval");
  }
  if (!(s_scale > 0.0)) {
    throw std::invalid_argument("side_intervals: s_scale must be positive");
  }
  SideIntervalData data;
  data.entries.resize(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (g[i] < 0.0 || !std::isfinite(g[i])) {
      throw std::domain_error("side_intervals: interval mass must be finite and nonnegative");
    }
    const Interval& iv = family.at(i);
    SideEntry& e = data.entries[i];
    if (g[i] == 0.0) {
      e.degenerate = true;
      continue;
    }
    e.s = s_scale * std::sqrt(iv.d * g[i] * iv.rho);
    e.minus = {iv.rho - iv.d - 2.0 * e.s, iv.rho - iv.d - e.s};
    e.plus = {iv.rho + iv.d + e.s, iv.rho + iv.d + 2.0 * e.s};
    e.oversize = e.s > 0.1 * iv.rho;
    e.throwaway = iv.d >= 0.1 * e.s;
  }
  return data;
}

IntervalFamily drop_prefix(const IntervalFamily& family, double eta) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("drop_prefix: eta must be positive");
  }
  // Tail sums computed back to front so each candidate drop count is tested
  // against the exact remaining sum.
  const std::size_t n = family.size();
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    const Interval& iv = family.at(i);
    tail[i] = tail[i + 1] + iv.d / iv.rho;
  }
  std::size_t drop = 0;
  while (drop < n && !(tail[drop] < eta)) ++drop;
  return family.drop_first(drop);
}

double Spectrum::density_gap(double lo, double hi) const {
  std::vector<double> pts = points_in(lo, hi);
  if (pts.size() < 2) return hi - lo;
  double gap = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    gap = std::max(gap, pts[i] - pts[i - 1]);
  }
  return gap;
}

double Spectrum::dist_to_integers(double lo, double hi) const {
  std::vector<double> pts = points_in(lo, hi);
  double best = std::numeric_limits<double>::infinity();
  for (double p : pts) {
    best = std::min(best, std::abs(p - std::nearbyint(p)));
  }
  return best;
}

namespace {

void check_window(double lo, double hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("spectrum window must be finite with lo <= hi");
  }
}

}  // namespace

std::vector<double> IntegerLatticeSpectrum::points_in(double lo, double hi) const {
  check_window(lo, hi);
  std::vector<double> out;
  const auto first = static_cast<long long>(std::ceil(lo));
  const auto last = static_cast<long long>(std::floor(hi));
  for (long long n = first; n <= last; ++n) {
    if (exclude_zero_ && n == 0) continue;
    out.push_back(static_cast<double>(n));
  }
  return out;
}

std::vector<double> ShiftedLatticeSpectrum::points_in(double lo, double hi) const {
  check_window(lo, hi);
  std::vector<double> out;
  const auto first = static_cast<long long>(std::ceil(lo - shift_));
  const auto last = static_cast<long long>(std::floor(hi - shift_));
  for (long long n = first; n <= last; ++n) {
    const double p = static_cast<double>(n) + shift_;
    if (p >= lo && p <= hi) out.push_back(p);
  }
  return out;
}

SymmetricShiftedSpectrum::SymmetricShiftedSpectrum(double delta0) : delta0_(delta0) {
  if (!(delta0 > 0.0) || !(delta0 < 1.0)) {
    throw std::invalid_argument("symmetric shifted spectrum: delta0 must lie in (0, 1)");
  }
}

std::vector<double> SymmetricShiftedSpectrum::points_in(double lo, double hi) const {
  check_window(lo, hi);
  std::vector<double> out;
  // Negative branch -(n + delta0), emitted in increasing order.
  if (lo < 0.0) {
    const auto n_hi = static_cast<long long>(std::floor(-lo - delta0_));
    const auto n_lo = static_cast<long long>(std::ceil(std::max(0.0, -hi - delta0_)));
    for (long long n = n_hi; n >= n_lo; --n) {
      const double p = -(static_cast<double>(n) + delta0_);
      if (p >= lo && p <= hi) out.push_back(p);
    }
  }
  if (hi > 0.0) {
    const auto n_lo = static_cast<long long>(std::ceil(std::max(0.0, lo - delta0_)));
    const auto n_hi = static_cast<long long>(std::floor(hi - delta0_));
    for (long long n = n_lo; n <= n_hi; ++n) {
      const double p = static_cast<double>(n) + delta0_;
      if (p >= lo && p <= hi) out.push_back(p);
    }
  }
  return out;
}

ExplicitSpectrum::ExplicitSpectrum(std::vector<double> points) : points_(std::move(points)) {
  std::sort(points_.begin(), points_.end());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) {
      throw std::invalid_argument("explicit spectrum: points must be finite");
    }
    if (i > 0 && points_[i] == points_[i - 1]) {
      throw std::invalid_argument("explicit spectrum: points must be distinct");
    }
  }
}

std::vector<double> ExplicitSpectrum::points_in(double lo, double hi) const {
  check_window(lo, hi);
  auto first = std::lower_bound(points_.begin(), points_.end(), lo);
  auto last = std::upper_bound(points_.begin(), points_.end(), hi);
  return std::vector<double>(first, last);
}

}  // namespace pwsynth
