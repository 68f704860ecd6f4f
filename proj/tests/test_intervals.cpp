#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pwsynth/intervals.hpp"

using namespace pwsynth;

static IntervalFamily canonical_family() {
  FamilyRule rule;
  rule.k_min = 10;
  rule.k_max = 18;
  rule.d_kind = FamilyRule::DKind::power;
  rule.d_value = 0.2;
  return IntervalFamily::from_rule(rule);
}

TEST_CASE("rule-generated entries carry the rule's centers and half-lengths") {
  IntervalFamily fam = canonical_family();
  REQUIRE(fam.size() == 9);
  CHECK(fam.k_offset() == 10);
  CHECK(fam.k_of(0) == 10);
  CHECK(fam.last_k() == 18);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    int k = fam.k_of(i);
    CHECK(fam.at(i).rho == std::ldexp(1.0, k));
    CHECK(fam.at(i).d == std::pow(std::ldexp(1.0, k), 0.2));
  }
  CHECK(fam.at(0).d == 4.0);  // 1024^(1/5) is exact

  FamilyRule ratio;
  ratio.k_min = 4;
  ratio.k_max = 6;
  ratio.d_kind = FamilyRule::DKind::ratio;
  ratio.d_value = 0.0625;
  IntervalFamily rf = IntervalFamily::from_rule(ratio);
  CHECK(rf.at(0).d == 1.0);
  CHECK(rf.at(2).d == 4.0);
}

TEST_CASE("log length matches the geometric closed form") {
  IntervalFamily fam = canonical_family();
  // sum_{k=10}^{18} 2^{-4k/5}: geometric with ratio 2^{-0.8}.
  double r = std::pow(2.0, -0.8);
  double closed = std::pow(2.0, -8.0) * (1.0 - std::pow(r, 9.0)) / (1.0 - r);
  CHECK(std::abs(log_length(fam, 18) - closed) <= 1e-15);
  CHECK(std::abs(log_length(fam, 10) - std::pow(2.0, -8.0)) <= 1e-18);

  FamilyRule ratio;
  ratio.k_min = 4;
  ratio.k_max = 12;
  ratio.d_kind = FamilyRule::DKind::ratio;
  ratio.d_value = 0.0625;
  IntervalFamily rf = IntervalFamily::from_rule(ratio);
  CHECK(std::abs(log_length(rf, 12) - 9.0 / 16.0) <= 1e-15);

  CHECK_THROWS_AS((void)log_length(fam, 9), std::out_of_range);
  CHECK_THROWS_AS((void)log_length(fam, 19), std::out_of_range);
}

TEST_CASE("side intervals reproduce the worked example") {
  IntervalFamily fam(std::vector<Interval>{{1024.0, 4.0}});
  SideIntervalData sd = side_intervals(fam, {1.0});
  REQUIRE(sd.entries.size() == 1);
  const SideEntry& e = sd.entries[0];
  CHECK(e.s == 64.0);  // sqrt(4 * 1 * 1024)
  CHECK(e.plus.lo == 1092.0);
  CHECK(e.plus.hi == 1156.0);
  CHECK(e.minus.lo == 892.0);
  CHECK(e.minus.hi == 956.0);
  CHECK_FALSE(e.oversize);
  CHECK_FALSE(e.throwaway);
  CHECK_FALSE(e.degenerate);
}

TEST_CASE("side intervals apply the s rescale and raise the size flags") {
  IntervalFamily fam(std::vector<Interval>{{1024.0, 4.0}});
  SideIntervalData sd = side_intervals(fam, {1.0}, 0.5);
  CHECK(sd.entries[0].s == 32.0);
  CHECK(sd.entries[0].plus.lo == 1028.0 + 32.0);

  // s = sqrt(25 * 10 * 100) = sqrt(25000) > 10 = 0.1 rho.
  IntervalFamily big(std::vector<Interval>{{100.0, 25.0}});
  CHECK(side_intervals(big, {10.0}).entries[0].oversize);

  // d >= 0.1 s: tiny mass makes the interval a throwaway.
  IntervalFamily thin(std::vector<Interval>{{1024.0, 4.0}});
  SideIntervalData t = side_intervals(thin, {1e-4});
  CHECK(t.entries[0].throwaway);

  SideIntervalData z = side_intervals(thin, {0.0});
  CHECK(z.entries[0].degenerate);

  CHECK_THROWS_AS((void)side_intervals(thin, {-1.0}), std::domain_error);
}

TEST_CASE("prefix drop keeps exactly the tail below eta") {
  IntervalFamily fam = canonical_family();
  double total = log_length(fam, 18);
  REQUIRE(total < 0.01);  // the canonical family already satisfies eta = 0.01
  CHECK(drop_prefix(fam, 0.01).size() == 9);

  // eta = 0.005: dropping k = 10 leaves 5.2e-3, dropping k = 11 leaves 3.0e-3.
  IntervalFamily d5 = drop_prefix(fam, 0.005);
  CHECK(d5.size() == 7);
  CHECK(d5.k_offset() == 12);
  CHECK(d5.at(0).rho == 4096.0);
  // Entries keep the rule numbering after the drop.
  CHECK(d5.k_of(0) == 12);
  CHECK(d5.has_rule());
}

TEST_CASE("structural validation flags each violation class") {
  IntervalFamily good = canonical_family();
  // Integer centers: flagged as too close to the lattice.
  ValidationReport vg = validate_family(good);
  REQUIRE_FALSE(vg.ok());
  bool saw_center = false;
  for (const auto& v : vg.violations) saw_center |= v.check == "center_integer_distance";
  CHECK(saw_center);
  CHECK(vg.min_center_dist_to_int == 0.0);

  // Shifted centers restore the distance rule.
  FamilyRule shifted;
  shifted.k_min = 10;
  shifted.k_max = 18;
  shifted.center_shift = -0.5;
  shifted.d_kind = FamilyRule::DKind::power;
  shifted.d_value = 0.2;
  ValidationReport vs = validate_family(IntervalFamily::from_rule(shifted));
  CHECK(vs.ok());
  CHECK(vs.min_center_dist_to_int == 0.5);

  // +0.5 breaks the doubling of consecutive centers.
  FamilyRule plus = shifted;
  plus.center_shift = 0.5;
  ValidationReport vp = validate_family(IntervalFamily::from_rule(plus));
  bool saw_lac = false;
  for (const auto& v : vp.violations) saw_lac |= v.check == "lacunarity";
  CHECK(saw_lac);

  // d above rho/10.
  IntervalFamily wide(std::vector<Interval>{{100.5, 20.0}});
  ValidationReport vw = validate_family(wide);
  bool saw_d = false;
  for (const auto& v : vw.violations) saw_d |= v.check == "half_length_bound";
  CHECK(saw_d);

  // Overlap between consecutive intervals.
  IntervalFamily over(std::vector<Interval>{{100.25, 10.0}, {205.25, 100.0}});
  ValidationReport vo = validate_family(over);
  bool saw_overlap = false;
  for (const auto& v : vo.violations) saw_overlap |= v.check == "overlap";
  CHECK(saw_overlap);
}

TEST_CASE("spectra enumerate their points in order") {
  ShiftedLatticeSpectrum half(0.5);
  auto pts = half.points_in(0.0, 4.0);
  CHECK(pts == std::vector<double>{0.5, 1.5, 2.5, 3.5});

  SymmetricShiftedSpectrum sym(0.25);
  auto sp = sym.points_in(-2.0, 2.0);
  CHECK(sp == std::vector<double>{-1.25, -0.25, 0.25, 1.25});

  IntegerLatticeSpectrum ints(true);  // excludes zero
  auto ip = ints.points_in(-2.5, 2.5);
  CHECK(ip == std::vector<double>{-2.0, -1.0, 1.0, 2.0});

  ExplicitSpectrum ex({3.5, -1.25, 0.75});
  auto ep = ex.points_in(-10.0, 10.0);
  CHECK(std::is_sorted(ep.begin(), ep.end()));
  CHECK(ep.size() == 3);
}

TEST_CASE("spectrum-aware validation reports lattice distance and gaps") {
  FamilyRule shifted;
  shifted.k_min = 10;
  shifted.k_max = 12;
  shifted.center_shift = -0.5;
  shifted.d_kind = FamilyRule::DKind::power;
  shifted.d_value = 0.2;
  IntervalFamily fam = IntervalFamily::from_rule(shifted);

  ShiftedLatticeSpectrum half(0.5);
  ValidationReport v = validate_family(fam, &half, -64.0, 64.0);
  CHECK(v.spectrum_min_dist_to_int == 0.5);
  CHECK(v.spectrum_max_gap == 1.0);

  // A spectrum point on the lattice is a violation.
  ExplicitSpectrum bad({0.25, 3.0, 7.75});
  ValidationReport vb = validate_family(fam, &bad, -16.0, 16.0);
  bool saw = false;
  for (const auto& viol : vb.violations) saw |= viol.check == "spectrum_integer_distance";
  CHECK(saw);
}

TEST_CASE("rule extension continues the family past its configured range") {
  IntervalFamily fam = canonical_family();
  auto ext = fam.rule_extension(std::ldexp(1.0, 21));
  REQUIRE(ext.size() == 3);  // k = 19, 20, 21
  CHECK(ext[0].rho == std::ldexp(1.0, 19));
  CHECK(ext[2].rho == std::ldexp(1.0, 21));

  IntervalFamily bare(std::vector<Interval>{{1024.0, 4.0}});
  CHECK(bare.rule_extension(1e9).empty());
}
