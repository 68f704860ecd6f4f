#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>

#include "pwsynth/errors.hpp"
#include "pwsynth/gamma.hpp"
#include "pwsynth/genfun.hpp"
#include "pwsynth/intervals.hpp"
#include "pwsynth/summation.hpp"

using namespace pwsynth;

namespace {

// Independent evaluation of the simple-example series by its definition:
// cos(pi x) (1/(x - 1/2) + sum_k (1/(x - 2^k + 1/2) - 1/(x - 2^k - 1/2))).
double simple_by_hand(double x, int k_cap) {
  KahanAccumulator s;
  s.add(1.0 / (x - 0.5));
  for (int k = 10; k <= k_cap; ++k) {
    double p = std::ldexp(1.0, k);
    s.add(1.0 / (x - p + 0.5));
    s.add(-1.0 / (x - p - 0.5));
  }
  return cospi(x) * s.result();
}

IntervalFamily kadets_family(double delta0, double delta, int k_min, int k_max) {
  FamilyRule rule;
  rule.k_min = k_min;
  rule.k_max = k_max;
  rule.d_kind = FamilyRule::DKind::power;
  rule.d_value = 2.0 * delta0 / (delta0 + delta);
  return IntervalFamily::from_rule(rule);
}

}  // namespace

TEST_CASE("simple example matches hand summation away from removable points") {
  SimpleExampleModel model(60);
  for (double x : {0.0, 0.25, 3.0, 17.8, 1000.0, 1024.0, 32768.0, -500.3}) {
    double want = simple_by_hand(x, 60);
    CHECK(std::abs(model.eval(x) - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }

  // Frozen values: G(0) = -2 - sum_k 1/(4^k - 1/4), G(2^15) = 4 + O(2^-15).
  CHECK(model.eval(0.0) == doctest::Approx(-2.0000012716).epsilon(1e-9));
  CHECK(model.eval(32768.0) == doctest::Approx(4.00003).epsilon(1e-5));
  CHECK(model.eval(1.5) == 0.0);  // cosine zero, no pole
}

TEST_CASE("simple example takes its limit value at the removable points") {
  SimpleExampleModel model(60);
  // cos(pi x) kills the pole; the limits are -pi at 1/2 and +pi at 2^k -/+ 1/2.
  CHECK(model.eval(0.5) == doctest::Approx(-M_PI).epsilon(1e-9));
  CHECK(model.eval(1023.5) == doctest::Approx(M_PI).epsilon(1e-6));
  CHECK(model.eval(1024.5) == doctest::Approx(M_PI).epsilon(1e-6));
  CHECK(model.eval(std::ldexp(1.0, 14) - 0.5) == doctest::Approx(M_PI).epsilon(1e-6));

  // Continuity across the removable point.
  double inside = model.eval(0.5 + 1e-9);
  CHECK(std::abs(inside - model.eval(0.5)) <= 1e-6);
}

TEST_CASE("simple example eval budget covers the dropped tail") {
  SimpleExampleModel trunc(20);
  SimpleExampleModel full(60);
  for (double x : {0.0, 700.0, 1024.25}) {
    EvalBudget b = trunc.eval_with_budget(x);
    CHECK(std::abs(b.value - full.eval(x)) <= b.tail + 1e-15);
  }
}

TEST_CASE("simple example derivative agrees with central differences") {
  SimpleExampleModel model(60);
  REQUIRE(model.has_analytic_derivative());
  for (double x : {0.2, 3.7, 1020.3, 4096.6}) {
    double h = 1e-6 * std::max(1.0, std::abs(x) / 1024.0);
    double fd = (model.eval(x + h) - model.eval(x - h)) / (2.0 * h);
    CHECK(model.derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }
  // At a zero: derivative_at_zero equals the generic derivative limit.
  double lam = 10.5;
  double h = 1e-7;
  double fd = (model.eval(lam + h) - model.eval(lam - h)) / (2.0 * h);
  CHECK(model.derivative_at_zero(lam) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("simple example complex evaluation is consistent with the real one") {
  SimpleExampleModel model(60);
  std::complex<double> z(12.3, 0.0);
  CHECK(std::abs(model.eval_complex(z).real() - model.eval(12.3)) <= 1e-12);
  CHECK(std::abs(model.eval_complex(z).imag()) <= 1e-12);

  // log |G(iy)| - pi y is bounded above and decreasing in y (subtype growth).
  double prev = model.log_abs_imag_axis(1.0) - M_PI;
  for (double y : {2.0, 4.0, 8.0, 16.0}) {
    double r = model.log_abs_imag_axis(y) - M_PI * y;
    CHECK(r < prev + 1e-9);
    prev = r;
  }
}

TEST_CASE("zero scan finds the half-integer lattice with certified brackets") {
  SimpleExampleModel model(60);
  ZeroList zl = find_zeros(model, 10.0, 20.0);
  REQUIRE(zl.zeros.size() == 10);
  for (std::size_t i = 0; i < zl.zeros.size(); ++i) {
    const ZeroEntry& e = zl.zeros[i];
    CHECK(e.lambda == 10.5 + static_cast<double>(i));
    CHECK(e.bracket_lo < e.lambda);
    CHECK(e.bracket_hi > e.lambda);
    CHECK(e.g_lo * e.g_hi < 0.0);
    CHECK(e.deriv != 0.0);
  }
  ptrdiff_t idx = zl.find(14.5, 1e-9);
  REQUIRE(idx >= 0);
  CHECK(zl.zeros[static_cast<std::size_t>(idx)].lambda == 14.5);
  CHECK(zl.find(14.3, 1e-9) == -1);
}

TEST_CASE("zero scan resolves the series zeros flanking a scale center") {
  SimpleExampleModel model(60);
  // Near 2^10 the series changes sign twice off the lattice, at about
  // rho - sqrt(rho) and rho + sqrt(rho).
  ZeroList zl = find_zeros(model, 990.0, 1060.0);
  std::vector<double> off;
  for (const auto& e : zl.zeros) {
    double fr = e.lambda - std::floor(e.lambda);
    if (std::abs(fr - 0.5) > 1e-9) off.push_back(e.lambda);
  }
  REQUIRE(off.size() == 2);
  CHECK(off[0] == doctest::Approx(992.484209154429).epsilon(1e-9));
  CHECK(off[1] == doctest::Approx(1056.5200689189).epsilon(1e-9));
  // Both removable points 2^10 -/+ 1/2 host no zero.
  CHECK(zl.find(1023.5, 1e-9) == -1);
  CHECK(zl.find(1024.5, 1e-9) == -1);
  // Every half-integer in range except the removable pair is present.
  std::size_t half_count = 0;
  for (const auto& e : zl.zeros) {
    double fr = e.lambda - std::floor(e.lambda);
    if (std::abs(fr - 0.5) <= 1e-9) ++half_count;
  }
  CHECK(half_count == 70 - 2);
}

TEST_CASE("zero scan near the 2^13 scale keeps residuals at the representable floor") {
  // The series zero by 8192 + sqrt(8192) sits at a point where the smallest
  // representable |G| exceeds a naive relative floor; the scan must still
  // certify it rather than reject its own converged bracket.
  SimpleExampleModel model(60);
  ZeroList zl = find_zeros(model, 8280.0, 8290.0);
  std::vector<double> off;
  for (const auto& e : zl.zeros) {
    double fr = e.lambda - std::floor(e.lambda);
    if (std::abs(fr - 0.5) > 1e-9) off.push_back(e.lambda);
  }
  REQUIRE(off.size() == 1);
  CHECK(off[0] == doctest::Approx(8283.0548).epsilon(1e-6));
}

TEST_CASE("zero list cache returns the same list for identical requests") {
  SimpleExampleModel model(60);
  auto a = model.zeros_in(100.0, 140.0);
  auto b = model.zeros_in(100.0, 140.0);
  CHECK(a.get() == b.get());
  auto c = model.zeros_in(100.0, 141.0);
  CHECK(a.get() != c.get());
}

TEST_CASE("integer sampling splits inside and outside mass") {
  SimpleExampleModel model(60);
  std::vector<Interval> excl{{1024.0, 4.0}};
  IntegerSamples s = samples_on_integers(model, excl, 2048);
  CHECK(s.g.size() == 2 * 2048 + 1);
  CHECK(s.value_at(0) == model.eval(0.0));
  CHECK(s.value_at(1024) == model.eval(1024.0));
  // Outside sum excludes [1020, 1028].
  KahanAccumulator hand;
  for (std::int64_t n = -2048; n <= 2048; ++n) {
    if (n >= 1020 && n <= 1028) continue;
    double v = model.eval(static_cast<double>(n));
    hand.add(v * v);
  }
  CHECK(s.sum_sq_outside == doctest::Approx(hand.result()).epsilon(1e-12));
  CHECK(s.outside_partials.size() == 4);
  CHECK(s.outside_partials.back() == doctest::Approx(s.sum_sq_outside).epsilon(1e-15));
}

TEST_CASE("kadets admissibility threshold and band structure") {
  CHECK(KadetsModel::min_admissible_k(0.5, 0.75) == 34);

  IntervalFamily fam = kadets_family(0.5, 0.75, 34, 35);
  KadetsModel model(0.5, 0.75, fam);
  CHECK(model.delta0() == 0.5);
  CHECK(model.delta() == 0.75);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    auto [m1, m2] = model.band_range(i);
    CHECK(static_cast<double>(m1) >= fam.at(i).lo() - 1.0);
    CHECK(static_cast<double>(m2) <= fam.at(i).hi() + 1.0);
    CHECK(m1 < m2);
  }
  // d = rho^{0.8} exactly under the construction rule.
  CHECK(fam.at(0).d == std::pow(std::ldexp(1.0, 34), 0.8));
}

TEST_CASE("kadets base zeros sit at the shifted lattice outside the bands") {
  // Unshifted zeros are at n + delta0 = n + 1/2; inside the bands they move
  // to n - delta, i.e. fractional part 1 - delta.
  IntervalFamily fam = kadets_family(0.5, 0.75, 34, 34);
  KadetsModel model(0.5, 0.75, fam);

  ZeroList outside = find_zeros(model, 100.0, 110.0);
  REQUIRE(outside.zeros.size() == 10);
  for (const auto& e : outside.zeros) {
    double fr = e.lambda - std::floor(e.lambda);
    CHECK(fr == doctest::Approx(0.5).epsilon(1e-12));
  }

  double rho = fam.at(0).rho;
  ZeroList inside = find_zeros(model, rho, rho + 8.0);
  REQUIRE(inside.zeros.size() >= 7);
  for (const auto& e : inside.zeros) {
    double fr = e.lambda - std::floor(e.lambda);
    CHECK(fr == doctest::Approx(0.25).epsilon(1e-9));  // n - 0.75
  }
}

TEST_CASE("kadets integer envelope equals the pointwise values") {
  IntervalFamily fam = kadets_family(0.5, 0.75, 34, 34);
  KadetsModel model(0.5, 0.75, fam);
  double rho = fam.at(0).rho;
  for (double nu : {100.0, 1000.0, 123456.0, rho - 10.0, rho + 3.0, rho + fam.at(0).d + 1.0}) {
    double n = std::floor(nu);
    double env = model.integer_abs_envelope(n);
    double direct = std::abs(model.eval(n));
    CHECK(env == doctest::Approx(direct).epsilon(1e-6));
  }
}

TEST_CASE("kadets band-edge values have unit order") {
  IntervalFamily fam = kadets_family(0.5, 0.75, 34, 36);
  KadetsModel model(0.5, 0.75, fam);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (double v : model.band_edge_values(i, 3)) {
      CHECK(v >= 0.2);
      CHECK(v <= 5.0);
    }
  }
}

TEST_CASE("kadets aggregated mass matches the exact loop on short ranges") {
  IntervalFamily fam = kadets_family(0.5, 0.75, 34, 34);
  KadetsModel model(0.5, 0.75, fam);
  std::int64_t lo = 5000, hi = 5400;
  SumResult m = model.mass_on(lo, hi);
  KahanAccumulator hand;
  for (std::int64_t n = lo; n <= hi; ++n) {
    double v = model.eval(static_cast<double>(n));
    hand.add(v * v);
  }
  CHECK(std::abs(m.value - hand.result()) <= m.error_bound + 1e-6 * hand.result());

  // A long range spanning a band boundary stays finite with a small bound.
  double rho = fam.at(0).rho, d = fam.at(0).d;
  SumResult wide = model.mass_on(static_cast<std::int64_t>(rho - 2.0 * d),
                                 static_cast<std::int64_t>(rho + 2.0 * d));
  CHECK(wide.value > 0.0);
  CHECK(std::isfinite(wide.value));
  CHECK(wide.error_bound <= 1e-5 * wide.value);
}

TEST_CASE("pv product over the punctured integers gives the cardinal sine") {
  auto spectrum = std::make_shared<IntegerLatticeSpectrum>(true);
  PvProductModel model(spectrum, PvOptions{1e-12, 48});
  // p.v. prod_{n != 0} (1 - z/n) = sin(pi z)/(pi z).
  CHECK(std::abs(model.eval(0.5) - 2.0 / M_PI) <= 1e-10);
  for (double x : {0.3, 1.7, -2.2}) {
    double want = sinpi(x) / (M_PI * x);
    CHECK(model.eval(x) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("pv product over the shifted lattice gives the cosine") {
  auto spectrum = std::make_shared<ShiftedLatticeSpectrum>(0.5);
  PvProductModel model(spectrum, PvOptions{1e-12, 48});
  for (double x : {0.0, 0.3, 2.7, -1.2}) {
    CHECK(model.eval(x) == doctest::Approx(cospi(x)).epsilon(1e-9));
  }
}

TEST_CASE("pv product over a symmetric shifted spectrum matches the gamma quotient") {
  // prod_{n >= 0} (1 - z^2/(n + a)^2) = Gamma(a)^2 / (Gamma(a + z) Gamma(a - z)).
  double a = 0.25;
  auto spectrum = std::make_shared<SymmetricShiftedSpectrum>(a);
  PvProductModel model(spectrum, PvOptions{1e-12, 48});
  std::complex<double> z(0.25, 1.0);
  std::complex<double> want =
      std::exp(2.0 * lgamma_complex({a, 0.0}) - lgamma_complex(a + z) - lgamma_complex(a - z));
  std::complex<double> got = model.eval_complex(z);
  CHECK(std::abs(got - want) <= 1e-8 * std::abs(want));

  double xr = 0.1;
  double wr = std::exp(2.0 * std::lgamma(a) - std::lgamma(a + xr) - std::lgamma(a - xr));
  CHECK(model.eval(xr) == doctest::Approx(wr).epsilon(1e-9));
}

TEST_CASE("pv product reports non-convergence against a hard cap") {
  auto spectrum = std::make_shared<IntegerLatticeSpectrum>(true);
  PvProductModel model(spectrum, PvOptions{1e-14, 2});
  CHECK_THROWS_AS((void)model.eval(0.37), ConvergenceError);
}
