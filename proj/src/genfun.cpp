#include "pwsynth/genfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pwsynth/errors.hpp"
#include "pwsynth/gamma.hpp"

namespace pwsynth {

namespace {

constexpr double kPi = 3.14159265358979323846;

long long double_bits(double x) {
  long long v;
  std::memcpy(&v, &x, sizeof v);
  return v;
}

bool is_exact_integer(double x) { return std::isfinite(x) && x == std::nearbyint(x); }

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double GenFnModel::derivative(double x) const {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (eval(x + h) - eval(x - h)) / (2.0 * h);
}

double GenFnModel::derivative_at_zero(double lambda) const { return derivative(lambda); }

double GenFnModel::log_abs_imag_axis(double y) const {
  if (!(y > 0.0)) throw std::invalid_argument("log_abs_imag_axis: y must be positive");
  return std::log(std::abs(eval_complex({0.0, y})));
}

std::shared_ptr<const ZeroList> GenFnModel::zeros_in(double lo, double hi,
                                                     const ZeroFindOptions& opts) const {
  const std::tuple<long long, long long, long long> key{
      double_bits(lo), double_bits(hi),
      double_bits(opts.grid) ^ (double_bits(opts.bisect_tol) << 1)};
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = zero_cache_.find(key);
    if (it != zero_cache_.end()) return it->second;
  }
  auto list = std::make_shared<const ZeroList>(find_zeros(*this, lo, hi, opts));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = zero_cache_.emplace(key, list);
  return it->second;
}

std::ptrdiff_t ZeroList::find(double x, double tol) const {
  auto it = std::lower_bound(zeros.begin(), zeros.end(), x,
                             [](const ZeroEntry& e, double v) { return e.lambda < v; });
  std::ptrdiff_t best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (auto cand : {it, it == zeros.begin() ? zeros.end() : std::prev(it)}) {
    if (cand == zeros.end()) continue;
    const double dist = std::abs(cand->lambda - x);
    if (dist <= tol && dist < best_dist) {
      best = cand - zeros.begin();
      best_dist = dist;
    }
  }
  return best;
}

namespace {

// Widens a bracket around an exactly vanishing point until the endpoint
// values have strictly opposite signs. The models here have simple zeros, so
// a few ulps suffice.
bool ulp_bracket(const GenFnModel& model, double x, double max_span, ZeroEntry* entry) {
  double lo = x, hi = x;
  for (int i = 0; i < 64; ++i) {
    lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
    if (hi - lo > max_span) return false;
    const double g_lo = model.eval(lo);
    const double g_hi = model.eval(hi);
    if (g_lo != 0.0 && g_hi != 0.0 && sign_of(g_lo) != sign_of(g_hi)) {
      entry->bracket_lo = lo;
      entry->bracket_hi = hi;
      entry->g_lo = g_lo;
      entry->g_hi = g_hi;
      return true;
    }
  }
  return false;
}

ZeroEntry refine_bracket(const GenFnModel& model, double a, double b, double fa, double fb,
                         double tol, double scale_ref) {
  ZeroEntry entry;
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = model.eval(m);
    if (fm == 0.0) {
      entry.lambda = m;
      if (ulp_bracket(model, m, b - a, &entry)) {
        entry.value = 0.0;
        return entry;
      }
      break;
    }
    if (sign_of(fm) == sign_of(fa)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  double lambda = 0.5 * (a + b);
  // One secant polish when the bracket is still wide relative to its ulp.
  const double ulp = std::max(std::abs(a), std::abs(b)) *
                     std::numeric_limits<double>::epsilon();
  if (b - a > 8.0 * ulp && fb != fa) {
    const double cand = a - fa * (b - a) / (fb - fa);
    if (cand > a && cand < b) lambda = cand;
  }
  entry.lambda = lambda;
  entry.bracket_lo = a;
  entry.bracket_hi = b;
  entry.g_lo = fa;
  entry.g_hi = fb;
  entry.value = model.eval(lambda);
  // The 1e-10 scale bound plus the representable floor: lambda cannot sit
  // closer to the true zero than about an ulp of its own magnitude, which
  // costs slope * ulp in the value regardless of how far bisection went.
  const double slope = std::abs(fb - fa) / (b - a);
  const double bound = 1e-10 * scale_ref + 4.0 * slope * ulp;
  if (std::abs(entry.value) > bound) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "find_zeros: refined zero at %.17g fails the residual bound "
                  "(|G|=%.3g, bound=%.3g)",
                  lambda, std::abs(entry.value), bound);
    throw std::runtime_error(msg);
  }
  return entry;
}

}  // namespace

ZeroList find_zeros(const GenFnModel& model, double lo, double hi,
                    const ZeroFindOptions& opts) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("find_zeros: window must be finite with lo < hi");
  }
  if (!(opts.grid > 0.0) || !(opts.bisect_tol > 0.0)) {
    throw std::invalid_argument("find_zeros: grid and tolerance must be positive");
  }
  ZeroList out;
  out.lo = lo;
  out.hi = hi;
  const double step = opts.grid;
  const auto j0 = static_cast<long long>(std::ceil(lo / step));
  const auto j1 = static_cast<long long>(std::floor(hi / step));
  if (j1 <= j0) return out;

  double prev_x = static_cast<double>(j0) * step;
  double prev_g = model.eval(prev_x);
  if (prev_g == 0.0) {
    ZeroEntry e;
    e.lambda = prev_x;
    if (!ulp_bracket(model, prev_x, 2.0 * step, &e)) {
      throw std::runtime_error("find_zeros: could not certify a grid-node zero");
    }
    out.zeros.push_back(e);
    prev_x = e.bracket_hi;
    prev_g = e.g_hi;
  }
  for (long long j = j0 + 1; j <= j1; ++j) {
    const double x = static_cast<double>(j) * step;
    const double g = model.eval(x);
    if (g == 0.0) {
      ZeroEntry e;
      e.lambda = x;
      if (!ulp_bracket(model, x, 2.0 * step, &e)) {
        throw std::runtime_error("find_zeros: could not certify a grid-node zero");
      }
      // A second zero can hide between the previous node and this exact one;
      // test the open cell against the zero's left ulp neighbor.
      if (sign_of(e.g_lo) != sign_of(prev_g)) {
        const double scale_ref = std::max(std::abs(prev_g), std::abs(e.g_lo));
        out.zeros.push_back(refine_bracket(model, prev_x, e.bracket_lo, prev_g, e.g_lo,
                                           opts.bisect_tol, scale_ref));
      }
      out.zeros.push_back(e);
      prev_x = e.bracket_hi;
      prev_g = e.g_hi;
      continue;
    }
    if (sign_of(g) != sign_of(prev_g)) {
      const double scale_ref = std::max(std::abs(prev_g), std::abs(g));
      out.zeros.push_back(
          refine_bracket(model, prev_x, x, prev_g, g, opts.bisect_tol, scale_ref));
    }
    prev_x = x;
    prev_g = g;
  }
  for (std::size_t i = 0; i < out.zeros.size(); ++i) {
    ZeroEntry& e = out.zeros[i];
    if (i > 0 && !(out.zeros[i - 1].lambda < e.lambda)) {
      throw std::runtime_error("find_zeros: zeros not strictly increasing");
    }
    e.deriv = model.derivative_at_zero(e.lambda);
    if (!(std::abs(e.deriv) > 0.0) || !std::isfinite(e.deriv)) {
      throw std::runtime_error("find_zeros: derivative at a zero vanished");
    }
  }
  return out;
}

IntegerSamples samples_on_integers(const GenFnModel& model,
                                   const std::vector<Interval>& exclude, std::int64_t N) {
  if (N < 1 || N > (std::int64_t{1} << 22)) {
    throw std::invalid_argument("samples_on_integers: N must lie in [1, 2^22]");
  }
  std::vector<Interval> sorted = exclude;
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.rho < b.rho; });
  auto excluded = [&sorted](double n) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), n,
                               [](double v, const Interval& iv) { return v < iv.lo(); });
    if (it == sorted.begin()) return false;
    return std::prev(it)->hi() >= n;
  };

  IntegerSamples s;
  s.N = N;
  s.g.resize(static_cast<std::size_t>(2 * N + 1));
  for (std::int64_t n = -N; n <= N; ++n) {
    s.g[static_cast<std::size_t>(n + N)] = model.eval(static_cast<double>(n));
  }
  // Outside mass accumulated over growing symmetric windows so the caller can
  // check that the doubling increments shrink.
  KahanAccumulator acc;
  std::vector<std::int64_t> marks{N / 8, N / 4, N / 2, N};
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  std::size_t next_mark = 0;
  auto add_outside = [&](std::int64_t n) {
    const double v = s.value_at(n);
    if (!excluded(static_cast<double>(n))) acc.add(v * v);
  };
  for (std::int64_t m = 0; m <= N; ++m) {
    add_outside(m);
    if (m != 0) add_outside(-m);
    while (next_mark < marks.size() && m == marks[next_mark]) {
      s.outside_partials.push_back(acc.result());
      ++next_mark;
    }
  }
  s.sum_sq_outside = acc.result();
  return s;
}

// ---------------------------------------------------------------------------
// SimpleExampleModel

namespace {
constexpr double kRemovableRadius = 1e-4;
}

SimpleExampleModel::SimpleExampleModel(int k_cap) : k_cap_(k_cap) {
  if (k_cap < k_first || k_cap > 1000) {
    throw std::invalid_argument("simple_example: k_cap must lie in [10, 1000]");
  }
}

SimpleExampleModel::Local SimpleExampleModel::classify(double x) const {
  Local loc;
  const double h0 = std::nearbyint(x - 0.5) + 0.5;  // nearest half-odd-integer
  if (std::abs(x - h0) > kRemovableRadius) return loc;
  if (h0 == 0.5) {
    loc.removable = true;
    loc.x0 = 0.5;
    loc.residue = 1.0;
    loc.k = 0;
    return loc;
  }
  for (int which = -1; which <= 1; which += 2) {
    const double p = h0 + 0.5 * which;  // candidate power of two
    if (p < 2.0) continue;
    const int k = std::ilogb(p);
    if (std::ldexp(1.0, k) != p || k < k_first || k > k_cap_) continue;
    loc.removable = true;
    loc.x0 = h0;
    loc.residue = (which == 1) ? 1.0 : -1.0;  // +1 at 2^k - 1/2, -1 at 2^k + 1/2
    loc.k = k;
    return loc;
  }
  return loc;
}

double SimpleExampleModel::tail_bound(double x) const {
  if (std::abs(x) > std::ldexp(1.0, k_cap_ - 1)) {
    throw std::invalid_argument("simple_example: |x| exceeds the truncation validity range");
  }
  return (16.0 / 9.0) * std::pow(4.0, -k_cap_);
}

double SimpleExampleModel::series(double x, double* deriv) const {
  (void)tail_bound(x);  // validity check
  KahanAccumulator s, ds;
  s.add(1.0 / (x - 0.5));
  if (deriv) ds.add(-1.0 / ((x - 0.5) * (x - 0.5)));
  for (int k = k_first; k <= k_cap_; ++k) {
    const double u = x - std::ldexp(1.0, k);
    const double den = u * u - 0.25;
    s.add(-1.0 / den);
    if (deriv) ds.add(2.0 * u / (den * den));
  }
  if (deriv) *deriv = ds.result();
  return s.result();
}

double SimpleExampleModel::series_without(double x, const Local& loc, double* deriv) const {
  (void)tail_bound(x);
  KahanAccumulator s, ds;
  if (loc.k == 0) {
    // Removed the 1/(x - 1/2) term; all pair terms are regular here.
    for (int k = k_first; k <= k_cap_; ++k) {
      const double u = x - std::ldexp(1.0, k);
      const double den = u * u - 0.25;
      s.add(-1.0 / den);
      if (deriv) ds.add(2.0 * u / (den * den));
    }
  } else {
    s.add(1.0 / (x - 0.5));
    if (deriv) ds.add(-1.0 / ((x - 0.5) * (x - 0.5)));
    for (int k = k_first; k <= k_cap_; ++k) {
      if (k == loc.k) continue;
      const double u = x - std::ldexp(1.0, k);
      const double den = u * u - 0.25;
      s.add(-1.0 / den);
      if (deriv) ds.add(2.0 * u / (den * den));
    }
    // Regular remainder of the removed pair term: -1/(x - x0 - 1) at the left
    // edge point x0 = 2^k - 1/2, +1/(x - x0 + 1) at the right edge point.
    const double shift = (loc.residue > 0.0) ? -1.0 : 1.0;
    const double w = x - loc.x0 + shift;
    s.add(loc.residue > 0.0 ? -1.0 / w : 1.0 / w);
    if (deriv) ds.add(loc.residue > 0.0 ? 1.0 / (w * w) : -1.0 / (w * w));
  }
  if (deriv) *deriv = ds.result();
  return s.result();
}

double SimpleExampleModel::eval(double x) const {
  const Local loc = classify(x);
  if (!loc.removable) return cospi(x) * series(x);
  const double h = x - loc.x0;
  const double sinc_term = (h == 0.0) ? kPi : std::sin(kPi * h) / h;
  const double a = -loc.residue * sinpi(loc.x0);
  return a * sinc_term + cospi(x) * series_without(x, loc);
}

EvalBudget SimpleExampleModel::eval_with_budget(double x) const {
  return {eval(x), std::abs(cospi(x)) * tail_bound(x)};
}

std::complex<double> SimpleExampleModel::eval_complex(std::complex<double> z) const {
  if (std::abs(z) > std::ldexp(1.0, k_cap_ - 1)) {
    throw std::invalid_argument("simple_example: |z| exceeds the truncation validity range");
  }
  std::complex<double> s = 1.0 / (z - 0.5);
  for (int k = k_first; k <= k_cap_; ++k) {
    const std::complex<double> u = z - std::ldexp(1.0, k);
    s -= 1.0 / (u * u - 0.25);
  }
  return std::cos(kPi * z) * s;
}

double SimpleExampleModel::derivative(double x) const {
  const Local loc = classify(x);
  if (!loc.removable) {
    double ds = 0.0;
    const double s = series(x, &ds);
    return -kPi * sinpi(x) * s + cospi(x) * ds;
  }
  const double h = x - loc.x0;
  const double a = -loc.residue * sinpi(loc.x0);
  // d/dh [sin(pi h)/h] expanded for |h| <= 1e-4; the next term is O(h^5).
  const double dsinc = -kPi * kPi * kPi * h / 3.0 + std::pow(kPi, 5) * h * h * h / 30.0;
  double ds = 0.0;
  const double s = series_without(x, loc, &ds);
  return a * dsinc - kPi * sinpi(x) * s + cospi(x) * ds;
}

double SimpleExampleModel::derivative_at_zero(double lambda) const { return derivative(lambda); }

double SimpleExampleModel::log_abs_imag_axis(double y) const {
  if (!(y > 0.0)) throw std::invalid_argument("log_abs_imag_axis: y must be positive");
  std::complex<double> s = 1.0 / (std::complex<double>(-0.5, y));
  for (int k = k_first; k <= k_cap_; ++k) {
    const std::complex<double> u = std::complex<double>(-std::ldexp(1.0, k), y);
    s -= 1.0 / (u * u - 0.25);
  }
  // |cos(pi i y)| = cosh(pi y), kept in log form to survive large y.
  const double log_cosh = kPi * y + std::log1p(std::exp(-2.0 * kPi * y)) - std::log(2.0);
  return log_cosh + std::log(std::abs(s));
}

// ---------------------------------------------------------------------------
// KadetsModel

KadetsModel::KadetsModel(double delta0, double delta, const IntervalFamily& family)
    : delta0_(delta0), delta_(delta), family_(family) {
  if (!(delta0 >= 0.5) || !(delta0 < delta) || !(delta < 1.0)) {
    throw std::domain_error("kadets: parameters must satisfy 1/2 <= delta0 < delta < 1");
  }
  for (std::size_t i = 0; i < family_.size(); ++i) {
    const Interval& iv = family_.at(i);
    if (!(iv.d <= iv.rho / 100.0)) {
      throw std::domain_error(
          "kadets: half-length exceeds rho/100 at k=" + std::to_string(family_.k_of(i)) +
          "; smallest admissible power-of-two index is k=" +
          std::to_string(min_admissible_k(delta0, delta)));
    }
    const auto m1 = static_cast<std::int64_t>(std::ceil(iv.lo()));
    const auto m2 = static_cast<std::int64_t>(std::floor(iv.hi()));
    if (m1 < 2 || m2 < m1) {
      throw std::domain_error("kadets: interval holds no usable integer band");
    }
    bands_.emplace_back(m1, m2);
  }
}

int KadetsModel::min_admissible_k(double delta0, double delta) {
  const double e = 2.0 * delta0 / (delta0 + delta);
  if (!(e < 1.0)) return 0;
  const double k = std::log(100.0) / ((1.0 - e) * std::log(2.0));
  return static_cast<int>(std::ceil(k));
}

std::pair<std::int64_t, std::int64_t> KadetsModel::band_range(std::size_t i) const {
  if (i >= bands_.size()) throw std::out_of_range("kadets: band index out of range");
  return bands_[i];
}

namespace {

// Log of |(z - 1/2) Gamma(1+d0)^2 / (Gamma(1+d0+z) Gamma(1+d0-z))| as a
// signed quantity for real z that is not a zero of the expression.
SignedLog base_signed_log(double x, double delta0) {
  SignedLog res = signed_log_of(x - 0.5);
  if (res.sign == 0.0) return res;
  res.log_abs += 2.0 * std::lgamma(1.0 + delta0);
  const double ax = std::abs(x);
  if (ax >= 32.0) {
    // The even factor 1/(Gamma(1+d0+x) Gamma(1+d0-x)) rewritten by reflection
    // so the two huge log-gammas only ever appear as a Stirling-safe ratio:
    //   sin(pi(delta0 - ax)) / pi * Gamma(ax - delta0) / Gamma(ax + 1 + delta0),
    // which costs ~5e-4 absolute log error if done as an lgamma difference.
    const double s = sinpi(delta0 - ax);
    if (s == 0.0) {
      throw std::logic_error("kadets base: unexpected lattice hit in reflection");
    }
    res.log_abs += std::log(std::abs(s) / kPi) +
                   lgamma_ratio(ax - delta0, ax + 1.0 + delta0);
    if (-s < 0.0) res.sign = -res.sign;
    return res;
  }
  const SignedLog gp = gamma_signed_log(1.0 + delta0 + x);
  const SignedLog gm = gamma_signed_log(1.0 + delta0 - x);
  return res / gp / gm;
}

}  // namespace

double KadetsModel::eval(double x) const {
  if (x == 0.5) return 0.0;
  // Structural zero and removed-zero detection by exact argument hits.
  const double wp = 1.0 + delta0_ + x;
  const double wm = 1.0 + delta0_ - x;
  std::ptrdiff_t removed_band = -1;
  std::int64_t removed_n = 0;
  if (is_exact_integer(wm) && wm <= 0.0) {
    // x = n + delta0 with n >= 1: a base zero, removed only inside a band.
    const auto n = static_cast<std::int64_t>(std::nearbyint(x - delta0_));
    for (std::size_t i = 0; i < bands_.size(); ++i) {
      if (n >= bands_[i].first && n <= bands_[i].second) {
        removed_band = static_cast<std::ptrdiff_t>(i);
        removed_n = n;
        break;
      }
    }
    if (removed_band < 0) return 0.0;
  }
  if (is_exact_integer(wp) && wp <= 0.0) return 0.0;  // x = -(n + delta0), never moved

  SignedLog res;
  if (removed_band >= 0) {
    // Base factor with its simple zero at x divided out:
    // lim (z-x)^{-1} G0(z) = (x - 1/2) Gamma(1+d0)^2 (-1)^n (n-1)! / Gamma(1+d0+x).
    res = signed_log_of(x - 0.5);
    res.log_abs += 2.0 * std::lgamma(1.0 + delta0_) +
                   lgamma_ratio(static_cast<double>(removed_n), wp);
    if (removed_n % 2 != 0) res.sign = -res.sign;
  } else {
    res = base_signed_log(x, delta0_);
    if (res.sign == 0) return 0.0;
  }

  for (std::size_t i = 0; i < bands_.size(); ++i) {
    const auto [m1, m2] = bands_[i];
    const double w_num = x + delta_;
    const double w_den = x - delta0_;
    SignedLog num = log_falling_product(w_num, m1, m2);
    if (num.sign == 0) return 0.0;  // x = n - delta, a moved zero
    SignedLog den;
    if (static_cast<std::ptrdiff_t>(i) == removed_band) {
      // The vanishing factor (x - (n + delta0)) was already divided out of
      // the base, so skip index n in the denominator product.
      den = log_falling_product(w_den, m1, removed_n - 1) *
            log_falling_product(w_den, removed_n + 1, m2);
    } else {
      den = log_falling_product(w_den, m1, m2);
    }
    if (den.sign == 0) {
      throw std::logic_error("kadets: denominator factor vanished unexpectedly");
    }
    res = res * num / den;
  }
  return res.value();
}

double KadetsModel::log_abs_base_int(double nu) const {
  if (!(nu >= 1.0)) throw std::invalid_argument("kadets: envelope needs nu >= 1");
  return std::log(nu - 0.5) + 2.0 * std::lgamma(1.0 + delta0_) +
         std::log(sinpi(delta0_) / kPi) + lgamma_ratio(nu - delta0_, nu + 1.0 + delta0_);
}

double KadetsModel::log_correction(double nu, std::size_t i, int* sign) const {
  const auto [m1d, m2d] = bands_[i];
  const auto m1 = static_cast<double>(m1d);
  const auto m2 = static_cast<double>(m2d);
  if (nu > m2) {
    if (sign) *sign = 1;
    return lgamma_ratio(nu + delta_ - m1 + 1.0, nu - delta0_ - m1 + 1.0) -
           lgamma_ratio(nu + delta_ - m2, nu - delta0_ - m2);
  }
  if (nu < m1) {
    if (sign) *sign = 1;
    return lgamma_ratio(m2 - nu + 1.0 - delta_, m2 - nu + 1.0 + delta0_) -
           lgamma_ratio(m1 - nu - delta_, m1 - nu + delta0_);
  }
  if (sign) *sign = -1;
  return std::log(sinpi(delta_) / sinpi(delta0_)) +
         lgamma_ratio(nu + delta_ - m1 + 1.0, nu - delta0_ - m1 + 1.0) +
         lgamma_ratio(m2 - nu + 1.0 - delta_, m2 - nu + 1.0 + delta0_);
}

double KadetsModel::integer_abs_envelope(double nu) const {
  double log_abs = log_abs_base_int(nu);
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    log_abs += log_correction(nu, i, nullptr);
  }
  return std::exp(log_abs);
}

SumResult KadetsModel::mass_on(std::int64_t lo, std::int64_t hi) const {
  if (lo < 1) throw std::invalid_argument("kadets: mass_on needs lo >= 1");
  if (hi < lo) return {0.0, 0.0};
  // Segment cuts at band boundaries; the envelope changes its analytic form
  // there, so each segment is aggregated separately.
  std::vector<std::pair<std::int64_t, std::int64_t>> segments;
  std::int64_t cur = lo;
  for (const auto& [m1, m2] : bands_) {
    if (m2 < cur || m1 > hi) continue;
    if (m1 > cur) segments.emplace_back(cur, m1 - 1);
    segments.emplace_back(std::max(cur, m1), std::min(hi, m2));
    cur = std::min(hi, m2) + 1;
    if (cur > hi) break;
  }
  if (cur <= hi) segments.emplace_back(cur, hi);

  auto phi2 = [this](double nu) {
    const double v = integer_abs_envelope(nu);
    return v * v;
  };
  SumResult total{0.0, 0.0};
  for (const auto& [a, b] : segments) {
    const SumResult part = sum_integer_range(a, b, phi2, nullptr, 200000);
    total.value += part.value;
    total.error_bound += part.error_bound;
  }
  return total;
}

std::vector<double> KadetsModel::band_edge_values(std::size_t i, int count) const {
  const auto [m1, m2] = band_range(i);
  (void)m1;
  std::vector<double> out;
  for (int j = 0; j < count; ++j) {
    out.push_back(std::abs(eval(static_cast<double>(m2 + j))));
  }
  return out;
}

std::complex<double> KadetsModel::eval_complex(std::complex<double> z) const {
  // Base through the complex log-gamma; corrections as literal products when
  // the bands are short, otherwise through gamma quotients.
  const std::complex<double> lg_p = lgamma_complex(std::complex<double>(1.0 + delta0_) + z);
  const std::complex<double> lg_m = lgamma_complex(std::complex<double>(1.0 + delta0_) - z);
  std::complex<double> log_g =
      std::log(z - 0.5) + 2.0 * std::lgamma(1.0 + delta0_) - lg_p - lg_m;
  for (const auto& [m1d, m2d] : bands_) {
    const std::complex<double> w1 = z + delta_;
    const std::complex<double> w2 = z - delta0_;
    const auto m1 = static_cast<double>(m1d);
    const auto m2 = static_cast<double>(m2d);
    log_g += lgamma_complex(w1 - m1 + 1.0) - lgamma_complex(w1 - m2) -
             lgamma_complex(w2 - m1 + 1.0) + lgamma_complex(w2 - m2);
  }
  return std::exp(log_g);
}

double KadetsModel::log_abs_imag_axis(double y) const {
  if (!(y > 0.0)) throw std::invalid_argument("log_abs_imag_axis: y must be positive");
  const std::complex<double> z(0.0, y);
  const std::complex<double> lg_p = lgamma_complex(std::complex<double>(1.0 + delta0_) + z);
  const std::complex<double> lg_m = lgamma_complex(std::complex<double>(1.0 + delta0_) - z);
  double log_abs = 0.5 * std::log(0.25 + y * y) + 2.0 * std::lgamma(1.0 + delta0_) -
                   lg_p.real() - lg_m.real();
  for (const auto& [m1d, m2d] : bands_) {
    const std::complex<double> w1 = z + delta_;
    const std::complex<double> w2 = z - delta0_;
    const auto m1 = static_cast<double>(m1d);
    const auto m2 = static_cast<double>(m2d);
    log_abs += (lgamma_complex(w1 - m1 + 1.0) - lgamma_complex(w1 - m2) -
                lgamma_complex(w2 - m1 + 1.0) + lgamma_complex(w2 - m2))
                   .real();
  }
  return log_abs;
}

double KadetsModel::derivative(double x) const {
  // Logarithmic derivative; valid away from zeros.
  const double g = eval(x);
  double ld = 1.0 / (x - 0.5) - digamma(1.0 + delta0_ + x) + digamma(1.0 + delta0_ - x);
  for (const auto& [m1d, m2d] : bands_) {
    const auto m1 = static_cast<double>(m1d);
    const auto m2 = static_cast<double>(m2d);
    ld += digamma(x + delta_ - m1 + 1.0) - digamma(x + delta_ - m2) -
          digamma(x - delta0_ - m1 + 1.0) + digamma(x - delta0_ - m2);
  }
  return g * ld;
}

double KadetsModel::derivative_at_zero(double lambda) const {
  // Snap to the nearest structural zero; all zeros of this model are of one
  // of the forms below.
  const double shifted = lambda + delta_;
  const double unshifted = std::abs(lambda) - delta0_;
  if (std::abs(lambda - 0.5) <= 1e-3) {
    // G'(1/2) = Gamma(1+d0)^2 / (Gamma(3/2+d0) Gamma(1/2+d0)) times corrections.
    SignedLog res;
    res.log_abs = 2.0 * std::lgamma(1.0 + delta0_) - std::lgamma(1.5 + delta0_) -
                  std::lgamma(0.5 + delta0_);
    res.sign = 1;
    for (const auto& [m1, m2] : bands_) {
      res = res * log_falling_product(0.5 + delta_, m1, m2) /
            log_falling_product(0.5 - delta0_, m1, m2);
    }
    return res.value();
  }
  if (std::abs(shifted - std::nearbyint(shifted)) <= 1e-3) {
    const auto n = static_cast<std::int64_t>(std::nearbyint(shifted));
    for (std::size_t i = 0; i < bands_.size(); ++i) {
      if (n < bands_[i].first || n > bands_[i].second) continue;
      const double lam = static_cast<double>(n) - delta_;
      // Moved zero: drop the factor (x - (n - delta)) and evaluate the rest.
      SignedLog res = base_signed_log(lam, delta0_);
      for (std::size_t j = 0; j < bands_.size(); ++j) {
        const auto [m1, m2] = bands_[j];
        SignedLog num;
        if (j == i) {
          num = log_falling_product(lam + delta_, m1, n - 1) *
                log_falling_product(lam + delta_, n + 1, m2);
        } else {
          num = log_falling_product(lam + delta_, m1, m2);
        }
        res = res * num / log_falling_product(lam - delta0_, m1, m2);
      }
      return res.value();
    }
  }
  if (std::abs(unshifted - std::nearbyint(unshifted)) <= 1e-3) {
    const auto n = static_cast<std::int64_t>(std::nearbyint(unshifted));
    if (n >= 1) {
      const double mu = static_cast<double>(n) + delta0_;  // positive-side zero location
      // Base derivative at mu via the reciprocal-gamma residue.
      SignedLog base;
      base.log_abs = std::log(std::abs(mu - 0.5)) + 2.0 * std::lgamma(1.0 + delta0_) +
                     lgamma_ratio(static_cast<double>(n), 1.0 + delta0_ + mu);
      base.sign = (mu > 0.5 ? 1 : -1) * (n % 2 == 0 ? 1 : -1);
      if (lambda < 0.0) {
        // G0(z) = (z - 1/2) E(z) with E even and E' odd, so the slope at -mu
        // is the slope at mu scaled by (mu + 1/2)/(mu - 1/2), same sign.
        base.log_abs += std::log((mu + 0.5) / (mu - 0.5));
      }
      const double lam = lambda < 0.0 ? -mu : mu;
      SignedLog res = base;
      for (const auto& [m1, m2] : bands_) {
        res = res * log_falling_product(lam + delta_, m1, m2) /
              log_falling_product(lam - delta0_, m1, m2);
      }
      return res.value();
    }
  }
  throw std::domain_error("kadets: point is not recognizably a zero");
}

// ---------------------------------------------------------------------------
// pv products

EvalBudget pv_product(const Spectrum& spectrum, std::complex<double> z, const PvOptions& opts,
                      std::complex<double>* value_out) {
  if (!(opts.tol > 0.0) || opts.max_doublings < 2) {
    throw std::invalid_argument("pv_product: tol must be positive, max_doublings >= 2");
  }
  const double r0 = std::exp2(std::ceil(std::log2(std::max(64.0, 4.0 * (std::abs(z) + 1.0)))));
  std::vector<std::complex<double>> prev_row;
  double last_change = std::numeric_limits<double>::infinity();
  double prev_change = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= opts.max_doublings; ++i) {
    const double r = r0 * std::exp2(i);
    std::complex<double> p = 1.0;
    for (double lambda : spectrum.points_in(-r, r)) {
      if (lambda == 0.0) {
        throw std::invalid_argument("pv_product: spectrum contains zero");
      }
      const std::complex<double> factor = 1.0 - z / lambda;
      if (factor == 0.0) {
        if (value_out) *value_out = 0.0;
        return {0.0, 0.0};
      }
      p *= factor;
    }
    std::vector<std::complex<double>> row(static_cast<std::size_t>(i) + 1);
    row[0] = p;
    for (int j = 1; j <= i; ++j) {
      row[static_cast<std::size_t>(j)] =
          row[static_cast<std::size_t>(j - 1)] +
          (row[static_cast<std::size_t>(j - 1)] - prev_row[static_cast<std::size_t>(j - 1)]) /
              (std::exp2(j) - 1.0);
    }
    if (i >= 1) {
      const std::complex<double> best = row.back();
      const std::complex<double> prev_best = prev_row.back();
      prev_change = last_change;
      last_change = std::abs(best - prev_best) /
                    std::max(std::abs(best), std::numeric_limits<double>::min());
      if (last_change <= opts.tol) {
        if (value_out) *value_out = best;
        return {best.real(), last_change * std::abs(best)};
      }
    }
    prev_row = std::move(row);
  }
  throw ConvergenceError("pv_product: extrapolation did not reach tolerance",
                         last_change, prev_change);
}

PvProductModel::PvProductModel(std::shared_ptr<const Spectrum> spectrum, PvOptions opts)
    : spectrum_(std::move(spectrum)), opts_(opts) {
  if (!spectrum_) throw std::invalid_argument("pv model: spectrum must not be null");
}

double PvProductModel::eval(double x) const {
  std::complex<double> v;
  (void)pv_product(*spectrum_, {x, 0.0}, opts_, &v);
  return v.real();
}

EvalBudget PvProductModel::eval_with_budget(double x) const {
  std::complex<double> v;
  EvalBudget b = pv_product(*spectrum_, {x, 0.0}, opts_, &v);
  b.value = v.real();
  return b;
}

std::complex<double> PvProductModel::eval_complex(std::complex<double> z) const {
  std::complex<double> v;
  (void)pv_product(*spectrum_, z, opts_, &v);
  return v;
}

double PvProductModel::derivative(double x) const { return GenFnModel::derivative(x); }

double PvProductModel::derivative_at_zero(double lambda) const {
  return GenFnModel::derivative(lambda);
}

}  // namespace pwsynth
