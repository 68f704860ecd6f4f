#include "pwsynth/summation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pwsynth {
namespace {

struct PanelResult {
  double value;
  double error;
};

PanelResult simpson_recurse(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double abs_tol, int depth,
                            int max_depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double h = b - a;
  double left = (h / 12.0) * (fa + 4.0 * flm + fm);
  double right = (h / 12.0) * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth >= max_depth || std::abs(delta) <= 15.0 * abs_tol) {
    return {left + right + delta / 15.0, std::abs(delta) / 15.0};
  }
  PanelResult l = simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * abs_tol,
                                  depth + 1, max_depth);
  PanelResult r = simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * abs_tol,
                                  depth + 1, max_depth);
  return {l.value + r.value, l.error + r.error};
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double rel_tol, int max_depth) {
  if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: a > b");
  if (a == b) return {0.0, 0.0};
  double fa = f(a);
  double fb = f(b);
  double fm = f(0.5 * (a + b));
  double whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
  double scale = std::max({std::abs(whole), std::abs(fa) * (b - a), 1e-300});
  double abs_tol = rel_tol * scale;
  PanelResult r =
      simpson_recurse(f, a, b, fa, fm, fb, whole, abs_tol, 0, max_depth);
  return {r.value, r.error};
}

SumResult sum_integer_range(std::int64_t a, std::int64_t b,
                            const std::function<double(double)>& phi,
                            const std::function<double(double)>* dphi,
                            std::int64_t exact_limit, std::int64_t edge_width,
                            double quad_rel_tol) {
  if (a > b) return {0.0, 0.0};
  std::int64_t count = b - a + 1;
  if (count <= exact_limit || count <= 2 * edge_width + 16) {
    KahanAccumulator acc;
    for (std::int64_t n = a; n <= b; ++n) acc.add(phi(static_cast<double>(n)));
    return {acc.result(), 0.0};
  }

  // Edge blocks [a, m0-1] and [m1+1, b] exactly; interior [m0, m1] by
  // Euler-Maclaurin midpoint rule.
  std::int64_t m0 = a + edge_width;
  std::int64_t m1 = b - edge_width;

  KahanAccumulator acc;
  for (std::int64_t n = a; n < m0; ++n) acc.add(phi(static_cast<double>(n)));
  for (std::int64_t n = m1 + 1; n <= b; ++n)
    acc.add(phi(static_cast<double>(n)));

  double lo = static_cast<double>(m0) - 0.5;
  double hi = static_cast<double>(m1) + 0.5;
  QuadResult integral = integrate_adaptive(phi, lo, hi, quad_rel_tol);

  auto deriv = [&](double x) {
    if (dphi) return (*dphi)(x);
    double h = 0.5;
    return (phi(x + h) - phi(x - h)) / (2.0 * h);
  };
  double d_hi = deriv(hi);
  double d_lo = deriv(lo);
  double correction = -(d_hi - d_lo) / 24.0;

  // Next Euler-Maclaurin term is (7/5760) [phi''(x)]' integrated; bound it by
  // the third-derivative magnitude at both ends (finite difference, h = 1)
  // times the interval width, with a safety factor.
  auto third = [&](double x) {
    double h = 1.0;
    return (phi(x + 2 * h) - 2 * phi(x + h) + 2 * phi(x - h) - phi(x - 2 * h)) /
           (2 * h * h * h);
  };
  double t_mag = std::max(std::abs(third(lo)), std::abs(third(hi)));
  double em_bound = (7.0 / 5760.0) * t_mag * (hi - lo) * 4.0;
  double err = em_bound + integral.error_estimate +
               quad_rel_tol * std::abs(integral.value);

  acc.add(integral.value);
  acc.add(correction);
  return {acc.result(), err};
}

}  // namespace pwsynth
