#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pwsynth/intervals.hpp"
#include "pwsynth/summation.hpp"

namespace pwsynth {

struct EvalBudget {
  double value = 0.0;
  double tail = 0.0;  // bound or estimate for the truncation part of the error
};

struct ZeroEntry {
  double lambda = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double g_lo = 0.0;  // value at bracket_lo, strictly opposite in sign to g_hi
  double g_hi = 0.0;
  double value = 0.0;  // |value| <= 1e-10 * max(|g_lo|, |g_hi|)
  double deriv = 0.0;  // nonzero
};

struct ZeroList {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<ZeroEntry> zeros;

  // Index of the entry whose lambda equals x to within tol, or -1.
  std::ptrdiff_t find(double x, double tol = 0.0) const;
};

struct ZeroFindOptions {
  double grid = 1.0 / 64.0;
  double bisect_tol = 1e-13;
};

// Real-analytic function on R given by a convergent product or series, with
// an optional truncation budget and optional closed-form derivatives.
class GenFnModel {
 public:
  virtual ~GenFnModel() = default;
  virtual std::string kind() const = 0;

  virtual double eval(double x) const = 0;
  virtual EvalBudget eval_with_budget(double x) const { return {eval(x), 0.0}; }
  virtual std::complex<double> eval_complex(std::complex<double> z) const = 0;

  virtual bool has_analytic_derivative() const { return false; }
  // Derivative at a point that is not a zero of the function. The default
  // raises; callers must check has_analytic_derivative first or use the
  // finite-difference helper below.
  virtual double derivative(double x) const;
  // Derivative at a zero lambda of the function (finite and nonzero for the
  // models here, which have simple zeros only).
  virtual double derivative_at_zero(double lambda) const;

  // log |G(iy)| for y > 0, stable against overflow of e^{pi y}.
  virtual double log_abs_imag_axis(double y) const;

  // Zeros on [lo, hi] via a cached sign-change scan; identical inputs reuse
  // the cached list.
  std::shared_ptr<const ZeroList> zeros_in(double lo, double hi,
                                           const ZeroFindOptions& opts = {}) const;

 private:
  mutable std::mutex cache_mutex_;
  mutable std::map<std::tuple<long long, long long, long long>,
                   std::shared_ptr<const ZeroList>>
      zero_cache_;
};

// Sign-change scan on a uniform grid followed by bisection. Grid nodes sit on
// multiples of the grid step, so zeros that are exactly representable on the
// grid are emitted exactly. Each zero gets a certified bracket with strictly
// opposite signs.
ZeroList find_zeros(const GenFnModel& model, double lo, double hi,
                    const ZeroFindOptions& opts = {});

// Model values at all integers of [-N, N] with an inside/outside split
// against an exclusion list of intervals. sum_sq_outside accumulates G(n)^2
// over integers not covered by any exclusion interval, with partial sums
// recorded at |n| <= N/8, N/4, N/2, N.
struct IntegerSamples {
  std::int64_t N = 0;
  std::vector<double> g;  // g[i] = G(i - N)
  double sum_sq_outside = 0.0;
  std::vector<double> outside_partials;
  double value_at(std::int64_t n) const { return g[static_cast<std::size_t>(n + N)]; }
};

IntegerSamples samples_on_integers(const GenFnModel& model,
                                   const std::vector<Interval>& exclude, std::int64_t N);

// cos(pi x) times a rational series with one lacunary pole pair per scale:
//   S(x) = 1/(x - 1/2) - sum_{k=10}^{k_cap} 1 / ((x - 2^k)^2 - 1/4).
// The function extends analytically across the half-integer points where
// cos(pi x) and a pole of S cancel.
class SimpleExampleModel final : public GenFnModel {
 public:
  explicit SimpleExampleModel(int k_cap = 60);
  std::string kind() const override { return "simple_example"; }

  double eval(double x) const override;
  EvalBudget eval_with_budget(double x) const override;
  std::complex<double> eval_complex(std::complex<double> z) const override;
  bool has_analytic_derivative() const override { return true; }
  double derivative(double x) const override;
  double derivative_at_zero(double lambda) const override;
  double log_abs_imag_axis(double y) const override;

  int k_cap() const { return k_cap_; }
  static constexpr int k_first = 10;

 private:
  struct Local {
    bool removable = false;
    double x0 = 0.0;      // nearest removable point when within radius
    double residue = 0.0; // residue of S at x0
    int k = 0;            // scale of x0, 0 for x0 = 1/2
  };
  Local classify(double x) const;
  double series(double x, double* deriv = nullptr) const;          // S(x)
  double series_without(double x, const Local& loc, double* deriv = nullptr) const;
  double tail_bound(double x) const;

  int k_cap_;
};

// Perturbed sine-type function built from a gamma-quotient base
//   G0(z) = (z - 1/2) Gamma(1 + delta0)^2 / (Gamma(1 + delta0 + z) Gamma(1 + delta0 - z))
// with, inside each configured interval, the zeros n + delta0 moved to
// n - delta. Stores the single-length intervals I'_k; callers that need the
// doubled intervals of a breaking run pass 2 d_k themselves.
class KadetsModel final : public GenFnModel {
 public:
  KadetsModel(double delta0, double delta, const IntervalFamily& family);
  std::string kind() const override { return "kadets"; }

  double eval(double x) const override;
  std::complex<double> eval_complex(std::complex<double> z) const override;
  bool has_analytic_derivative() const override { return true; }
  double derivative(double x) const override;
  double derivative_at_zero(double lambda) const override;
  double log_abs_imag_axis(double y) const override;

  double delta0() const { return delta0_; }
  double delta() const { return delta_; }
  const IntervalFamily& family() const { return family_; }

  // Integer index range [m1_k, m2_k] of interval k.
  std::pair<std::int64_t, std::int64_t> band_range(std::size_t i) const;
  // |G(nu)| for real nu >= 1 through gamma quotients; exact at integers and
  // smooth between band boundaries, suitable for aggregated summation.
  double integer_abs_envelope(double nu) const;
  // sum of G(n)^2 over integers n in [lo, hi], 1 <= lo. Uses an exact
  // compensated loop for short ranges and endpoint-exact aggregation for
  // long ones, splitting at band boundaries where the envelope changes form.
  SumResult mass_on(std::int64_t lo, std::int64_t hi) const;
  // |G(n)| for the first integers to the right of band i's upper edge.
  std::vector<double> band_edge_values(std::size_t i, int count) const;

  // Half-length d = rho^{2 delta0 / (delta0 + delta)} admits the construction
  // only when d <= rho / 100; this returns the smallest power-of-two exponent
  // k for which that holds.
  static int min_admissible_k(double delta0, double delta);

 private:
  double log_abs_base_int(double nu) const;  // log |G0(nu)|, nu >= 1
  double log_correction(double nu, std::size_t i, int* sign) const;
  double delta0_;
  double delta_;
  IntervalFamily family_;
  std::vector<std::pair<std::int64_t, std::int64_t>> bands_;
};

struct PvOptions {
  double tol = 1e-10;
  int max_doublings = 40;
};

// Principal-value product over a symmetric truncation of the spectrum,
// accelerated by repeated radius doubling with polynomial extrapolation in
// 1/R. Throws ConvergenceError when the doubling cap is hit first.
EvalBudget pv_product(const Spectrum& spectrum, std::complex<double> z,
                      const PvOptions& opts, std::complex<double>* value_out);

class PvProductModel final : public GenFnModel {
 public:
  PvProductModel(std::shared_ptr<const Spectrum> spectrum, PvOptions opts = {});
  std::string kind() const override { return "pv"; }

  double eval(double x) const override;
  EvalBudget eval_with_budget(double x) const override;
  std::complex<double> eval_complex(std::complex<double> z) const override;
  double derivative(double x) const override;
  double derivative_at_zero(double lambda) const override;

  const Spectrum& spectrum() const { return *spectrum_; }

 private:
  std::shared_ptr<const Spectrum> spectrum_;
  PvOptions opts_;
};

}  // namespace pwsynth
