#pragma once

#include <cstdint>
#include <vector>

#include "pwsynth/genfun.hpp"
#include "pwsynth/intervals.hpp"

namespace pwsynth {

struct BreakerOptions {
  double eta = 0.01;           // prefix-drop threshold on sum d/rho
  double fp_rel_tol = 1e-12;   // fixed-point stop, relative step in Banach norm
  int fp_max_iters = 200;
  double cell_length = 4.0;    // candidate-cell partition length
  double density_C = 4.0;      // comparator for the observed zero-gap
  double s_rescale = 1.0;      // multiplies every s_k (1.0 = off)
  std::int64_t window = std::int64_t{1} << 20;
};

// Empirical checks of the standing assumptions and summability conditions.
// The window must cover every side interval with a margin of 2 s_k; smaller
// windows are a precondition error.
struct HypothesisReport {
  std::vector<double> g;       // sum of G(n)^2 over each interval's integers
  std::vector<double> s;
  SideIntervalData sides;
  std::vector<bool> degenerate;
  std::vector<bool> throwaway;  // d_k >= 0.1 s_k, too little mass to matter

  // Square-summability of G off the intervals, watched over doubling windows.
  std::vector<double> outside_partials;
  double outside_sq = 0.0;
  int rule_exclusions = 0;  // rule-generated intervals excluded past the range
  bool outside_ok = false;

  // Weighted side-interval sums s_k * sum_{J_k} G(n)^2 with a ratio test.
  std::vector<double> side_terms;
  double side_sum = 0.0;
  double side_tail_ratio = 0.0;
  bool side_ok = false;

  bool s_bound_ok = false;  // no s_k above rho_k / 10

  // Partial sums of d/rho with a ratio test on the increments.
  std::vector<double> log_length_partials;
  double log_length_total = 0.0;
  double log_length_tail_ratio = 0.0;
  bool log_length_ok = false;

  // Zero-set observations on the scanned subranges.
  double scan_base_lo = 0.0, scan_base_hi = 0.0;
  std::size_t zero_count = 0;
  double min_zero_dist_to_int = 0.0;
  double max_zero_gap = 0.0;
  bool zero_dist_ok = false;
  bool zero_gap_ok = false;

  // r_j = log|G(i 2^j)| - pi 2^j for j = 0..7, expected decreasing.
  std::vector<double> axis_decay;
  bool axis_ok = false;

  bool all_pass() const;
};

HypothesisReport check_hypotheses(const GenFnModel& model, const IntervalFamily& family,
                                  const BreakerOptions& opts);

// One zero of the model per candidate interval, chosen from the middle half
// of one of the two side intervals: within each length-C cell the cheapest
// zero survives, the per-side winner minimizes the weighted tail cost
//   cost(lambda) = sum_{n in J_k} s_k^2 G(n)^2 / (n - lambda)^2,
// and the side is chosen greedily to keep prod t_j / rho_j nearest 1 in log
// scale, inside [1e-3, 1e3], with ties resolved toward the plus side.
struct TkSelection {
  std::vector<double> t;
  std::vector<int> side;  // -1 or +1
  std::vector<double> cost;
  std::vector<double> running_product;
};

TkSelection select_tk(const GenFnModel& model, const IntervalFamily& family,
                      const HypothesisReport& hyp, const BreakerOptions& opts);

// m(x) = prod_k (1 - x/rho_k) / (1 - x/t_k). Exact zero at the centers;
// evaluation at a t_k is a pole error.
double eval_m(double x, const IntervalFamily& family, const std::vector<double>& t);

// Empirical two-sided comparison of |m(x)| against |x - rho_k| / |x - t_k|
// on the band between neighboring midpoints, reported per interval.
struct BandRatio {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

std::vector<BandRatio> m_band_ratios(const IntervalFamily& family,
                                     const std::vector<double>& t,
                                     int samples_per_band = 64);

// Samples a_n = (-1)^n G(n) m(n) kept only on {0} and the interval integer
// sets (windows reach 2^20 and centers 2^45, a dense vector is impossible).
struct IntervalSamples {
  struct PerInterval {
    std::int64_t n_lo = 0;
    std::int64_t n_hi = 0;
    std::vector<double> a;
    std::vector<double> m;  // m(n) alongside, for identity checks
  };
  double a0 = 1.0;
  double m0 = 1.0;
  std::vector<PerInterval> per_k;
};

struct FSequence {
  std::int64_t window = 0;
  IntervalSamples samples;
  std::vector<double> inside_sq;           // sum over I_k of f(n)^2
  std::vector<double> inside_bound_ratio;  // inside_sq * s^2 / (d^2 g)
  double outside_sq = 0.0;                 // off {0} and the intervals
  std::vector<double> outside_partials;
  double side_sq = 0.0;                    // over the side intervals
};

FSequence build_f(const GenFnModel& model, const IntervalFamily& family,
                  const TkSelection& sel, const HypothesisReport& hyp,
                  const BreakerOptions& opts);

// Diagonally-preconditioned fixed point for the correction coefficients c:
//   c_k <- D_k^{-1} (-1/rho_k - sum_{m != k} c_m A_{km}),
//   D_k = sum_{I_k} a_n^2/(rho_k - n)^2,
//   A_{km} = sum_{I_m} a_n^2 / ((rho_k - n)(rho_m - n)).
// Starts from c = 0; stops when the Banach-weighted step max |dc_k|/d_k
// falls below fp_rel_tol relative to the iterate norm. A step ratio >= 1 is
// a contraction failure whose message suggests dropping a longer prefix.
struct FixedPointResult {
  std::vector<double> c;
  std::vector<double> D;
  std::vector<std::vector<double>> A;  // zero diagonal
  std::vector<double> step_norms;
  int iterations = 0;
  double last_step_ratio = 0.0;
  double banach_norm_c = 0.0;      // max |c_k| / d_k
  double linear_norm_bound = 0.0;  // sup_k (1/(D_k d_k)) sum_m |A_km| d_m
};

FixedPointResult solve_fixed_point(const IntervalFamily& family,
                                   const IntervalSamples& samples,
                                   const BreakerOptions& opts);

// End-to-end residual audit of one breaking run. The dual sequence is
//   b_0 = 1/a_0, b_n = c_k a_n / (rho_k - n) on I_k, zero elsewhere,
// and every reported residual carries a computable budget: the interpolation
// residuals eps_m = S(rho_m) propagate exactly through
//   S(z)/m(z) - sum_n a_n b_n / (m(n)(z - n)) = sum_m eps_m kappa_m / (z - rho_m)
// with kappa_m the residue of 1/m at rho_m, so orthogonality sums at the t_k
// and off-grid identity samples are compared against eps-driven budgets plus
// a compensated-roundoff allowance.
struct BreakerReport {
  std::vector<double> rho, d, g, s, t, c;
  std::vector<int> side;

  std::vector<double> s_residual;
  double s_residual_max = 0.0;
  double s_target = 0.0;
  bool s_ok = false;

  std::vector<double> kappa;
  std::vector<double> orth_residual;
  std::vector<double> orth_budget;
  bool orth_ok = false;

  std::vector<double> identity_z;
  std::vector<double> identity_gap;
  std::vector<double> identity_budget;
  bool identity_ok = false;

  double pairing = 0.0;
  double pairing_constant = 0.0;  // (1 - pairing) / (||c||_B^2 sum d/rho)
  bool pairing_ok = false;

  double b0 = 0.0;
  double sum_b_sq = 0.0;
  double bsq_constant = 0.0;  // (sum b^2 - b0^2) / (||c||_B sum d/rho)

  std::vector<double> denom_scale;  // D_k d_k rho_k, an O(1) diagnostic
  std::vector<BandRatio> band_ratios;

  bool all_targets_met() const { return s_ok && orth_ok && identity_ok && pairing_ok; }
};

BreakerReport verify_breaker(const IntervalFamily& family, const TkSelection& sel,
                             const FSequence& f, const FixedPointResult& fp,
                             const HypothesisReport& hyp);

}  // namespace pwsynth
