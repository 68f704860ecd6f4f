// summation.hpp -- compensated accumulation and aggregated sums over huge
// integer ranges.
//
// Sums over index sets like [rho - 2d, rho + 2d] with rho ~ 2^38 cannot be
// walked term by term.  sum_integer_range keeps exact (compensated) loops for
// small counts and switches to an Euler-Maclaurin midpoint scheme for large
// ones: both edges are summed exactly and the interior is replaced by an
// integral plus a first derivative correction, with an error bound tracking
// the dropped third-derivative term and the quadrature tolerance.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace pwsynth {

// Neumaier-compensated accumulator.  add() never loses the low-order part of
// either operand; result() folds the carry back in.
class KahanAccumulator {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double result() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct SumResult {
  double value = 0.0;
  double error_bound = 0.0;  // absolute; 0 for exact loops up to roundoff
};

// Adaptive Simpson quadrature on [a, b] with relative tolerance `rel_tol`
// (floored internally by an absolute tolerance scaled to the first estimate).
// Depth is capped; on cap the current panel estimate is accepted and its
// discrepancy folded into the reported error.
struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double rel_tol = 1e-10,
                              int max_depth = 40);

// Sum of phi(n) for integer n in [a, b] (inclusive).  count <= exact_limit
// uses a compensated loop.  Larger ranges use edge-exact blocks of
// `edge_width` terms plus the Euler-Maclaurin midpoint rule on the interior:
//
//   sum_{m0..m1} phi(n)  ~=  integral_{m0-1/2}^{m1+1/2} phi
//                            - (1/24) [phi'(m1+1/2) - phi'(m0-1/2)]
//
// phi must be smooth on the interior (no poles, no sign oscillation).  The
// derivative is taken by central difference with h = 1/2 unless `dphi` is
// provided.  The error bound combines the next Euler-Maclaurin term
// (7/5760 * integral |phi'''|, estimated by finite differences at the ends
// and scaled by the width) with the quadrature error estimate.
SumResult sum_integer_range(std::int64_t a, std::int64_t b,
                            const std::function<double(double)>& phi,
                            const std::function<double(double)>* dphi = nullptr,
                            std::int64_t exact_limit = 2000000,
                            std::int64_t edge_width = 4096,
                            double quad_rel_tol = 1e-10);

}  // namespace pwsynth
