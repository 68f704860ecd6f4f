// gamma.hpp -- gamma-family numerics used by the generating-function models.
//
// Everything here is arranged so that no lgamma call ever sees an argument
// whose log-gamma magnitude dwarfs the quantity being computed:
//   - products prod_{n=a}^{b} (w - n) are split so all gamma arguments stay
//     positive, with the sign tracked combinatorially;
//   - ratios Gamma(x)/Gamma(y) with x, y large and close are computed by a
//     Stirling difference instead of subtracting two ~1e12-sized logs.

#pragma once

#include <complex>
#include <cstdint>

namespace pwsynth {

// sin(pi x), cos(pi x) with exact argument reduction: exact zeros at the
// integer / half-integer lattice.
double sinpi(double x);
double cospi(double x);

// Magnitude-and-sign representation for quantities built from log-space
// arithmetic.  sign is -1, 0, or +1; when sign == 0 log_abs is meaningless.
struct SignedLog {
  double log_abs = 0.0;
  double sign = 1.0;

  double value() const { return sign == 0.0 ? 0.0 : sign * std::exp(log_abs); }

  SignedLog operator*(const SignedLog& o) const {
    if (sign == 0.0 || o.sign == 0.0) return {0.0, 0.0};
    return {log_abs + o.log_abs, sign * o.sign};
  }
  SignedLog operator/(const SignedLog& o) const {
    return {log_abs - o.log_abs, sign * o.sign};
  }
};

SignedLog signed_log_of(double x);

// Sign of Gamma(x) at non-pole real x (positive x -> +1; negative x
// alternates by unit interval).  Throws PoleError at 0, -1, -2, ...
double gamma_sign(double x);

// log |Gamma(x)| for any non-pole real x (reflection below zero).
double lgamma_abs(double x);

// Gamma(x) as SignedLog for non-pole real x.
SignedLog gamma_signed_log(double x);

// log(Gamma(x)/Gamma(y)) for x, y > 0.  Uses a Stirling-series difference
// when min(x, y) >= 32 so that nearby huge arguments keep full relative
// precision; falls back to lgamma subtraction otherwise.
double lgamma_ratio(double x, double y);

// prod_{n=a}^{b} (w - n) over consecutive integers, as SignedLog.
// Exact zero (sign 0) if w is an integer inside [a, b].
SignedLog log_falling_product(double w, std::int64_t a, std::int64_t b);

// Principal-branch log Gamma(z) for complex z (Lanczos g = 7), with the
// reflection handled through a log-of-sine form that cannot overflow for
// large |Im z|.
std::complex<double> lgamma_complex(std::complex<double> z);

// Digamma psi(x) for real non-pole x (recurrence to x >= 10, then the
// asymptotic series; reflection below zero).
double digamma(double x);

}  // namespace pwsynth
