#include "pwsynth/gamma.hpp"

#include <cmath>
#include <stdexcept>

#include "pwsynth/errors.hpp"

namespace pwsynth {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogPi = 1.1447298858494001741;
constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Lanczos g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

bool is_integer(double x) { return x == std::floor(x); }

// Stirling tail S(z) = sum B_2n / (2n (2n-1) z^(2n-1)); four terms reach
// ~1e-17 absolute for z >= 32.
double stirling_tail(double z) {
  double w = 1.0 / z;
  double w2 = w * w;
  return w * (1.0 / 12.0 +
              w2 * (-1.0 / 360.0 +
                    w2 * (1.0 / 1260.0 + w2 * (-1.0 / 1680.0))));
}

// log sin(pi z) on the principal-ish branch, overflow-safe for large |Im z|.
std::complex<double> log_sin_pi(std::complex<double> z) {
  if (z.imag() == 0.0) {
    double s = sinpi(z.real());
    if (s == 0.0)
      throw PoleError("log_sin_pi: zero of sin(pi z)", z.real());
    return {std::log(std::abs(s)), s > 0 ? 0.0 : kPi};
  }
  if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
  // Im z > 0: sin(pi z) = -e^{-i pi z} (1 - e^{2 pi i z}) / (2 i)
  std::complex<double> i_unit(0.0, 1.0);
  std::complex<double> w = std::exp(2.0 * kPi * i_unit * z);  // |w| < 1
  return -i_unit * kPi * z + std::log(1.0 - w) -
         std::log(2.0 * i_unit) + std::complex<double>(0.0, kPi);
}

}  // namespace

double sinpi(double x) {
  double r = std::remainder(x, 2.0);  // [-1, 1]
  double s = 1.0;
  if (r < 0) {
    r = -r;
    s = -1.0;
  }
  if (r <= 0.25) return s * std::sin(kPi * r);
  if (r < 0.75) return s * std::cos(kPi * (r - 0.5));
  return s * std::sin(kPi * (1.0 - r));
}

double cospi(double x) {
  double r = std::fabs(std::remainder(x, 2.0));  // [0, 1]
  if (r <= 0.25) return std::cos(kPi * r);
  if (r < 0.75) return std::sin(kPi * (0.5 - r));
  return -std::cos(kPi * (1.0 - r));
}

SignedLog signed_log_of(double x) {
  if (x == 0.0) return {0.0, 0.0};
  return {std::log(std::abs(x)), x > 0 ? 1.0 : -1.0};
}

double gamma_sign(double x) {
  if (x > 0.0) return 1.0;
  if (is_integer(x)) throw PoleError("gamma_sign: pole of Gamma", x);
  std::int64_t m = static_cast<std::int64_t>(std::floor(-x));
  return (m % 2 == 0) ? -1.0 : 1.0;
}

double lgamma_abs(double x) {
  if (x > 0.0) return std::lgamma(x);
  if (is_integer(x)) throw PoleError("lgamma_abs: pole of Gamma", x);
  // |Gamma(x)| = pi / (|sin(pi x)| Gamma(1 - x))
  return kLogPi - std::log(std::abs(sinpi(x))) - std::lgamma(1.0 - x);
}

SignedLog gamma_signed_log(double x) { return {lgamma_abs(x), gamma_sign(x)}; }

double lgamma_ratio(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw std::domain_error("lgamma_ratio: arguments must be positive");
  if (std::min(x, y) < 32.0) return std::lgamma(x) - std::lgamma(y);
  double d = x - y;
  // (x-1/2) log x - (y-1/2) log y  =  d log x + (y-1/2) log1p(d/y)
  return d * std::log(x) + (y - 0.5) * std::log1p(d / y) - d +
         stirling_tail(x) - stirling_tail(y);
}

SignedLog log_falling_product(double w, std::int64_t a, std::int64_t b) {
  if (a > b) return {0.0, 1.0};
  double da = static_cast<double>(a);
  double db = static_cast<double>(b);
  if (is_integer(w) && w >= da && w <= db) return {0.0, 0.0};
  if (w > db) {
    // all factors positive: Gamma(w - a + 1) / Gamma(w - b)
    return {lgamma_ratio(w - da + 1.0, w - db), 1.0};
  }
  if (w < da) {
    // all factors negative: (-1)^count Gamma(b - w + 1) / Gamma(a - w)
    std::int64_t count = b - a + 1;
    return {lgamma_ratio(db - w + 1.0, da - w), (count % 2 == 0) ? 1.0 : -1.0};
  }
  // a < w < b, w non-integer: split at m0 = floor(w).
  std::int64_t m0 = static_cast<std::int64_t>(std::floor(w));
  double pos = (m0 >= a) ? lgamma_ratio(w - da + 1.0, w - static_cast<double>(m0))
                         : 0.0;
  double neg = (m0 + 1 <= b)
                   ? lgamma_ratio(db - w + 1.0, static_cast<double>(m0) + 1.0 - w)
                   : 0.0;
  std::int64_t neg_count = b - m0;
  return {pos + neg, (neg_count % 2 == 0) ? 1.0 : -1.0};
}

std::complex<double> lgamma_complex(std::complex<double> z) {
  if (z.real() < 0.5) {
    // reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
    return kLogPi - log_sin_pi(z) - lgamma_complex(1.0 - z);
  }
  std::complex<double> zm = z - 1.0;
  std::complex<double> x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (zm + static_cast<double>(i));
  std::complex<double> t = zm + 7.5;
  return kHalfLog2Pi + (zm + 0.5) * std::log(t) - t + std::log(x);
}

double digamma(double x) {
  if (is_integer(x) && x <= 0.0) throw PoleError("digamma: pole", x);
  if (x < 0.0) {
    // psi(x) = psi(1 - x) - pi cot(pi x)
    return digamma(1.0 - x) - kPi * cospi(x) / sinpi(x);
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  double w = 1.0 / x;
  double w2 = w * w;
  double tail = std::log(x) - 0.5 * w -
                w2 * (1.0 / 12.0 +
                      w2 * (-1.0 / 120.0 +
                            w2 * (1.0 / 252.0 + w2 * (-1.0 / 240.0))));
  return acc + tail;
}

}  // namespace pwsynth
