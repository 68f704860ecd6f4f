#include "pwsynth/breaker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "pwsynth/errors.hpp"
#include "pwsynth/summation.hpp"

namespace pwsynth {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::int64_t kMaxFamilyIntegers = std::int64_t{1} << 22;

std::string fmt(const char* f, ...) {
  va_list ap;
  va_start(ap, f);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return std::string(buf);
}

void integer_span(double lo, double hi, std::int64_t& n_lo, std::int64_t& n_hi) {
  n_lo = static_cast<std::int64_t>(std::ceil(lo));
  n_hi = static_cast<std::int64_t>(std::floor(hi));
}

double parity(std::int64_t n) { return (n & 1) ? -1.0 : 1.0; }

std::int64_t family_integer_count(const IntervalFamily& family) {
  std::int64_t total = 0;
  for (const auto& iv : family.entries()) {
    std::int64_t a, b;
    integer_span(iv.lo(), iv.hi(), a, b);
    if (b >= a) total += b - a + 1;
  }
  return total;
}

double required_window(const IntervalFamily& family, const SideIntervalData& sides) {
  double need = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& iv = family.at(i);
    need = std::max(need, iv.hi() + 4.0 * sides.entries[i].s);
  }
  return need;
}

struct ScanRange {
  double lo, hi;
};

std::vector<ScanRange> merge_ranges(std::vector<ScanRange> r) {
  std::sort(r.begin(), r.end(), [](const ScanRange& a, const ScanRange& b) { return a.lo < b.lo; });
  std::vector<ScanRange> out;
  for (const auto& x : r) {
    if (x.hi <= x.lo) continue;
    if (!out.empty() && x.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, x.hi);
    } else {
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

bool HypothesisReport::all_pass() const {
  if (outside_ok == false || side_ok == false || s_bound_ok == false || log_length_ok == false)
    return false;
  if (zero_dist_ok == false || zero_gap_ok == false || axis_ok == false) return false;
  for (bool d : degenerate)
    if (d) return false;
  return true;
}

HypothesisReport check_hypotheses(const GenFnModel& model, const IntervalFamily& family,
                                  const BreakerOptions& opts) {
  if (family.empty()) throw std::invalid_argument("check_hypotheses: empty interval family");
  if (family_integer_count(family) > kMaxFamilyIntegers)
    throw std::invalid_argument(
        "check_hypotheses: family holds too many integer points for exact per-interval sums");

  const std::size_t K = family.size();
  HypothesisReport rep;

  rep.g.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    const auto& iv = family.at(i);
    std::int64_t a, b;
    integer_span(iv.lo(), iv.hi(), a, b);
    KahanAccumulator acc;
    for (std::int64_t n = a; n <= b; ++n) {
      double v = model.eval(static_cast<double>(n));
      acc.add(v * v);
    }
    rep.g[i] = acc.result();
  }

  rep.sides = side_intervals(family, rep.g, opts.s_rescale);
  rep.degenerate.resize(K);
  rep.throwaway.resize(K);
  rep.s.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    rep.s[i] = rep.sides.entries[i].s;
    rep.degenerate[i] = rep.sides.entries[i].degenerate;
    rep.throwaway[i] = rep.sides.entries[i].throwaway;
  }

  const double need = required_window(family, rep.sides);
  if (static_cast<double>(opts.window) < need)
    throw std::invalid_argument(fmt(
        "check_hypotheses: window %lld does not cover the side intervals; need at least %.0f",
        static_cast<long long>(opts.window), std::ceil(need)));

  // (i) square-summability of the samples off the intervals, watched over
  // doubling windows. Rule-generated intervals past the configured range are
  // excluded from "outside" so window growth does not sweep in their peaks.
  std::vector<Interval> exclude = family.entries();
  {
    auto ext = family.rule_extension(static_cast<double>(opts.window));
    rep.rule_exclusions = static_cast<int>(ext.size());
    exclude.insert(exclude.end(), ext.begin(), ext.end());
  }
  IntegerSamples samp = samples_on_integers(model, exclude, opts.window);
  rep.outside_partials = samp.outside_partials;
  rep.outside_sq = samp.sum_sq_outside;
  if (rep.outside_partials.size() >= 4) {
    double i1 = rep.outside_partials[1] - rep.outside_partials[0];
    double i2 = rep.outside_partials[2] - rep.outside_partials[1];
    double i3 = rep.outside_partials[3] - rep.outside_partials[2];
    rep.outside_ok = (i1 > i2) && (i2 > i3) && (i3 <= 0.01 * rep.outside_sq);
  }

  // (ii) weighted side-interval sums with a ratio test on consecutive terms.
  rep.side_terms.resize(K);
  {
    KahanAccumulator total;
    for (std::size_t i = 0; i < K; ++i) {
      KahanAccumulator acc;
      for (const SideInterval* J : {&rep.sides.entries[i].minus, &rep.sides.entries[i].plus}) {
        std::int64_t a, b;
        integer_span(J->lo, J->hi, a, b);
        for (std::int64_t n = a; n <= b; ++n) {
          double v = samp.value_at(n);
          acc.add(v * v);
        }
      }
      rep.side_terms[i] = rep.s[i] * acc.result();
      total.add(rep.side_terms[i]);
    }
    rep.side_sum = total.result();
    rep.side_ok = true;
    for (std::size_t i = 0; i + 1 < K; ++i) {
      if (rep.side_terms[i] <= 0.0) {
        rep.side_ok = (rep.side_terms[i + 1] <= 0.0) && rep.side_ok;
        continue;
      }
      double r = rep.side_terms[i + 1] / rep.side_terms[i];
      rep.side_tail_ratio = std::max(rep.side_tail_ratio, r);
    }
    if (K >= 2 && rep.side_tail_ratio > 0.95) rep.side_ok = false;
  }

  // (iii) side lengths below rho/10.
  rep.s_bound_ok = true;
  for (std::size_t i = 0; i < K; ++i)
    if (!rep.degenerate[i] && rep.sides.entries[i].oversize) rep.s_bound_ok = false;

  // (iv) partial sums of d/rho with a ratio test on the terms.
  {
    KahanAccumulator acc;
    double prev = 0.0;
    rep.log_length_ok = true;
    for (std::size_t i = 0; i < K; ++i) {
      double term = family.at(i).d / family.at(i).rho;
      acc.add(term);
      rep.log_length_partials.push_back(acc.result());
      if (i > 0 && prev > 0.0)
        rep.log_length_tail_ratio = std::max(rep.log_length_tail_ratio, term / prev);
      prev = term;
    }
    rep.log_length_total = acc.result();
    if (K >= 2 && rep.log_length_tail_ratio > 0.95) rep.log_length_ok = false;
  }

  // Zero-set observations: a base window around the origin plus a
  // neighborhood of every center (rule extension included), wide enough to
  // catch the zeros the centers perturb.
  {
    const double W = static_cast<double>(opts.window);
    const double B = std::min(W, 4096.0);
    rep.scan_base_lo = -B;
    rep.scan_base_hi = B;
    std::vector<ScanRange> ranges{{-B, B}};
    auto add_center = [&](const Interval& iv) {
      double w = std::min(std::max(iv.d, std::sqrt(iv.rho)), 4096.0) + 32.0;
      double lo = std::max(-W, iv.rho - w);
      double hi = std::min(W, iv.rho + w);
      ranges.push_back({lo, hi});
    };
    for (const auto& iv : family.entries()) add_center(iv);
    for (const auto& iv : family.rule_extension(W)) add_center(iv);
    ranges = merge_ranges(ranges);

    double min_dist = std::numeric_limits<double>::infinity();
    double max_gap = 0.0;
    std::size_t count = 0;
    for (const auto& r : ranges) {
      ZeroList zl = find_zeros(model, r.lo, r.hi);
      count += zl.zeros.size();
      for (std::size_t j = 0; j < zl.zeros.size(); ++j) {
        double lam = zl.zeros[j].lambda;
        min_dist = std::min(min_dist, std::abs(lam - std::nearbyint(lam)));
        if (j > 0) max_gap = std::max(max_gap, lam - zl.zeros[j - 1].lambda);
      }
    }
    rep.zero_count = count;
    rep.min_zero_dist_to_int = min_dist;
    rep.max_zero_gap = max_gap;
    rep.zero_dist_ok = count > 0 && min_dist > 0.0;
    rep.zero_gap_ok = count > 0 && max_gap <= opts.density_C;
  }

  // Exponential-type margin along the imaginary axis.
  {
    const double pi = 3.14159265358979323846;
    double prev = std::numeric_limits<double>::infinity();
    rep.axis_ok = true;
    for (int j = 0; j <= 7; ++j) {
      double y = std::ldexp(1.0, j);
      double r = model.log_abs_imag_axis(y) - pi * y;
      rep.axis_decay.push_back(r);
      if (r > prev) rep.axis_ok = false;
      prev = r;
    }
  }

  return rep;
}

TkSelection select_tk(const GenFnModel& model, const IntervalFamily& family,
                      const HypothesisReport& hyp, const BreakerOptions& opts) {
  if (opts.cell_length <= 0.0) throw std::invalid_argument("select_tk: cell length must be positive");
  const std::size_t K = family.size();
  if (hyp.sides.entries.size() != K)
    throw std::invalid_argument("select_tk: hypothesis report does not match the family");

  TkSelection sel;
  sel.t.resize(K);
  sel.side.resize(K);
  sel.cost.resize(K);
  sel.running_product.resize(K);

  double prod = 1.0;
  for (std::size_t i = 0; i < K; ++i) {
    const auto& iv = family.at(i);
    const auto& se = hyp.sides.entries[i];
    if (se.degenerate)
      throw std::domain_error(
          fmt("select_tk: interval k=%d carries no integer mass; drop it before breaking",
              family.k_of(i)));

    // G^2 on the integers of both side intervals, the weights of the cost.
    std::vector<std::pair<double, double>> jweights;  // (n, G(n)^2)
    for (const SideInterval* J : {&se.minus, &se.plus}) {
      std::int64_t a, b;
      integer_span(J->lo, J->hi, a, b);
      for (std::int64_t n = a; n <= b; ++n) {
        double v = model.eval(static_cast<double>(n));
        jweights.emplace_back(static_cast<double>(n), v * v);
      }
    }
    const double s2 = se.s * se.s;
    auto cost_at = [&](double lam) {
      KahanAccumulator acc;
      for (const auto& [n, g2] : jweights) {
        double u = n - lam;
        acc.add(g2 / (u * u));
      }
      return s2 * acc.result();
    };

    double best_t[2] = {0.0, 0.0};
    double best_cost[2] = {std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
    const SideInterval* sides_arr[2] = {&se.minus, &se.plus};
    for (int sidx = 0; sidx < 2; ++sidx) {
      const SideInterval& J = *sides_arr[sidx];
      double quarter = J.length() / 4.0;
      double hlo = J.lo + quarter, hhi = J.hi - quarter;
      int ncells = std::max(1, static_cast<int>(std::ceil((hhi - hlo) / opts.cell_length)));
      double width = (hhi - hlo) / ncells;
      for (int cidx = 0; cidx < ncells; ++cidx) {
        double clo = hlo + cidx * width;
        double chi = (cidx + 1 == ncells) ? hhi : hlo + (cidx + 1) * width;
        ZeroList zl = find_zeros(model, clo, chi);
        if (zl.zeros.empty())
          throw std::runtime_error(
              fmt("select_tk: no zero in cell [%.6g, %.6g] on the %c side of interval k=%d; "
                  "the zero set is too sparse for the side construction",
                  clo, chi, sidx == 0 ? '-' : '+', family.k_of(i)));
        double cell_best = std::numeric_limits<double>::infinity();
        double cell_t = 0.0;
        for (const auto& z : zl.zeros) {
          double c = cost_at(z.lambda);
          if (c < cell_best) {
            cell_best = c;
            cell_t = z.lambda;
          }
        }
        if (cell_best < best_cost[sidx]) {
          best_cost[sidx] = cell_best;
          best_t[sidx] = cell_t;
        }
      }
    }

    // Greedy side choice: keep the running product of t/rho nearest 1 in log
    // scale; ties go to the plus side.
    double cand_log[2];
    for (int sidx = 0; sidx < 2; ++sidx)
      cand_log[sidx] = std::log(prod * (best_t[sidx] / iv.rho));
    int pick = (std::abs(cand_log[1]) <= std::abs(cand_log[0])) ? 1 : 0;
    sel.t[i] = best_t[pick];
    sel.side[i] = pick == 1 ? 1 : -1;
    sel.cost[i] = best_cost[pick];
    prod *= sel.t[i] / iv.rho;
    sel.running_product[i] = prod;
    if (!(prod >= 0.001 && prod <= 1000.0))
      throw std::runtime_error(
          fmt("select_tk: running product %.6g left [0.001, 1000] at k=%d", prod, family.k_of(i)));
  }
  return sel;
}

double eval_m(double x, const IntervalFamily& family, const std::vector<double>& t) {
  if (t.size() != family.size())
    throw std::invalid_argument("eval_m: one t per interval required");
  double prod = 1.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    double rho = family.at(i).rho, ti = t[i];
    if (x == ti) throw PoleError("eval_m: x is one of the t_k", x);
    prod *= ((rho - x) / (ti - x)) * (ti / rho);
  }
  return prod;
}

std::vector<BandRatio> m_band_ratios(const IntervalFamily& family, const std::vector<double>& t,
                                     int samples_per_band) {
  const std::size_t K = family.size();
  if (t.size() != K) throw std::invalid_argument("m_band_ratios: one t per interval required");
  if (samples_per_band < 2) throw std::invalid_argument("m_band_ratios: need at least 2 samples");
  std::vector<BandRatio> out(K);
  for (std::size_t i = 0; i < K; ++i) {
    double rho = family.at(i).rho;
    double lo = (i == 0) ? rho / 2.0 : (family.at(i - 1).rho + rho) / 2.0;
    double hi = (i + 1 == K) ? 1.5 * rho : (rho + family.at(i + 1).rho) / 2.0;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (int j = 0; j < samples_per_band; ++j) {
      double x = lo + (j + 0.5) * (hi - lo) / samples_per_band;
      if (std::abs(x - t[i]) < 1e-8 * rho || std::abs(x - rho) < 1e-8 * rho) continue;
      double r = std::abs(eval_m(x, family, t)) * std::abs(x - t[i]) / std::abs(x - rho);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    out[i] = {rmin, rmax};
  }
  return out;
}

FSequence build_f(const GenFnModel& model, const IntervalFamily& family, const TkSelection& sel,
                  const HypothesisReport& hyp, const BreakerOptions& opts) {
  const std::size_t K = family.size();
  if (sel.t.size() != K || hyp.sides.entries.size() != K)
    throw std::invalid_argument("build_f: selection/report do not match the family");
  if (family_integer_count(family) > kMaxFamilyIntegers)
    throw std::invalid_argument("build_f: family holds too many integer points");
  if (static_cast<double>(opts.window) < required_window(family, hyp.sides))
    throw std::invalid_argument("build_f: window does not cover the side intervals with margin");

  FSequence F;
  F.window = opts.window;
  F.samples.m0 = eval_m(0.0, family, sel.t);
  F.samples.a0 = model.eval(0.0) * F.samples.m0;
  if (F.samples.a0 == 0.0)
    throw std::domain_error("build_f: a_0 = 0, the normalization b_0 = 1/a_0 is impossible");

  F.inside_sq.resize(K);
  F.inside_bound_ratio.resize(K);
  F.samples.per_k.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    const auto& iv = family.at(i);
    auto& pk = F.samples.per_k[i];
    integer_span(iv.lo(), iv.hi(), pk.n_lo, pk.n_hi);
    KahanAccumulator acc;
    for (std::int64_t n = pk.n_lo; n <= pk.n_hi; ++n) {
      double x = static_cast<double>(n);
      double mm = eval_m(x, family, sel.t);
      double a = parity(n) * model.eval(x) * mm;
      pk.a.push_back(a);
      pk.m.push_back(mm);
      acc.add(a * a);
    }
    F.inside_sq[i] = acc.result();
    double g = hyp.g[i], s = hyp.s[i], d = iv.d;
    F.inside_bound_ratio[i] =
        g > 0.0 ? F.inside_sq[i] * (s * s) / (d * d * g) : std::numeric_limits<double>::quiet_NaN();
  }

  // Window-wide split of sum f(n)^2 into interval part, side part, remainder.
  struct Range {
    double lo, hi;
    int cls;  // 0 = interval, 1 = side
  };
  std::vector<Range> ranges;
  for (std::size_t i = 0; i < K; ++i) {
    const auto& iv = family.at(i);
    const auto& se = hyp.sides.entries[i];
    ranges.push_back({iv.lo(), iv.hi(), 0});
    ranges.push_back({se.minus.lo, se.minus.hi, 1});
    ranges.push_back({se.plus.lo, se.plus.hi, 1});
  }
  std::sort(ranges.begin(), ranges.end(), [](const Range& a, const Range& b) { return a.lo < b.lo; });
  std::vector<double> los;
  for (const auto& r : ranges) los.push_back(r.lo);
  auto classify = [&](double x) {
    auto it = std::upper_bound(los.begin(), los.end(), x);
    if (it == los.begin()) return -1;
    const Range& r = ranges[static_cast<std::size_t>(it - los.begin() - 1)];
    return x <= r.hi ? r.cls : -1;
  };

  KahanAccumulator side_acc, rem_acc;
  const std::int64_t N = opts.window;
  auto add_sample = [&](std::int64_t n) {
    double x = static_cast<double>(n);
    double fv = model.eval(x) * eval_m(x, family, sel.t);
    switch (classify(x)) {
      case 1:
        side_acc.add(fv * fv);
        break;
      case -1:
        rem_acc.add(fv * fv);
        break;
      default:
        break;  // interval part already summed exactly
    }
  };
  add_sample(0);
  for (std::int64_t n = 1; n <= N; ++n) {
    add_sample(n);
    add_sample(-n);
    if (n == N / 8 || n == N / 4 || n == N / 2 || n == N)
      F.outside_partials.push_back(rem_acc.result());
  }
  F.side_sq = side_acc.result();
  F.outside_sq = rem_acc.result();
  return F;
}

FixedPointResult solve_fixed_point(const IntervalFamily& family, const IntervalSamples& samples,
                                   const BreakerOptions& opts) {
  const std::size_t K = family.size();
  if (samples.per_k.size() != K)
    throw std::invalid_argument("solve_fixed_point: samples do not match the family");
  if (opts.fp_rel_tol <= 0.0 || opts.fp_max_iters < 1)
    throw std::invalid_argument("solve_fixed_point: bad tolerance or iteration cap");

  FixedPointResult res;
  res.D.assign(K, 0.0);
  res.A.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    double rho_k = family.at(k).rho;
    for (std::size_t m = 0; m < K; ++m) {
      const auto& pm = samples.per_k[m];
      double rho_m = family.at(m).rho;
      KahanAccumulator acc;
      for (std::size_t j = 0; j < pm.a.size(); ++j) {
        double n = static_cast<double>(pm.n_lo + static_cast<std::int64_t>(j));
        double a2 = pm.a[j] * pm.a[j];
        // a vanishes exactly where m does (integer centers); the term is an
        // exact zero, not a 0/0.
        if (a2 == 0.0) continue;
        acc.add(a2 / ((rho_k - n) * (rho_m - n)));
      }
      if (m == k)
        res.D[k] = acc.result();
      else
        res.A[k][m] = acc.result();
    }
    if (res.D[k] == 0.0)
      throw std::domain_error(
          fmt("solve_fixed_point: D_k = 0 at k=%d, the interval carries no mass", family.k_of(k)));
  }

  std::vector<double> c(K, 0.0), cn(K, 0.0);
  double prev_step = 0.0;
  bool converged = false;
  for (int iter = 1; iter <= opts.fp_max_iters; ++iter) {
    for (std::size_t k = 0; k < K; ++k) {
      KahanAccumulator acc;
      acc.add(-1.0 / family.at(k).rho);
      for (std::size_t m = 0; m < K; ++m)
        if (m != k) acc.add(-c[m] * res.A[k][m]);
      cn[k] = acc.result() / res.D[k];
    }
    double step = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double dk = family.at(k).d;
      step = std::max(step, std::abs(cn[k] - c[k]) / dk);
      norm = std::max(norm, std::abs(cn[k]) / dk);
    }
    res.step_norms.push_back(step);
    res.iterations = iter;
    if (iter >= 2 && prev_step > 0.0) res.last_step_ratio = step / prev_step;
    c = cn;
    if (step <= opts.fp_rel_tol * std::max(norm, 1e-300)) {
      converged = true;
      break;
    }
    if (iter >= 2 && res.last_step_ratio >= 1.0)
      throw ContractionError(
          fmt("fixed-point iteration is not contracting (step ratio %.3g at iteration %d); "
              "drop a longer interval prefix (increase eta)",
              res.last_step_ratio, iter),
          res.last_step_ratio);
    prev_step = step;
  }
  if (!converged) {
    std::size_t nsteps = res.step_norms.size();
    throw ConvergenceError("solve_fixed_point: iteration cap reached before the step tolerance",
                           res.step_norms[nsteps - 1], nsteps >= 2 ? res.step_norms[nsteps - 2] : 0.0);
  }

  res.c = c;
  for (std::size_t k = 0; k < K; ++k) {
    res.banach_norm_c = std::max(res.banach_norm_c, std::abs(c[k]) / family.at(k).d);
    KahanAccumulator acc;
    for (std::size_t m = 0; m < K; ++m)
      if (m != k) acc.add(std::abs(res.A[k][m]) * family.at(m).d);
    res.linear_norm_bound =
        std::max(res.linear_norm_bound, acc.result() / (res.D[k] * family.at(k).d));
  }
  return res;
}

namespace {

// Walks the support of the coefficient sequences: calls cb(n, a_n, m_n, c_n
// scale k) for every interval point. The n = 0 point is handled by callers.
template <typename F>
void for_support(const IntervalSamples& samples, F&& cb) {
  for (std::size_t k = 0; k < samples.per_k.size(); ++k) {
    const auto& pk = samples.per_k[k];
    for (std::size_t j = 0; j < pk.a.size(); ++j)
      cb(static_cast<double>(pk.n_lo + static_cast<std::int64_t>(j)), pk.a[j], pk.m[j], k);
  }
}

}  // namespace

BreakerReport verify_breaker(const IntervalFamily& family, const TkSelection& sel,
                             const FSequence& f, const FixedPointResult& fp,
                             const HypothesisReport& hyp) {
  const std::size_t K = family.size();
  if (sel.t.size() != K || f.samples.per_k.size() != K || fp.c.size() != K ||
      hyp.g.size() != K)
    throw std::invalid_argument("verify_breaker: stage outputs do not match the family");

  BreakerReport rep;
  rep.rho.resize(K);
  rep.d.resize(K);
  for (std::size_t i = 0; i < K; ++i) {
    rep.rho[i] = family.at(i).rho;
    rep.d[i] = family.at(i).d;
  }
  rep.g = hyp.g;
  rep.s = hyp.s;
  rep.t = sel.t;
  rep.side = sel.side;
  rep.c = fp.c;
  rep.b0 = 1.0 / f.samples.a0;

  const auto& samples = f.samples;
  auto b_of = [&](double a, double rho, double n, std::size_t k) {
    if (a == 0.0) return 0.0;  // exact zero of m at an integer center
    return fp.c[k] * a / (rho - n);
  };

  // Interpolation residuals eps_m = S(rho_m) = sum_n a_n b_n / (rho_m - n),
  // with the compensated-sum roundoff allowance eta_m alongside.
  rep.s_residual.resize(K);
  std::vector<double> eta(K, 0.0);
  for (std::size_t m = 0; m < K; ++m) {
    double rho_m = rep.rho[m];
    KahanAccumulator acc, abs_acc;
    acc.add(1.0 / rho_m);  // a_0 b_0 = 1
    abs_acc.add(1.0 / rho_m);
    for_support(samples, [&](double n, double a, double /*mm*/, std::size_t k) {
      if (a == 0.0) return;
      double term = a * b_of(a, rep.rho[k], n, k) / (rho_m - n);
      acc.add(term);
      abs_acc.add(std::abs(term));
    });
    rep.s_residual[m] = acc.result();
    eta[m] = 4.0 * kEps * abs_acc.result();
    rep.s_residual_max = std::max(rep.s_residual_max, std::abs(rep.s_residual[m]));
  }
  rep.s_target = 1e-8 / rep.rho[0];
  rep.s_ok = rep.s_residual_max <= rep.s_target;

  // Residue of 1/m at each center, with factors paired to stay O(1).
  rep.kappa.resize(K);
  for (std::size_t m = 0; m < K; ++m) {
    double rho_m = rep.rho[m];
    double kap = -rho_m * (1.0 - rho_m / sel.t[m]);
    for (std::size_t j = 0; j < K; ++j) {
      if (j == m) continue;
      kap *= ((sel.t[j] - rho_m) / (rep.rho[j] - rho_m)) * (rep.rho[j] / sel.t[j]);
    }
    rep.kappa[m] = kap;
  }

  // Orthogonality residuals sum_n (-1)^n b_n G(n)/(t_k - n) = sum a_n b_n /
  // (m(n)(t_k - n)); the exact value equals -sum_m eps_m kappa_m/(t_k - rho_m),
  // so the budget is that sum in absolute value plus roundoff allowances.
  rep.orth_residual.resize(K);
  rep.orth_budget.resize(K);
  rep.orth_ok = true;
  for (std::size_t i = 0; i < K; ++i) {
    double tk = sel.t[i];
    KahanAccumulator acc, abs_acc;
    double term0 = 1.0 / (samples.m0 * tk);
    acc.add(term0);
    abs_acc.add(std::abs(term0));
    for_support(samples, [&](double n, double a, double mm, std::size_t k) {
      if (a == 0.0) return;
      double term = a * b_of(a, rep.rho[k], n, k) / (mm * (tk - n));
      acc.add(term);
      abs_acc.add(std::abs(term));
    });
    rep.orth_residual[i] = acc.result();
    KahanAccumulator budget;
    for (std::size_t m = 0; m < K; ++m)
      budget.add((std::abs(rep.s_residual[m]) + eta[m]) * std::abs(rep.kappa[m]) /
                 std::abs(tk - rep.rho[m]));
    budget.add(4.0 * kEps * abs_acc.result());
    rep.orth_budget[i] = budget.result();
    if (std::abs(rep.orth_residual[i]) > rep.orth_budget[i]) rep.orth_ok = false;
  }

  // Off-grid spot check of the rational identity
  //   S(z)/m(z) - sum_n a_n b_n/(m(n)(z - n)) = sum_m eps_m kappa_m/(z - rho_m).
  rep.identity_ok = true;
  {
    double lo = rep.rho[0] / 2.0, hi = 1.5 * rep.rho[K - 1];
    for (int j = 0; j < 20; ++j) {
      double z = lo + (j + 0.37) * (hi - lo) / 20.0;
      if (std::abs(z - std::nearbyint(z)) < 0.1) z += 0.23;
      double mz = eval_m(z, family, sel.t);
      KahanAccumulator lhs, lhs_abs;
      {
        double term = (1.0 / mz - 1.0 / samples.m0) / z;
        lhs.add(term);
        lhs_abs.add((1.0 / std::abs(mz) + 1.0 / std::abs(samples.m0)) / std::abs(z));
      }
      for_support(samples, [&](double n, double a, double mm, std::size_t k) {
        if (a == 0.0) return;
        double ab = a * b_of(a, rep.rho[k], n, k);
        lhs.add(ab * (1.0 / mz - 1.0 / mm) / (z - n));
        lhs_abs.add(std::abs(ab) * (1.0 / std::abs(mz) + 1.0 / std::abs(mm)) / std::abs(z - n));
      });
      KahanAccumulator rhs, rhs_abs, eta_part;
      for (std::size_t m = 0; m < K; ++m) {
        double term = rep.s_residual[m] * rep.kappa[m] / (z - rep.rho[m]);
        rhs.add(term);
        rhs_abs.add(std::abs(term));
        eta_part.add(eta[m] * std::abs(rep.kappa[m]) / std::abs(z - rep.rho[m]));
      }
      double gap = std::abs(lhs.result() - rhs.result());
      double budget =
          eta_part.result() + 8.0 * kEps * lhs_abs.result() + 4.0 * kEps * rhs_abs.result();
      rep.identity_z.push_back(z);
      rep.identity_gap.push_back(gap);
      rep.identity_budget.push_back(budget);
      if (gap > budget) rep.identity_ok = false;
    }
  }

  // Pairing sum a_n b_n = 1 + sum_k c_k sum_{I_k} a_n^2/(rho_k - n), and the
  // coefficient sum b_0^2 + sum c_k^2 D_k, each with its empirical constant
  // against sum d/rho.
  {
    KahanAccumulator acc;
    acc.add(1.0);
    for_support(samples, [&](double n, double a, double /*mm*/, std::size_t k) {
      if (a == 0.0) return;
      acc.add(fp.c[k] * a * a / (rep.rho[k] - n));
    });
    rep.pairing = acc.result();
    rep.pairing_ok = rep.pairing >= 0.5;

    double sum_dr = 0.0;
    for (std::size_t i = 0; i < K; ++i) sum_dr += rep.d[i] / rep.rho[i];
    double cb2 = fp.banach_norm_c * fp.banach_norm_c;
    rep.pairing_constant = (1.0 - rep.pairing) / std::max(cb2 * sum_dr, 1e-300);

    KahanAccumulator bsq;
    bsq.add(rep.b0 * rep.b0);
    for (std::size_t k = 0; k < K; ++k) bsq.add(fp.c[k] * fp.c[k] * fp.D[k]);
    rep.sum_b_sq = bsq.result();
    rep.bsq_constant =
        (rep.sum_b_sq - rep.b0 * rep.b0) / std::max(fp.banach_norm_c * sum_dr, 1e-300);
  }

  rep.denom_scale.resize(K);
  for (std::size_t k = 0; k < K; ++k) rep.denom_scale[k] = fp.D[k] * rep.d[k] * rep.rho[k];
  rep.band_ratios = m_band_ratios(family, sel.t);
  return rep;
}

}  // namespace pwsynth
