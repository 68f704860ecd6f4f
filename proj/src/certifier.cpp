#include "pwsynth/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "pwsynth/errors.hpp"
#include "pwsynth/gamma.hpp"
#include "pwsynth/summation.hpp"

namespace pwsynth {

namespace {

std::string fmt_msg(const char* f, double a, double b = 0.0, long long c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return std::string(buf);
}

void require_window_covers(const KernelWeights& weights, const IntervalFamily& family) {
  for (const auto& iv : family.entries())
    if (iv.hi() > static_cast<double>(weights.N))
      throw std::invalid_argument("certifier: weight window does not cover the family");
}

SideInterval half_interval(const Interval& iv) {
  return {iv.rho - iv.d / 2.0, iv.rho + iv.d / 2.0};
}

double interval_mass(const KernelWeights& weights, const Interval& iv) {
  std::int64_t a = static_cast<std::int64_t>(std::ceil(iv.lo()));
  std::int64_t b = static_cast<std::int64_t>(std::floor(iv.hi()));
  KahanAccumulator acc;
  for (std::int64_t n = a; n <= b; ++n) {
    double w = weights.at(n);
    acc.add(w * w);
  }
  return acc.result();
}

}  // namespace

KernelWeights make_weights(const GenFnModel& model, std::int64_t N) {
  if (N < 1 || N > (std::int64_t{1} << 22))
    throw std::invalid_argument("make_weights: window out of range");
  KernelWeights kw;
  kw.N = N;
  kw.w.resize(static_cast<std::size_t>(2 * N + 1));
  for (std::int64_t n = -N; n <= N; ++n) {
    double v = std::abs(model.eval(static_cast<double>(n)));
    if (v == 0.0)
      throw std::domain_error(
          fmt_msg("weight degeneracy: the model vanishes at the integer %.0f",
                  static_cast<double>(n)));
    kw.w[static_cast<std::size_t>(n + N)] = v;
  }
  KahanAccumulator acc;
  auto add_at = [&](std::int64_t n) {
    double w = kw.at(n);
    acc.add((w * w + w) / (static_cast<double>(std::llabs(n)) + 1.0));
  };
  add_at(0);
  for (std::int64_t m = 1; m <= N; ++m) {
    add_at(m);
    add_at(-m);
    if (m == N / 8 || m == N / 4 || m == N / 2 || m == N)
      kw.standing_partials.push_back(acc.result());
  }
  kw.standing_sum = acc.result();
  return kw;
}

EvalBudget m_eval(const KernelWeights& weights, double t) {
  if (t == std::floor(t) && std::abs(t) <= static_cast<double>(weights.N) + 1)
    throw PoleError("m_eval: t is an integer pole of M", t);
  const std::int64_t N = weights.N;
  KahanAccumulator acc;
  for (std::int64_t n = -N; n <= N; ++n) {
    double w = weights.at(n);
    acc.add(w * w / (static_cast<double>(n) - t));
  }
  KahanAccumulator outer;
  for (std::int64_t n = -N; n <= N; ++n) {
    if (std::llabs(n) <= (3 * N) / 4) continue;
    double w = weights.at(n);
    outer.add(w * w);
  }
  double dist = std::max(1.0, static_cast<double>(N) - std::abs(t));
  return {acc.result(), outer.result() / dist};
}

double kernel_norm_sq(const KernelWeights& weights, double t) {
  const std::int64_t N = weights.N;
  KahanAccumulator acc;
  for (std::int64_t n = -N; n <= N; ++n) {
    double w = weights.at(n);
    double u = static_cast<double>(n) - t;
    acc.add(w * w / (u * u));
  }
  return acc.result();
}

const MRootRow* MRootTable::find(int k, std::int64_t n) const {
  for (const auto& r : rows)
    if (r.k == k && r.n == n) return &r;
  return nullptr;
}

MRootTable m_roots(const KernelWeights& weights, const IntervalFamily& family,
                   const CertifierOptions& opts) {
  require_window_covers(weights, family);
  MRootTable table;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Interval& iv = family.at(i);
    SideInterval J = half_interval(iv);
    std::int64_t a = static_cast<std::int64_t>(std::ceil(J.lo));
    std::int64_t b = static_cast<std::int64_t>(std::floor(J.hi));
    for (std::int64_t n = a; n <= b; ++n) {
      double nlo = static_cast<double>(n), nhi = static_cast<double>(n + 1);
      double h = opts.root_h0;
      double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
      bool bracketed = false;
      for (int attempt = 0; attempt < 10; ++attempt) {
        lo = nlo + h;
        hi = nhi - h;
        flo = m_eval(weights, lo).value;
        fhi = m_eval(weights, hi).value;
        if (flo < 0.0 && fhi > 0.0) {
          bracketed = true;
          break;
        }
        h /= 10.0;
      }
      if (!bracketed)
        throw std::runtime_error(
            fmt_msg("m_roots: no sign change in (%.17g, %.17g); window too small or tail "
                    "mass inconsistent with the root structure",
                    nlo, nhi));

      MRootRow row;
      row.k = family.k_of(i);
      row.n = n;
      row.bracket_lo = lo;
      row.bracket_hi = hi;
      row.m_lo = flo;
      row.m_hi = fhi;

      double wlo = lo, whi = hi;
      double tol = opts.bisect_tol * std::max(1.0, std::abs(nlo));
      while (whi - wlo > tol) {
        double mid = wlo + (whi - wlo) / 2.0;
        if (mid <= wlo || mid >= whi) break;
        double fm = m_eval(weights, mid).value;
        if (fm == 0.0) {
          wlo = whi = mid;
          break;
        }
        if (fm < 0.0)
          wlo = mid;
        else
          whi = mid;
      }
      double t = wlo + (whi - wlo) / 2.0;
      // Two Newton polish steps: M' = sum w^2/(n-t)^2 is cheap and the root
      // is simple, so this pushes |M(t)| to the roundoff floor.
      for (int p = 0; p < 2; ++p) {
        double f = m_eval(weights, t).value;
        double df = kernel_norm_sq(weights, t);
        double step = f / df;
        double cand = t - step;
        if (cand > lo && cand < hi) t = cand;
      }
      row.t = t;
      row.m_value = m_eval(weights, t).value;
      row.in_Jk = (t >= J.lo && t <= J.hi);
      row.eps = std::min(t - nlo, nhi - t);
      table.rows.push_back(row);
    }
  }
  return table;
}

NkReport select_Nk(const KernelWeights& weights, const IntervalFamily& family,
                   const CertifierOptions& opts) {
  require_window_covers(weights, family);
  NkReport rep;
  rep.all_ok = true;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Interval& iv = family.at(i);
    NkEntry entry;
    entry.k = family.k_of(i);
    entry.g = interval_mass(weights, iv);
    if (entry.g <= 0.0)
      throw std::domain_error("select_Nk: interval carries no squared-weight mass");

    SideInterval J = half_interval(iv);
    std::int64_t a = static_cast<std::int64_t>(std::ceil(J.lo));
    std::int64_t b = static_cast<std::int64_t>(std::floor(J.hi));
    std::vector<std::int64_t> cand;
    std::vector<double> knorm, mabs;
    KahanAccumulator agg;
    for (std::int64_t n = a; n <= b; ++n) {
      double t = static_cast<double>(n) + 0.5;
      cand.push_back(n);
      knorm.push_back(kernel_norm_sq(weights, t));
      mabs.push_back(std::abs(m_eval(weights, t).value));
      agg.add(knorm.back());
    }
    entry.aggregate_ratio = agg.result() / entry.g;

    const double base = entry.g / iv.d;
    const double need = iv.d / 2.0;
    double C1 = 4.0;
    for (;;) {
      entry.ns.clear();
      double cap = C1 * base;
      for (std::size_t j = 0; j < cand.size(); ++j)
        if (knorm[j] <= cap && mabs[j] <= cap) entry.ns.push_back(cand[j]);
      if (static_cast<double>(entry.ns.size()) >= need) {
        entry.ok = true;
        break;
      }
      if (C1 >= static_cast<double>(opts.c1_cap)) {
        entry.ok = false;
        break;
      }
      C1 *= 2.0;
    }
    entry.C1 = C1;
    rep.C1_final = std::max(rep.C1_final, C1);
    rep.all_ok = rep.all_ok && entry.ok;
    rep.entries.push_back(std::move(entry));
  }
  return rep;
}

std::vector<double> epsilon_separation(const MRootTable& table, const NkReport& nk) {
  std::vector<double> floors;
  for (const auto& entry : nk.entries) {
    double floor_k = std::numeric_limits<double>::infinity();
    for (std::int64_t n : entry.ns) {
      const MRootRow* row = table.find(entry.k, n);
      if (row == nullptr)
        throw std::logic_error("epsilon_separation: root table lacks a member of N_k");
      floor_k = std::min(floor_k, row->eps);
    }
    floors.push_back(floor_k);
  }
  return floors;
}

CauchyZeros cauchy_zeros(const std::vector<double>& mu, const std::vector<double>& t,
                         double tol) {
  if (mu.size() != t.size() || mu.empty())
    throw std::invalid_argument("cauchy_zeros: mu and t must be equal-length and nonempty");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0)) throw std::invalid_argument("cauchy_zeros: weights must be nonnegative");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw std::invalid_argument("cauchy_zeros: poles must be strictly increasing");
  }

  CauchyZeros out;
  std::vector<double> pm, pt;
  std::vector<std::size_t> pidx;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0.0) {
      out.dropped.push_back(i);
      continue;
    }
    pm.push_back(mu[i]);
    pt.push_back(t[i]);
    pidx.push_back(i);
  }
  if (pm.empty()) throw std::domain_error("cauchy_zeros: all weights vanish");

  auto f = [&](double x) {
    KahanAccumulator acc;
    for (std::size_t i = 0; i < pm.size(); ++i) acc.add(pm[i] / (x - pt[i]));
    return acc.result();
  };

  KahanAccumulator outer;
  for (std::size_t i = 0; i + 1 < pm.size(); ++i) {
    // f decreases from +inf at t_i+ to -inf at t_{i+1}-, so the pole
    // endpoints carry implied signs and are never evaluated.
    double lo = pt[i], hi = pt[i + 1];
    double span = hi - lo;
    double s;
    for (;;) {
      double mid = lo + (hi - lo) / 2.0;
      if (mid <= lo || mid >= hi) {
        s = mid <= lo ? lo : hi;
        break;
      }
      double fm = f(mid);
      if (fm == 0.0) {
        s = mid;
        break;
      }
      if (fm > 0.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= tol * std::max({1.0, std::abs(pt[i]), std::abs(pt[i + 1])})) {
        s = lo + (hi - lo) / 2.0;
        break;
      }
    }
    if (!(s > pt[i] && s < pt[i + 1]))
      throw std::runtime_error("cauchy_zeros: zero escaped its gap");
    (void)span;
    out.s.push_back(s);
    out.gap_index.push_back(pidx[i]);
    if (pt[i] > 0.0) {
      outer.add((pt[i + 1] - s) / s);
      out.outer_partials.push_back(outer.result());
    }
  }
  return out;
}

ConditionReport check_conditions(const GenFnModel& model, const KernelWeights& weights,
                                 const IntervalFamily& family, const CertifierOptions& opts) {
  require_window_covers(weights, family);
  if (family.empty()) throw std::invalid_argument("check_conditions: empty family");
  ConditionReport rep;
  const std::int64_t N = weights.N;

  for (std::size_t i = 0; i < family.size(); ++i) {
    const Interval& iv = family.at(i);
    double g = interval_mass(weights, iv);
    if (g <= 0.0) throw std::domain_error("check_conditions: interval carries no mass");

    std::int64_t a = static_cast<std::int64_t>(std::ceil(iv.lo()));
    std::int64_t b = static_cast<std::int64_t>(std::floor(iv.hi()));
    KahanAccumulator acc;
    for (std::int64_t n = -N; n <= N; ++n) {
      if (n >= a && n <= b) continue;
      double w = weights.at(n);
      acc.add(w * w / std::abs(static_cast<double>(n) - iv.rho));
    }
    rep.cond_i.push_back((iv.d / g) * acc.result());

    double step = std::min(opts.grid_cap, iv.d / 32.0);
    rep.grid_step.push_back(step);
    double worst = 0.0;
    double scale = std::sqrt(g / iv.d);
    std::int64_t hits = 0;
    std::int64_t cells = static_cast<std::int64_t>(std::ceil(2.0 * iv.d / step));
    for (std::int64_t j = 0; j <= cells; ++j) {
      double x = std::min(iv.lo() + static_cast<double>(j) * step, iv.hi());
      double gv = std::abs(model.eval(x));
      if (gv == 0.0) {
        if (x == std::floor(x))
          throw std::domain_error(fmt_msg(
              "check_conditions: weight degeneracy, the model vanishes at the integer n = %.17g",
              x));
        ++hits;
        continue;
      }
      worst = std::max(worst, scale / gv);
    }
    if (worst == 0.0)
      throw std::domain_error("check_conditions: the model vanishes on the whole interval grid");
    rep.cond_ii.push_back(worst);
    rep.zero_hits.push_back(hits);
  }
  for (std::size_t i = 0; i < rep.cond_i.size(); ++i) {
    rep.cond_i_sup = std::max(rep.cond_i_sup, rep.cond_i[i]);
    rep.cond_ii_sup = std::max(rep.cond_ii_sup, rep.cond_ii[i]);
    if (rep.cond_i[i] > opts.ratio_cap || rep.cond_ii[i] > opts.ratio_cap)
      rep.flagged.push_back(family.k_of(i));
  }

  // (iii): partial sums of d/rho, their linear growth fit, and the symbolic
  // verdict from the family rule when one exists.
  {
    KahanAccumulator acc;
    for (const auto& iv : family.entries()) {
      acc.add(iv.d / iv.rho);
      rep.log_length_partials.push_back(acc.result());
    }
    const std::size_t K = rep.log_length_partials.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < K; ++i) {
      double x = static_cast<double>(i);
      double y = rep.log_length_partials[i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double denom = static_cast<double>(K) * sxx - sx * sx;
    rep.fit_slope = denom > 0.0 ? (static_cast<double>(K) * sxy - sx * sy) / denom : 0.0;

    if (family.has_rule()) {
      const FamilyRule& rule = family.rule();
      if (rule.d_kind == FamilyRule::DKind::ratio && rule.d_value > 0.0) {
        rep.divergent_rule = true;
        rep.divergence_note = "rule d = c*rho: the terms d/rho are constant, the sum diverges";
      } else if (rule.d_kind == FamilyRule::DKind::power && rule.d_value >= 1.0) {
        rep.divergent_rule = true;
        rep.divergence_note = "rule d = rho^e with e >= 1: terms do not decay, the sum diverges";
      } else {
        rep.divergence_note = "rule terms decay; the sum converges, divergence fails";
      }
    } else {
      rep.divergence_note =
          "explicit family: divergence is not decidable from a finite list; partial sums "
          "and growth fit reported only";
    }
  }
  return rep;
}

CertificateReport certify(const GenFnModel& model, const KernelWeights& weights,
                          const IntervalFamily& family, const CertifierOptions& opts) {
  CertificateReport rep;
  rep.conditions = check_conditions(model, weights, family, opts);
  rep.table = m_roots(weights, family, opts);
  rep.nk = select_Nk(weights, family, opts);
  rep.eps_floor = epsilon_separation(rep.table, rep.nk);
  rep.eps_min = std::numeric_limits<double>::infinity();
  for (double e : rep.eps_floor) rep.eps_min = std::min(rep.eps_min, e);
  rep.gates_ok = rep.nk.all_ok && rep.eps_min >= 0.05 && rep.conditions.divergent_rule &&
                 rep.conditions.flagged.empty();
  return rep;
}

IdentityResiduals functional_identity_residual(const GenFnModel& model,
                                               const SampledPWVector& a,
                                               const std::vector<double>& z_samples) {
  const std::int64_t N = a.N;
  std::vector<double> gn(static_cast<std::size_t>(2 * N + 1));
  for (std::int64_t n = -N; n <= N; ++n)
    gn[static_cast<std::size_t>(n + N)] = model.eval(static_cast<double>(n));

  IdentityResiduals out;
  for (double z : z_samples) {
    if (z == std::floor(z) && std::abs(z) <= static_cast<double>(N) + 1)
      throw PoleError("functional_identity_residual: z is an integer", z);
    KahanAccumulator alt, ag, a2;
    for (std::int64_t n = -N; n <= N; ++n) {
      double an = a.at(n);
      if (an == 0.0) continue;
      double x = static_cast<double>(n);
      double sign = (n & 1) ? -1.0 : 1.0;
      alt.add(sign * an / (z - x));
      ag.add(an * gn[static_cast<std::size_t>(n + N)] / (z - x));
      a2.add(an * an / (z - x));
    }
    double f = sinpi(z) * alt.result();
    double lhs = f * ag.result();
    double rhs = model.eval(z) * a2.result();
    out.z.push_back(z);
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs);
    out.residual.push_back(std::abs(lhs - rhs));
    out.max_residual = std::max(out.max_residual, out.residual.back());
  }
  return out;
}

}  // namespace pwsynth
