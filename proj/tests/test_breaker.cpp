#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "pwsynth/breaker.hpp"
#include "pwsynth/errors.hpp"
#include "pwsynth/genfun.hpp"
#include "pwsynth/intervals.hpp"

using namespace pwsynth;

namespace {

IntervalFamily canonical_family() {
  FamilyRule rule;
  rule.k_min = 10;
  rule.k_max = 18;
  rule.d_kind = FamilyRule::DKind::power;
  rule.d_value = 0.2;
  return IntervalFamily::from_rule(rule);
}

BreakerOptions canonical_options() {
  BreakerOptions opts;
  opts.eta = 0.01;
  opts.s_rescale = 0.35;  // the 2^k family needs the softened side-interval bound
  opts.window = std::int64_t{1} << 20;
  return opts;
}

struct CanonicalRun {
  std::shared_ptr<SimpleExampleModel> model;
  IntervalFamily family;
  BreakerOptions opts;
  HypothesisReport hyp;
  TkSelection sel;
  FSequence f;
  FixedPointResult fp;
  BreakerReport rep;
};

const CanonicalRun& canonical_run() {
  static CanonicalRun r = [] {
    CanonicalRun c;
    c.model = std::make_shared<SimpleExampleModel>(60);
    c.family = drop_prefix(canonical_family(), 0.01);
    c.opts = canonical_options();
    c.hyp = check_hypotheses(*c.model, c.family, c.opts);
    c.sel = select_tk(*c.model, c.family, c.hyp, c.opts);
    c.f = build_f(*c.model, c.family, c.sel, c.hyp, c.opts);
    c.fp = solve_fixed_point(c.family, c.f.samples, c.opts);
    c.rep = verify_breaker(c.family, c.sel, c.f, c.fp, c.hyp);
    return c;
  }();
  return r;
}

// Synthetic instance: lacunary centers with decaying d/rho and random sample
// weights on a short integer stencil per interval.
struct Synthetic {
  IntervalFamily family;
  IntervalSamples samples;
};

Synthetic make_synthetic(std::mt19937_64& rng, int count, bool drop = true) {
  std::uniform_real_distribution<double> jit(0.0, 0.08);
  std::uniform_real_distribution<double> expo(0.3, 0.6);
  std::uniform_real_distribution<double> amp(0.3, 1.0);
  std::uniform_int_distribution<int> sgn(0, 1);

  std::vector<Interval> ivs;
  double u = expo(rng);
  for (int k = 0; k < count; ++k) {
    double rho = std::ldexp(1.0, 10 + k) * (1.0 + jit(rng));
    ivs.push_back({rho, std::pow(rho, u)});
  }
  IntervalFamily fam(std::move(ivs), 10);
  Synthetic s{drop ? drop_prefix(fam, 0.01) : fam, {}};
  s.samples.a0 = 1.0;
  s.samples.m0 = 1.0;
  for (std::size_t i = 0; i < s.family.size(); ++i) {
    const Interval& iv = s.family.at(i);
    IntervalSamples::PerInterval pk;
    double span = std::min(iv.d, 8.0);
    pk.n_lo = static_cast<std::int64_t>(std::ceil(iv.rho - span));
    pk.n_hi = static_cast<std::int64_t>(std::floor(iv.rho + span));
    for (std::int64_t n = pk.n_lo; n <= pk.n_hi; ++n) {
      double a = amp(rng) * (sgn(rng) ? 1.0 : -1.0);
      pk.a.push_back(a);
      pk.m.push_back(1.0);
    }
    s.samples.per_k.push_back(std::move(pk));
  }
  return s;
}

double banach_norm(const std::vector<double>& c, const IntervalFamily& fam) {
  double m = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c[i]) / fam.at(i).d);
  return m;
}

// Sign-flipped model: the breaking coefficients are quadratic in the samples,
// so replacing G by -G must leave t_k and c unchanged.
class NegatedSimple final : public GenFnModel {
 public:
  explicit NegatedSimple(int k_cap) : base_(k_cap) {}
  std::string kind() const override { return "negated"; }
  double eval(double x) const override { return -base_.eval(x); }
  EvalBudget eval_with_budget(double x) const override {
    EvalBudget b = base_.eval_with_budget(x);
    return {-b.value, b.tail};
  }
  std::complex<double> eval_complex(std::complex<double> z) const override {
    return -base_.eval_complex(z);
  }
  bool has_analytic_derivative() const override { return true; }
  double derivative(double x) const override { return -base_.derivative(x); }
  double derivative_at_zero(double lambda) const override {
    return -base_.derivative_at_zero(lambda);
  }
  double log_abs_imag_axis(double y) const override { return base_.log_abs_imag_axis(y); }

 private:
  SimpleExampleModel base_;
};

}  // namespace

TEST_CASE("hypothesis suite passes on the canonical family") {
  const CanonicalRun& c = canonical_run();
  const HypothesisReport& h = c.hyp;
  CHECK(h.all_pass());
  CHECK(h.outside_ok);
  CHECK(h.side_ok);
  CHECK(h.s_bound_ok);
  CHECK(h.log_length_ok);
  CHECK(h.zero_dist_ok);
  CHECK(h.zero_gap_ok);
  CHECK(h.axis_ok);

  REQUIRE(h.g.size() == 9);
  for (double g : h.g) CHECK(g == doctest::Approx(19.7).epsilon(0.01));
  // The interval mass stabilizes across scales.
  for (std::size_t i = 2; i + 1 < h.g.size(); ++i) {
    CHECK(std::abs(h.g[i] - h.g[i + 1]) <= 0.05);
  }

  double r = std::pow(2.0, -0.8);
  double closed = std::pow(2.0, -8.0) * (1.0 - std::pow(r, 9.0)) / (1.0 - r);
  CHECK(h.log_length_partials.back() == doctest::Approx(closed).epsilon(1e-12));

  // s_k = 0.35 sqrt(d g rho) under the rescale, all below rho/10.
  for (std::size_t i = 0; i < h.s.size(); ++i) {
    double want = 0.35 * std::sqrt(c.family.at(i).d * h.g[i] * c.family.at(i).rho);
    CHECK(h.s[i] == doctest::Approx(want).epsilon(1e-12));
    CHECK(h.s[i] <= 0.1 * c.family.at(i).rho);
  }
}

TEST_CASE("hypothesis zero scan sees a dense separated zero set") {
  const HypothesisReport& h = canonical_run().hyp;
  CHECK(h.zero_count > 1000);
  CHECK(h.min_zero_dist_to_int > 0.01);
  CHECK(h.max_zero_gap <= 4.0);
}

TEST_CASE("selected interpolation points sit in the middle half of their side") {
  const CanonicalRun& c = canonical_run();
  REQUIRE(c.sel.t.size() == 9);
  for (std::size_t i = 0; i < c.sel.t.size(); ++i) {
    const SideEntry& se = c.hyp.sides.entries[i];
    const SideInterval& side = c.sel.side[i] > 0 ? se.plus : se.minus;
    double q = side.length() / 4.0;
    CHECK(c.sel.t[i] >= side.lo + q);
    CHECK(c.sel.t[i] <= side.hi - q);
    CHECK(c.sel.cost[i] > 0.0);
    CHECK(c.sel.running_product[i] >= 1e-3);
    CHECK(c.sel.running_product[i] <= 1e3);
  }
}

TEST_CASE("per-side winner minimizes the weighted tail cost over its zeros") {
  const CanonicalRun& c = canonical_run();
  std::size_t i = 2;  // k = 12
  const SideEntry& se = c.hyp.sides.entries[i];
  const SideInterval& side = c.sel.side[i] > 0 ? se.plus : se.minus;
  double q = side.length() / 4.0;
  auto zl = c.model->zeros_in(side.lo + q, side.hi - q);
  REQUIRE(!zl->zeros.empty());

  // Cost weights: s^2 G(n)^2 over the integers of both side intervals.
  double s2 = se.s * se.s;
  std::vector<std::pair<double, double>> weights;
  for (const SideInterval* J : {&se.minus, &se.plus}) {
    std::int64_t a = static_cast<std::int64_t>(std::ceil(J->lo));
    std::int64_t b = static_cast<std::int64_t>(std::floor(J->hi));
    for (std::int64_t n = a; n <= b; ++n) {
      double v = c.model->eval(static_cast<double>(n));
      weights.emplace_back(static_cast<double>(n), v * v);
    }
  }
  auto cost_of = [&](double lam) {
    double acc = 0.0;
    for (const auto& [n, g2] : weights) acc += g2 / ((n - lam) * (n - lam));
    return s2 * acc;
  };

  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : zl->zeros) best = std::min(best, cost_of(e.lambda));
  CHECK(cost_of(c.sel.t[i]) == doctest::Approx(best).epsilon(1e-9));
  CHECK(c.sel.cost[i] == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("the multiplier vanishes at centers and blows up at its poles") {
  const CanonicalRun& c = canonical_run();
  for (std::size_t i = 0; i < c.family.size(); ++i) {
    CHECK(eval_m(c.family.at(i).rho, c.family, c.sel.t) == 0.0);
    CHECK_THROWS_AS((void)eval_m(c.sel.t[i], c.family, c.sel.t), PoleError);
  }
  CHECK(eval_m(0.0, c.family, c.sel.t) == doctest::Approx(1.0).epsilon(1e-14));

  auto ratios = m_band_ratios(c.family, c.sel.t);
  REQUIRE(ratios.size() == 9);
  for (const auto& br : ratios) {
    CHECK(br.min_ratio > 0.3);
    CHECK(br.max_ratio < 3.0);
    CHECK(br.min_ratio <= br.max_ratio);
  }
}

TEST_CASE("f-sequence diagnostics stay within their design bands") {
  const CanonicalRun& c = canonical_run();
  CHECK(c.f.samples.m0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.f.samples.a0 ==
        doctest::Approx(c.model->eval(0.0) * c.f.samples.m0).epsilon(1e-12));
  REQUIRE(c.f.inside_bound_ratio.size() == 9);
  for (double r : c.f.inside_bound_ratio) {
    CHECK(r > 1e-3);
    CHECK(r < 1e3);
  }
  // Off-support mass is finite; the dyadic partials are cumulative and end
  // at the full-window value.
  CHECK(std::isfinite(c.f.outside_sq));
  CHECK(c.f.outside_sq > 0.0);
  REQUIRE(c.f.outside_partials.size() >= 2);
  for (std::size_t i = 1; i < c.f.outside_partials.size(); ++i) {
    CHECK(c.f.outside_partials[i] >= c.f.outside_partials[i - 1]);
  }
  CHECK(c.f.outside_partials.back() == c.f.outside_sq);
  CHECK(std::isfinite(c.f.side_sq));
  CHECK(c.f.side_sq < 10.0);
}

TEST_CASE("fixed point matches the dense solve on synthetic instances") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 3; ++rep) {
    Synthetic s = make_synthetic(rng, 9 + rep);
    BreakerOptions opts;
    FixedPointResult fp = solve_fixed_point(s.family, s.samples, opts);
    CHECK(fp.linear_norm_bound < 0.5);

    const std::size_t K = fp.c.size();
    Eigen::MatrixXd M(K, K);
    Eigen::VectorXd rhs(K);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t m = 0; m < K; ++m) {
        M(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) =
            k == m ? fp.D[k] : fp.A[k][m];
      }
      rhs(static_cast<Eigen::Index>(k)) = -1.0 / s.family.at(k).rho;
    }
    Eigen::VectorXd dense = M.colPivHouseholderQr().solve(rhs);

    std::vector<double> diff(K);
    for (std::size_t k = 0; k < K; ++k) diff[k] = fp.c[k] - dense(static_cast<Eigen::Index>(k));
    double rel = banach_norm(diff, s.family) /
                 banach_norm(std::vector<double>(dense.data(), dense.data() + K), s.family);
    CHECK(rel <= 1e-10);
  }
}

TEST_CASE("a single interval solves in closed form") {
  std::mt19937_64 rng(7);
  Synthetic s = make_synthetic(rng, 1, false);
  REQUIRE(s.family.size() == 1);
  BreakerOptions opts;
  FixedPointResult fp = solve_fixed_point(s.family, s.samples, opts);
  CHECK(fp.c[0] == doctest::Approx(-1.0 / (s.family.at(0).rho * fp.D[0])).epsilon(1e-14));
}

TEST_CASE("exhausting the iteration budget raises a convergence error") {
  std::mt19937_64 rng(13);
  Synthetic s = make_synthetic(rng, 8);
  BreakerOptions opts;
  opts.fp_max_iters = 1;
  opts.fp_rel_tol = 1e-16;
  CHECK_THROWS_AS((void)solve_fixed_point(s.family, s.samples, opts), ConvergenceError);
}

TEST_CASE("breaking run meets every residual target") {
  const BreakerReport& rep = canonical_run().rep;
  CHECK(rep.all_targets_met());

  CHECK(rep.s_ok);
  CHECK(rep.s_target == 1e-8 / rep.rho[0]);
  CHECK(rep.s_residual_max <= rep.s_target);

  CHECK(rep.orth_ok);
  REQUIRE(rep.orth_residual.size() == rep.orth_budget.size());
  for (std::size_t i = 0; i < rep.orth_residual.size(); ++i) {
    CHECK(rep.orth_residual[i] <= rep.orth_budget[i]);
  }

  CHECK(rep.identity_ok);
  REQUIRE(rep.identity_z.size() == 20);
  for (std::size_t i = 0; i < rep.identity_gap.size(); ++i) {
    CHECK(rep.identity_gap[i] <= rep.identity_budget[i]);
  }

  CHECK(rep.pairing_ok);
  CHECK(rep.pairing >= 0.5);
  CHECK(rep.pairing == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("dual coefficients start at the reciprocal of the zero sample") {
  const CanonicalRun& c = canonical_run();
  CHECK(c.rep.b0 == doctest::Approx(1.0 / c.f.samples.a0).epsilon(1e-12));
  CHECK(c.rep.sum_b_sq > c.rep.b0 * c.rep.b0);
  CHECK(c.rep.sum_b_sq < 1.0);
  for (double ds : c.rep.denom_scale) {
    CHECK(ds > 0.05);
    CHECK(ds < 20.0);
  }
  // Correction coefficients are order -d_k in the Banach scaling.
  for (std::size_t i = 0; i < c.fp.c.size(); ++i) {
    double ratio = c.fp.c[i] / c.family.at(i).d;
    CHECK(ratio < 0.0);
    CHECK(std::abs(ratio) < 10.0);
  }
  CHECK(c.fp.banach_norm_c < 10.0);
  CHECK(c.fp.linear_norm_bound < 0.5);
}

TEST_CASE("negating the model leaves selection and coefficients unchanged") {
  const CanonicalRun& c = canonical_run();
  NegatedSimple neg(60);
  HypothesisReport hyp = check_hypotheses(neg, c.family, c.opts);
  CHECK(hyp.all_pass());
  TkSelection sel = select_tk(neg, c.family, hyp, c.opts);
  REQUIRE(sel.t.size() == c.sel.t.size());
  for (std::size_t i = 0; i < sel.t.size(); ++i) {
    CHECK(sel.t[i] == doctest::Approx(c.sel.t[i]).epsilon(1e-12));
    CHECK(sel.side[i] == c.sel.side[i]);
  }
  FSequence f = build_f(neg, c.family, sel, hyp, c.opts);
  FixedPointResult fp = solve_fixed_point(c.family, f.samples, c.opts);
  for (std::size_t i = 0; i < fp.c.size(); ++i) {
    CHECK(fp.c[i] == doctest::Approx(c.fp.c[i]).epsilon(1e-10));
  }
}
