#include "pwsynth/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "pwsynth/breaker.hpp"
#include "pwsynth/certifier.hpp"
#include "pwsynth/errors.hpp"
#include "pwsynth/gamma.hpp"
#include "pwsynth/pw_numerics.hpp"
#include "pwsynth/report_io.hpp"
#include "pwsynth/summation.hpp"

namespace pwsynth {
namespace {

RunConfig load_with_override(const CommandIO& io) {
  RunConfig cfg = load_config(io.config_path);
  if (io.window_override != 0) {
    const std::int64_t n = io.window_override;
    if (n < 1024 || (n & (n - 1)) != 0) {
      throw ConfigError("--window", "must be a power of two, at least 1024");
    }
    cfg.truncation.window = n;
    cfg.breaker.window = n;
  }
  return cfg;
}

std::string report_path(const CommandIO& io, const char* command) {
  if (!io.out_json.empty()) return io.out_json;
  return std::string(command) + "_report.json";
}

void field_i64(JsonWriter& w, const std::string& k, const std::vector<std::int64_t>& v) {
  w.key(k).begin_array();
  for (std::int64_t x : v) w.value(x);
  w.end_array();
}

void family_json(JsonWriter& w, const IntervalFamily& family) {
  w.key("family").begin_object();
  w.field("k_offset", family.k_offset());
  w.key("entries").begin_array();
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Interval& iv = family.at(i);
    w.begin_object()
        .field("k", family.k_of(i))
        .field("rho", iv.rho)
        .field("d", iv.d)
        .end_object();
  }
  w.end_array();
  w.end_object();
}

void violations_json(JsonWriter& w, const ValidationReport& vr) {
  w.key("violations").begin_array();
  for (const Violation& v : vr.violations) {
    w.begin_object().field("check", v.check);
    if (v.k != std::numeric_limits<int>::min()) w.field("k", v.k);
    w.field("detail", v.detail).end_object();
  }
  w.end_array();
}

void hypotheses_json(JsonWriter& w, const HypothesisReport& hyp) {
  w.key("hypotheses").begin_object();
  w.field("g", hyp.g).field("s", hyp.s);
  {
    w.key("sides").begin_array();
    for (const SideEntry& e : hyp.sides.entries) {
      w.begin_object()
          .field("s", e.s)
          .field("minus_lo", e.minus.lo)
          .field("minus_hi", e.minus.hi)
          .field("plus_lo", e.plus.lo)
          .field("plus_hi", e.plus.hi)
          .field("oversize", e.oversize)
          .field("throwaway", e.throwaway)
          .field("degenerate", e.degenerate)
          .end_object();
    }
    w.end_array();
  }
  w.field("outside_partials", hyp.outside_partials)
      .field("outside_sq", hyp.outside_sq)
      .field("rule_exclusions", hyp.rule_exclusions)
      .field("outside_ok", hyp.outside_ok)
      .field("side_terms", hyp.side_terms)
      .field("side_sum", hyp.side_sum)
      .field("side_tail_ratio", hyp.side_tail_ratio)
      .field("side_ok", hyp.side_ok)
      .field("s_bound_ok", hyp.s_bound_ok)
      .field("log_length_partials", hyp.log_length_partials)
      .field("log_length_total", hyp.log_length_total)
      .field("log_length_tail_ratio", hyp.log_length_tail_ratio)
      .field("log_length_ok", hyp.log_length_ok);
  w.key("zero_scan")
      .begin_object()
      .field("base_lo", hyp.scan_base_lo)
      .field("base_hi", hyp.scan_base_hi)
      .field("count", hyp.zero_count)
      .field("min_dist_to_int", hyp.min_zero_dist_to_int)
      .field("max_gap", hyp.max_zero_gap)
      .field("dist_ok", hyp.zero_dist_ok)
      .field("gap_ok", hyp.zero_gap_ok)
      .end_object();
  w.field("axis_decay", hyp.axis_decay).field("axis_ok", hyp.axis_ok);
  w.field("all_pass", hyp.all_pass());
  w.end_object();
}

void selection_json(JsonWriter& w, const TkSelection& sel) {
  w.key("selection")
      .begin_object()
      .field("t", sel.t)
      .field("side", sel.side)
      .field("cost", sel.cost)
      .field("running_product", sel.running_product)
      .end_object();
}

void f_json(JsonWriter& w, const FSequence& f) {
  w.key("f")
      .begin_object()
      .field("window", f.window)
      .field("a0", f.samples.a0)
      .field("m0", f.samples.m0)
      .field("inside_sq", f.inside_sq)
      .field("inside_bound_ratio", f.inside_bound_ratio)
      .field("side_sq", f.side_sq)
      .field("outside_sq", f.outside_sq)
      .field("outside_partials", f.outside_partials)
      .end_object();
}

void fixed_point_json(JsonWriter& w, const FixedPointResult& fp) {
  w.key("fixed_point")
      .begin_object()
      .field("iterations", fp.iterations)
      .field("step_norms", fp.step_norms)
      .field("last_step_ratio", fp.last_step_ratio)
      .field("banach_norm_c", fp.banach_norm_c)
      .field("linear_norm_bound", fp.linear_norm_bound)
      .field("D", fp.D)
      .end_object();
}

void breaker_report_json(JsonWriter& w, const BreakerReport& rep) {
  w.key("report").begin_object();
  w.field("rho", rep.rho)
      .field("d", rep.d)
      .field("g", rep.g)
      .field("s", rep.s)
      .field("t", rep.t)
      .field("side", rep.side)
      .field("c", rep.c)
      .field("s_residual", rep.s_residual)
      .field("s_residual_max", rep.s_residual_max)
      .field("s_target", rep.s_target)
      .field("s_ok", rep.s_ok)
      .field("kappa", rep.kappa)
      .field("orth_residual", rep.orth_residual)
      .field("orth_budget", rep.orth_budget)
      .field("orth_ok", rep.orth_ok)
      .field("identity_z", rep.identity_z)
      .field("identity_gap", rep.identity_gap)
      .field("identity_budget", rep.identity_budget)
      .field("identity_ok", rep.identity_ok)
      .field("pairing", rep.pairing)
      .field("pairing_constant", rep.pairing_constant)
      .field("pairing_ok", rep.pairing_ok)
      .field("b0", rep.b0)
      .field("sum_b_sq", rep.sum_b_sq)
      .field("bsq_constant", rep.bsq_constant)
      .field("denom_scale", rep.denom_scale);
  {
    std::vector<double> bmin, bmax;
    bmin.reserve(rep.band_ratios.size());
    bmax.reserve(rep.band_ratios.size());
    for (const BandRatio& b : rep.band_ratios) {
      bmin.push_back(b.min_ratio);
      bmax.push_back(b.max_ratio);
    }
    w.field("band_min", bmin).field("band_max", bmax);
  }
  w.field("all_targets_met", rep.all_targets_met());
  w.end_object();
}

double parity(std::int64_t n) { return (n % 2 != 0) ? -1.0 : 1.0; }

// The dual sequence b on the defect window: b_0 = 1/a_0 and
// b_n = c_k a_n / (rho_k - n) on I_k, zero elsewhere.
SampledPWVector sample_candidate(const IntervalFamily& family, const FSequence& f,
                                 const FixedPointResult& fp, double b0,
                                 std::int64_t N) {
  SampledPWVector g = make_sampled(N);
  g.at(0) = b0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& per = f.samples.per_k[i];
    const double rho = family.at(i).rho;
    for (std::int64_t n = per.n_lo; n <= per.n_hi; ++n) {
      if (std::llabs(n) > N) throw std::invalid_argument(
          "defect window does not cover the interval family");
      const double a = per.a[static_cast<std::size_t>(n - per.n_lo)];
      if (a == 0.0) continue;  // exact zero of m at an integer center
      g.at(n) = parity(n) * fp.c[i] * a / (rho - static_cast<double>(n));
    }
  }
  return g;
}

struct DefectWindowResult {
  DefectReport report;
  double pairing_win = 0.0;
  double gh = 0.0;
  double delta = 0.0;
  double budget = 0.0;
  double lower_bound = 0.0;
  double f_norm = 0.0;
  bool lb_positive = false;
  bool residual_exceeds_lb = false;
  bool pass() const { return lb_positive && residual_exceeds_lb; }
};

}  // namespace

int cmd_validate(const CommandIO& io) {
  RunConfig cfg = load_with_override(io);
  std::shared_ptr<const GenFnModel> model = make_model(cfg.model);
  IntervalFamily family = make_family(cfg.family);

  std::shared_ptr<const Spectrum> spectrum;
  if (cfg.model.kind == "pv") spectrum = make_spectrum(cfg.model.spectrum);
  const double win = static_cast<double>(std::min<std::int64_t>(cfg.truncation.window, 4096));
  ValidationReport vr = validate_family(family, spectrum.get(), -win, win);

  JsonWriter w;
  w.begin_object().field("command", "validate").field("model", model->kind());
  family_json(w, family);
  w.key("observations")
      .begin_object()
      .field("window_lo", -win)
      .field("window_hi", win)
      .field("min_center_dist_to_int", vr.min_center_dist_to_int)
      .field("spectrum_min_dist_to_int", vr.spectrum_min_dist_to_int)
      .field("spectrum_max_gap", vr.spectrum_max_gap)
      .end_object();
  violations_json(w, vr);
  w.field("ok", vr.ok()).end_object();
  write_file_atomic(report_path(io, "validate"), w.str());
  return vr.ok() ? 0 : 1;
}

int cmd_break(const CommandIO& io) {
  RunConfig cfg = load_with_override(io);
  std::shared_ptr<const GenFnModel> model = make_model(cfg.model);
  IntervalFamily fam0 = make_family(cfg.family);

  // The lattice-distance rule enforced by the validate command is not a gate
  // here: integer centers are legal for breaking because m vanishes exactly
  // at each center, so every divided term they would poison is an exact zero.
  IntervalFamily family = drop_prefix(fam0, cfg.breaker.eta);
  const int dropped = static_cast<int>(fam0.size() - family.size());
  if (family.empty()) {
    throw std::invalid_argument("eta drops every interval; nothing left to break");
  }

  HypothesisReport hyp = check_hypotheses(*model, family, cfg.breaker);
  if (!hyp.all_pass()) {
    JsonWriter w;
    w.begin_object()
        .field("command", "break")
        .field("model", model->kind())
        .field("stage", "hypotheses")
        .field("eta", cfg.breaker.eta)
        .field("dropped_prefix", dropped)
        .field("window", cfg.breaker.window);
    family_json(w, family);
    hypotheses_json(w, hyp);
    w.field("ok", false).end_object();
    write_file_atomic(report_path(io, "break"), w.str());
    return 1;
  }

  TkSelection sel = select_tk(*model, family, hyp, cfg.breaker);
  FSequence f = build_f(*model, family, sel, hyp, cfg.breaker);
  FixedPointResult fp = solve_fixed_point(family, f.samples, cfg.breaker);
  BreakerReport rep = verify_breaker(family, sel, f, fp, hyp);

  JsonWriter w;
  w.begin_object()
      .field("command", "break")
      .field("model", model->kind())
      .field("stage", "complete")
      .field("eta", cfg.breaker.eta)
      .field("dropped_prefix", dropped)
      .field("window", cfg.breaker.window);
  family_json(w, family);
  hypotheses_json(w, hyp);
  selection_json(w, sel);
  f_json(w, f);
  fixed_point_json(w, fp);
  breaker_report_json(w, rep);
  w.field("ok", rep.all_targets_met()).end_object();
  write_file_atomic(report_path(io, "break"), w.str());

  if (!io.csv_path.empty()) {
    CsvWriter csv("k,rho,d,g,s,t,side,c,S_residual,orth_residual");
    for (std::size_t i = 0; i < family.size(); ++i) {
      csv.begin_row();
      csv.cell(family.k_of(i));
      csv.cell(rep.rho[i]);
      csv.cell(rep.d[i]);
      csv.cell(rep.g[i]);
      csv.cell(rep.s[i]);
      csv.cell(rep.t[i]);
      csv.cell(rep.side[i]);
      csv.cell(rep.c[i]);
      csv.cell(rep.s_residual[i]);
      csv.cell(rep.orth_residual[i]);
    }
    write_file_atomic(io.csv_path, csv.str());
  }
  return rep.all_targets_met() ? 0 : 1;
}

int cmd_certify(const CommandIO& io) {
  RunConfig cfg = load_with_override(io);
  std::shared_ptr<const GenFnModel> model = make_model(cfg.model);
  IntervalFamily family = make_family(cfg.family);

  KernelWeights weights = make_weights(*model, cfg.truncation.window);
  CertificateReport cert = certify(*model, weights, family, cfg.certifier);

  std::unordered_map<int, const NkEntry*> nk_by_k;
  for (const NkEntry& e : cert.nk.entries) nk_by_k[e.k] = &e;
  auto in_nk = [&](int k, std::int64_t n) {
    auto it = nk_by_k.find(k);
    if (it == nk_by_k.end()) return false;
    const auto& ns = it->second->ns;
    return std::binary_search(ns.begin(), ns.end(), n);
  };

  JsonWriter w;
  w.begin_object()
      .field("command", "certify")
      .field("model", model->kind())
      .field("window", weights.N);
  family_json(w, family);
  w.field("standing_partials", weights.standing_partials)
      .field("standing_sum", weights.standing_sum);
  w.key("conditions")
      .begin_object()
      .field("cond_i", cert.conditions.cond_i)
      .field("cond_ii", cert.conditions.cond_ii)
      .field("grid_step", cert.conditions.grid_step)
      .field("grid_zero_hits", cert.conditions.zero_hits)
      .field("cond_i_sup", cert.conditions.cond_i_sup)
      .field("cond_ii_sup", cert.conditions.cond_ii_sup)
      .field("flagged", cert.conditions.flagged)
      .field("log_length_partials", cert.conditions.log_length_partials)
      .field("fit_slope", cert.conditions.fit_slope)
      .field("divergent_rule", cert.conditions.divergent_rule)
      .field("divergence_note", cert.conditions.divergence_note)
      .end_object();
  w.key("roots").begin_array();
  for (const MRootRow& r : cert.table.rows) {
    w.begin_object()
        .field("k", r.k)
        .field("n", r.n)
        .field("t", r.t)
        .field("bracket_lo", r.bracket_lo)
        .field("bracket_hi", r.bracket_hi)
        .field("m_value", r.m_value)
        .field("in_Jk", r.in_Jk)
        .field("in_Nk", in_nk(r.k, r.n))
        .field("eps", r.eps)
        .end_object();
  }
  w.end_array();
  w.key("nk").begin_object();
  w.key("entries").begin_array();
  for (const NkEntry& e : cert.nk.entries) {
    w.begin_object()
        .field("k", e.k)
        .field("C1", e.C1)
        .field("ok", e.ok)
        .field("g", e.g)
        .field("size", e.ns.size())
        .field("aggregate_ratio", e.aggregate_ratio);
    field_i64(w, "ns", e.ns);
    w.end_object();
  }
  w.end_array();
  w.field("C1_final", cert.nk.C1_final).field("all_ok", cert.nk.all_ok).end_object();
  w.field("eps_floor", cert.eps_floor)
      .field("eps_min", cert.eps_min)
      .field("ok", cert.gates_ok)
      .end_object();
  write_file_atomic(report_path(io, "certify"), w.str());

  if (!io.csv_path.empty()) {
    CsvWriter roots("n,t_root,eps,in_Nk");
    for (const MRootRow& r : cert.table.rows) {
      roots.begin_row();
      roots.cell(r.n);
      roots.cell(r.t);
      roots.cell(r.eps);
      roots.cell(in_nk(r.k, r.n) ? 1 : 0);
    }
    write_file_atomic(io.csv_path, roots.str());

    CsvWriter conds("k,cond_i,cond_ii,C1,Nk_size");
    for (std::size_t i = 0; i < family.size(); ++i) {
      const NkEntry& e = cert.nk.entries[i];
      conds.begin_row();
      conds.cell(family.k_of(i));
      conds.cell(cert.conditions.cond_i[i]);
      conds.cell(cert.conditions.cond_ii[i]);
      conds.cell(e.C1);
      conds.cell(static_cast<std::int64_t>(e.ns.size()));
    }
    write_file_atomic(io.csv_path + ".conditions.csv", conds.str());
  }
  return cert.gates_ok ? 0 : 1;
}

int cmd_defect(const CommandIO& io) {
  RunConfig cfg = load_with_override(io);
  std::shared_ptr<const GenFnModel> model = make_model(cfg.model);
  IntervalFamily fam0 = make_family(cfg.family);

  IntervalFamily family = drop_prefix(fam0, cfg.breaker.eta);
  if (family.empty()) {
    throw std::invalid_argument("eta drops every interval; nothing left to test");
  }
  HypothesisReport hyp = check_hypotheses(*model, family, cfg.breaker);
  if (!hyp.all_pass()) {
    JsonWriter w;
    w.begin_object()
        .field("command", "defect")
        .field("model", model->kind())
        .field("stage", "hypotheses");
    hypotheses_json(w, hyp);
    w.field("ok", false).end_object();
    write_file_atomic(report_path(io, "defect"), w.str());
    return 1;
  }
  TkSelection sel = select_tk(*model, family, hyp, cfg.breaker);
  FSequence f = build_f(*model, family, sel, hyp, cfg.breaker);
  FixedPointResult fp = solve_fixed_point(family, f.samples, cfg.breaker);
  BreakerReport rep = verify_breaker(family, sel, f, fp, hyp);

  double plo = 0.0, phi = 0.0;
  if (!io.partition.empty()) {
    if (std::sscanf(io.partition.c_str(), "%lf:%lf", &plo, &phi) != 2) {
      throw std::invalid_argument("partition must be \"lo:hi\"");
    }
  } else {
    plo = -192.0;
    const Interval& last = family.at(family.size() - 1);
    const SideEntry& last_side = hyp.sides.entries.back();
    phi = std::ceil(last.hi() + 2.5 * last_side.s);
  }
  if (!(plo < phi)) throw std::invalid_argument("partition bounds must satisfy lo < hi");

  std::shared_ptr<const ZeroList> zeros = model->zeros_in(plo, phi);
  const std::size_t zero_count = zeros->zeros.size();
  std::vector<char> is_t(zero_count, 0);
  for (double t : sel.t) {
    const std::ptrdiff_t idx = zeros->find(t, 1e-9 * std::max(1.0, std::fabs(t)));
    if (idx < 0) {
      throw std::invalid_argument("partition must contain every perturbed zero t_k");
    }
    is_t[static_cast<std::size_t>(idx)] = 1;
  }

  std::vector<double> klam, kslam;  // kernel columns
  klam.reserve(zero_count);
  for (std::size_t i = 0; i < zero_count; ++i) {
    if (!is_t[i]) {
      klam.push_back(zeros->zeros[i].lambda);
      kslam.push_back(sinpi(zeros->zeros[i].lambda));
    }
  }
  std::vector<double> bdg;  // G'(t_k) for the biorthogonal columns
  bdg.reserve(sel.t.size());
  for (double t : sel.t) bdg.push_back(model->derivative_at_zero(t));

  const int cols = static_cast<int>(klam.size() + sel.t.size());
  if (cols > 20000) {
    throw std::invalid_argument("partition yields too many columns; shrink it");
  }

  const std::int64_t base = cfg.truncation.window;
  if (2 * base > (std::int64_t{1} << 22)) {
    throw std::invalid_argument("window too large for the dense defect sweep");
  }
  const std::vector<std::int64_t> windows = {base, 2 * base};

  std::vector<DefectWindowResult> results;
  for (std::int64_t N : windows) {
    SampledPWVector cand = sample_candidate(family, f, fp, rep.b0, N);
    SampledPWVector fv = make_sampled(N);
    for (std::int64_t n = -N; n <= N; ++n) {
      fv.at(n) = model->eval(static_cast<double>(n)) *
                 eval_m(static_cast<double>(n), family, sel.t);
    }

    // Orthonormalize the perturbed-zero columns, then project f off them.
    std::vector<SampledPWVector> q;
    q.reserve(sel.t.size());
    for (double t : sel.t) {
      SampledPWVector col = sample_biorth(*model, *zeros, t, N);
      for (const SampledPWVector& prev : q) {
        const double p = pairing(prev, col);
        for (std::size_t i = 0; i < col.v.size(); ++i) col.v[i] -= p * prev.v[i];
      }
      const double nrm = col.norm();
      if (nrm <= 0.0) throw std::domain_error("degenerate biorthogonal column");
      for (double& x : col.v) x /= nrm;
      q.push_back(std::move(col));
    }
    SampledPWVector h = fv;
    for (const SampledPWVector& qi : q) {
      const double p = pairing(qi, h);
      for (std::size_t i = 0; i < h.v.size(); ++i) h.v[i] -= p * qi.v[i];
    }

    StreamedDefectInput input;
    input.N = N;
    input.cols = cols;
    input.candidate = &cand;
    input.audit = {&h};
    const std::size_t nk = klam.size();
    input.fill_row = [&](std::int64_t n, double* out) {
      const double x = static_cast<double>(n);
      const double par = parity(n);
      for (std::size_t j = 0; j < nk; ++j) {
        const double dlt = x - klam[j];
        out[j] = (std::fabs(dlt) < 1e-8)
                     ? 1.0 - (std::numbers::pi * dlt) * (std::numbers::pi * dlt) / 6.0
                     : -par * kslam[j] / (std::numbers::pi * dlt);
      }
      if (!sel.t.empty()) {
        const double gn = model->eval(x);
        for (std::size_t j = 0; j < sel.t.size(); ++j) {
          out[nk + j] = gn / (bdg[j] * (x - sel.t[j]));
        }
      }
    };

    DefectWindowResult r;
    r.report = gram_defect_streamed(input);
    r.pairing_win = pairing(fv, cand);
    r.gh = pairing(cand, h);
    r.f_norm = fv.norm();
    for (double p : r.report.audit_products[0]) r.delta = std::max(r.delta, std::fabs(p));
    r.budget = std::fabs(r.pairing_win - r.gh) + r.report.solution_l1 * r.delta;
    r.lower_bound =
        (std::fabs(r.pairing_win) - r.budget) / (r.f_norm * r.report.candidate_norm);
    r.lb_positive = r.lower_bound > 0.0;
    r.residual_exceeds_lb = r.report.residual >= r.lower_bound;
    results.push_back(std::move(r));
  }

  bool all_pass = true;
  for (const auto& r : results) all_pass = all_pass && r.pass();

  JsonWriter w;
  w.begin_object()
      .field("command", "defect")
      .field("model", model->kind())
      .field("stage", "complete")
      .field("window_base", base);
  w.key("partition").begin_object().field("lo", plo).field("hi", phi).end_object();
  w.key("columns")
      .begin_object()
      .field("total", static_cast<std::int64_t>(cols))
      .field("kernels", klam.size())
      .field("biorthogonal", sel.t.size())
      .end_object();
  selection_json(w, sel);
  w.key("breaker")
      .begin_object()
      .field("pairing", rep.pairing)
      .field("s_residual_max", rep.s_residual_max)
      .field("s_target", rep.s_target)
      .field("targets_met", rep.all_targets_met())
      .end_object();
  w.key("windows").begin_array();
  for (const auto& r : results) {
    w.begin_object()
        .field("window", r.report.N)
        .field("cols", r.report.cols)
        .field("sigma_min", r.report.sigma_min)
        .field("sigma_max", r.report.sigma_max)
        .field("candidate_norm", r.report.candidate_norm)
        .field("residual", r.report.residual)
        .field("solution_l1", r.report.solution_l1)
        .field("pairing_win", r.pairing_win)
        .field("gh", r.gh)
        .field("delta", r.delta)
        .field("budget", r.budget)
        .field("f_norm", r.f_norm)
        .field("lower_bound", r.lower_bound)
        .field("lb_positive", r.lb_positive)
        .field("residual_exceeds_lb", r.residual_exceeds_lb)
        .field("pass", r.pass())
        .end_object();
  }
  w.end_array();
  w.field("ok", all_pass).end_object();
  write_file_atomic(report_path(io, "defect"), w.str());

  if (!io.csv_path.empty()) {
    CsvWriter csv("window,i,sigma");
    for (const auto& r : results) {
      for (std::size_t i = 0; i < r.report.singular_values.size(); ++i) {
        csv.begin_row();
        csv.cell(r.report.N);
        csv.cell(static_cast<std::int64_t>(i));
        csv.cell(r.report.singular_values[i]);
      }
    }
    write_file_atomic(io.csv_path, csv.str());
  }
  return all_pass ? 0 : 1;
}

int cmd_example(const CommandIO& io) {
  RunConfig cfg = load_with_override(io);
  std::shared_ptr<const GenFnModel> model = make_model(cfg.model);

  const std::string csv_path = io.csv_path.empty() ? "example.csv" : io.csv_path;
  const std::string integers_path = csv_path + ".integers.csv";
  const std::string zeros_path = csv_path + ".zeros.csv";

  // Sampling regions: flat ranges for the slowly spreading models, a
  // neighborhood of each band edge for the doubling-center model whose
  // interesting behavior sits around rho_k + d_k.
  std::vector<std::pair<double, double>> regions;
  if (cfg.model.kind == "kadets") {
    const auto* km = dynamic_cast<const KadetsModel*>(model.get());
    const IntervalFamily& fam = km->family();
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const double edge = fam.at(i).hi();
      regions.emplace_back(edge - 32.0, edge + 32.0);
    }
  } else {
    double hi = cfg.model.kind == "pv" ? 16.0 : 256.0;
    if (!cfg.family.kind.empty()) {
      IntervalFamily fam = make_family(cfg.family);
      hi = std::min(4096.0, fam.at(fam.size() - 1).hi() + 16.0);
    }
    regions.emplace_back(-16.0, hi);
  }

  CsvWriter grid("x,G");
  std::size_t grid_rows = 0;
  for (const auto& [lo, hi] : regions) {
    const std::int64_t steps = static_cast<std::int64_t>(std::llround((hi - lo) * 8.0));
    for (std::int64_t j = 0; j <= steps; ++j) {
      const double x = lo + static_cast<double>(j) * 0.125;
      grid.begin_row();
      grid.cell(x);
      grid.cell(model->eval(x));
      ++grid_rows;
    }
  }
  write_file_atomic(csv_path, grid.str());

  CsvWriter ints("n,G");
  std::size_t int_rows = 0;
  if (cfg.model.kind == "kadets") {
    for (const auto& [lo, hi] : regions) {
      for (std::int64_t n = static_cast<std::int64_t>(std::ceil(lo));
           n <= static_cast<std::int64_t>(std::floor(hi)); ++n) {
        ints.begin_row();
        ints.cell(n);
        ints.cell(model->eval(static_cast<double>(n)));
        ++int_rows;
      }
    }
  } else {
    const std::int64_t hi =
        static_cast<std::int64_t>(std::min(4096.0, regions.front().second));
    for (std::int64_t n = -64; n <= hi; ++n) {
      ints.begin_row();
      ints.cell(n);
      ints.cell(model->eval(static_cast<double>(n)));
      ++int_rows;
    }
  }
  write_file_atomic(integers_path, ints.str());

  CsvWriter zrows("lambda,deriv");
  std::size_t zero_rows = 0;
  for (const auto& [lo, hi] : regions) {
    ZeroList zl = find_zeros(*model, lo, hi);
    for (const ZeroEntry& z : zl.zeros) {
      zrows.begin_row();
      zrows.cell(z.lambda);
      zrows.cell(z.deriv);
      ++zero_rows;
    }
  }
  write_file_atomic(zeros_path, zrows.str());

  JsonWriter w;
  w.begin_object().field("command", "example").field("model", model->kind());
  w.key("regions").begin_array();
  for (const auto& [lo, hi] : regions) {
    w.begin_object().field("lo", lo).field("hi", hi).end_object();
  }
  w.end_array();
  w.field("grid_step", 0.125)
      .field("grid_rows", grid_rows)
      .field("integer_rows", int_rows)
      .field("zero_rows", zero_rows)
      .field("csv", csv_path)
      .field("integers_csv", integers_path)
      .field("zeros_csv", zeros_path)
      .field("ok", true)
      .end_object();
  write_file_atomic(report_path(io, "example"), w.str());
  return 0;
}

}  // namespace pwsynth
