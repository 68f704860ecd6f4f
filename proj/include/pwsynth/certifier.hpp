#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwsynth/genfun.hpp"
#include "pwsynth/intervals.hpp"
#include "pwsynth/pw_numerics.hpp"

namespace pwsynth {

struct CertifierOptions {
  double grid_cap = 0.1;          // ceiling on the condition grid step
  double ratio_cap = 100.0;       // flag threshold for the condition ratios
  std::int64_t c1_cap = std::int64_t{1} << 20;
  double root_h0 = 1e-6;          // initial pole clearance for M-root brackets
  double bisect_tol = 1e-13;
};

// Integer samples w_n = |G(n)| on [-N, N], the weights of the auxiliary
// space. A vanishing weight means a zero of the model sits on the lattice,
// which the synthesis certificates exclude.
struct KernelWeights {
  std::int64_t N = 0;
  std::vector<double> w;  // w[i] = |G(i - N)|
  // Partial sums of (w_n^2 + w_n)/(|n|+1) at |n| <= N/8, N/4, N/2, N.
  std::vector<double> standing_partials;
  double standing_sum = 0.0;
  double at(std::int64_t n) const { return w[static_cast<std::size_t>(n + N)]; }
};

KernelWeights make_weights(const GenFnModel& model, std::int64_t N);

// M(t) = sum_n w_n^2 / (n - t) over the window; strictly increasing between
// integer poles. Integer t is a pole error. The tail field is a heuristic:
// the squared-weight mass of the outer quarter of the window divided by the
// distance from t to the window edge.
EvalBudget m_eval(const KernelWeights& weights, double t);

// ||K_t||^2 = sum_n w_n^2 / (n - t)^2 over the window.
double kernel_norm_sq(const KernelWeights& weights, double t);

// Per integer n inside one of the half-intervals J_k = [rho_k - d_k/2,
// rho_k + d_k/2], the unique root of M in (n, n+1) with its certificate.
struct MRootRow {
  int k = 0;
  std::int64_t n = 0;
  double t = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double m_lo = 0.0, m_hi = 0.0;  // strictly opposite signs
  double m_value = 0.0;           // M(t) after polishing
  bool in_Jk = false;             // the root itself may exit J_k at the edge
  double eps = 0.0;               // dist(t, {n, n+1})
};

struct MRootTable {
  std::vector<MRootRow> rows;
  const MRootRow* find(int k, std::int64_t n) const;
};

MRootTable m_roots(const KernelWeights& weights, const IntervalFamily& family,
                   const CertifierOptions& opts = {});

// Integer filtering of Lemma-style index sets: N_k keeps the n in J_k whose
// kernel norm and |M(n + 1/2)| both stay below C_1 g_k / d_k, with C_1 grown
// by doubling from 4 until |N_k| >= d_k / 2 or the cap is hit.
struct NkEntry {
  int k = 0;
  std::vector<std::int64_t> ns;
  double C1 = 0.0;
  bool ok = false;
  double g = 0.0;
  double aggregate_ratio = 0.0;  // sum over J_k of ||K_{n+1/2}||^2, over g_k
};

struct NkReport {
  std::vector<NkEntry> entries;
  double C1_final = 0.0;
  bool all_ok = false;
};

NkReport select_Nk(const KernelWeights& weights, const IntervalFamily& family,
                   const CertifierOptions& opts = {});

// Per-k floor of dist(t_n, {n, n+1}) over the roots with n in N_k.
std::vector<double> epsilon_separation(const MRootTable& table, const NkReport& nk);

// Zeros of the Cauchy transform sum_k mu_k / (x - t_k), one per gap between
// consecutive retained poles (atoms with mu_k = 0 are dropped and noted).
// outer_partials accumulates (t_{k+1} - s_k)/s_k over the gaps with t_k > 0.
struct CauchyZeros {
  std::vector<double> s;
  std::vector<std::size_t> gap_index;  // index of the gap's left pole
  std::vector<double> outer_partials;
  std::vector<std::size_t> dropped;
};

CauchyZeros cauchy_zeros(const std::vector<double>& mu, const std::vector<double>& t,
                         double tol = 1e-13);

// Conditions of the synthesis certificate:
// (i)  per k: (d_k/g_k) sum_{n not in I_k} w_n^2 / |n - rho_k|,
// (ii) per k: max over an I_k grid of sqrt(g_k/d_k) / |G(x)|,
// (iii) divergence of sum d_k/rho_k: partial sums, a linear growth fit, and
//       a symbolic verdict read off the family rule when one is present.
struct ConditionReport {
  std::vector<double> cond_i;
  std::vector<double> cond_ii;
  std::vector<double> grid_step;
  // Grid points where G vanishes exactly. Such a point is a zero of the
  // generating function sitting inside I_k, so the literal ratio there is
  // infinite; condition (ii) presumes the spectrum avoids the intervals. The
  // ratio is taken over the remaining grid and the hits are counted per band
  // so a spectrum/interval collision is visible in the report. A vanishing
  // *integer* sample is different: it kills the weight w_n and everything
  // downstream, so it stays a hard error.
  std::vector<std::int64_t> zero_hits;
  double cond_i_sup = 0.0;
  double cond_ii_sup = 0.0;
  std::vector<int> flagged;  // k with a condition ratio above ratio_cap

  std::vector<double> log_length_partials;
  double fit_slope = 0.0;
  bool divergent_rule = false;
  std::string divergence_note;
};

ConditionReport check_conditions(const GenFnModel& model, const KernelWeights& weights,
                                 const IntervalFamily& family,
                                 const CertifierOptions& opts = {});

// Everything the certify command reports, assembled from the pieces above.
struct CertificateReport {
  ConditionReport conditions;
  MRootTable table;
  NkReport nk;
  std::vector<double> eps_floor;
  double eps_min = 0.0;
  bool gates_ok = false;  // all N_k filled, eps floor >= 0.05, divergent rule,
                          // condition ratios within ratio_cap
};

CertificateReport certify(const GenFnModel& model, const KernelWeights& weights,
                          const IntervalFamily& family, const CertifierOptions& opts = {});

// Both sides of the rational identity
//   f(z) sum_n a_n G(n)/(z-n) = G(z) sum_n a_n^2/(z-n),
//   f(z) = sin(pi z) sum_n (-1)^n a_n / (z - n),
// at the given off-integer points. A measurement tool: for sequences that do
// not come from an annihilating pair the residual is expected nonzero.
struct IdentityResiduals {
  std::vector<double> z;
  std::vector<double> lhs, rhs, residual;
  double max_residual = 0.0;
};

IdentityResiduals functional_identity_residual(const GenFnModel& model,
                                               const SampledPWVector& a,
                                               const std::vector<double>& z_samples);

}  // namespace pwsynth
