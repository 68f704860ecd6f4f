#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pwsynth/genfun.hpp"

namespace pwsynth {

// A band-limited function represented by its samples on the integers of
// [-N, N]. With the sinc functions as orthonormal basis, the l2 inner
// product of two sample vectors is the (window-truncated) function pairing.
struct SampledPWVector {
  std::int64_t N = 0;
  std::vector<double> v;  // v[i] = f(i - N), size 2N + 1

  double& at(std::int64_t n) { return v[static_cast<std::size_t>(n + N)]; }
  double at(std::int64_t n) const { return v[static_cast<std::size_t>(n + N)]; }
  double norm() const;
};

SampledPWVector make_sampled(std::int64_t N);

// Samples of the reproducing kernel at frequency lambda:
//   K_lambda(n) = sin(pi (n - lambda)) / (pi (n - lambda)),
// exactly the coordinate vector e_lambda when lambda is an integer.
SampledPWVector sample_kernel(double lambda, std::int64_t N);

// Samples of G(z) / (G'(lambda) (z - lambda)) for a zero lambda of the model.
// lambda must belong to `zeros` (matched to within `tol`); anything else is a
// domain error.
SampledPWVector sample_biorth(const GenFnModel& model, const ZeroList& zeros,
                              double lambda, std::int64_t N, double tol = 1e-9);

// l2 inner product of two equal-window sample vectors.
double pairing(const SampledPWVector& a, const SampledPWVector& b);

struct DefectReport {
  std::int64_t N = 0;
  int cols = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::vector<double> singular_values;  // ascending
  bool has_candidate = false;
  double candidate_norm = 0.0;
  double residual = 0.0;                // ||cand - projection|| / ||cand||
  std::vector<double> solution;         // least-squares coefficients, unit-column basis
  double solution_l1 = 0.0;
  std::vector<std::vector<double>> audit_products;  // [audit][col] inner products
};

// Column system streamed by integer rows: fill_row(n, out) writes the value
// of every column function at the integer n into out[0..cols-1]. Columns are
// normalized internally from the accumulated Gram diagonal (a zero column is
// a domain error), sigma bounds come from the normalized Gram eigenvalues,
// and the candidate residual is re-measured by a second streaming pass over
// g - A x. Optional audit vectors get their per-column inner products
// (against unit columns) reported.
struct StreamedDefectInput {
  std::int64_t N = 0;
  int cols = 0;
  std::function<void(std::int64_t n, double* out)> fill_row;
  const SampledPWVector* candidate = nullptr;
  std::vector<const SampledPWVector*> audit;
  std::int64_t panel_rows = 8192;
};

DefectReport gram_defect_streamed(const StreamedDefectInput& input);

// Materialized-column convenience wrapper; all columns must share the window
// of the (optional) candidate. Column count is capped at 4096 and total
// matrix size at 2^26 entries; beyond that, use the streamed form.
DefectReport gram_defect(const std::vector<SampledPWVector>& columns,
                         const SampledPWVector* candidate = nullptr);

}  // namespace pwsynth
