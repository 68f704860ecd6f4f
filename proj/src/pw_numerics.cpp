#include "pwsynth/pw_numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pwsynth/gamma.hpp"
#include "pwsynth/summation.hpp"

namespace pwsynth {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::int64_t kMaxWindow = std::int64_t{1} << 22;
}  // namespace

double SampledPWVector::norm() const {
  KahanAccumulator acc;
  for (double x : v) acc.add(x * x);
  return std::sqrt(acc.result());
}

SampledPWVector make_sampled(std::int64_t N) {
  if (N < 1 || N > kMaxWindow) {
    throw std::invalid_argument("sampled vector: N must lie in [1, 2^22]");
  }
  SampledPWVector s;
  s.N = N;
  s.v.assign(static_cast<std::size_t>(2 * N + 1), 0.0);
  return s;
}

SampledPWVector sample_kernel(double lambda, std::int64_t N) {
  SampledPWVector s = make_sampled(N);
  for (std::int64_t n = -N; n <= N; ++n) {
    const double u = static_cast<double>(n) - lambda;
    if (u == 0.0) {
      s.at(n) = 1.0;
    } else {
      s.at(n) = sinpi(u) / (kPi * u);
    }
  }
  return s;
}

SampledPWVector sample_biorth(const GenFnModel& model, const ZeroList& zeros,
                              double lambda, std::int64_t N, double tol) {
  const std::ptrdiff_t idx = zeros.find(lambda, tol);
  if (idx < 0) {
    throw std::domain_error("sample_biorth: lambda is not a listed zero of the model");
  }
  const ZeroEntry& z = zeros.zeros[static_cast<std::size_t>(idx)];
  SampledPWVector s = make_sampled(N);
  for (std::int64_t n = -N; n <= N; ++n) {
    const double x = static_cast<double>(n);
    const double u = x - z.lambda;
    if (u == 0.0) {
      // Removable point: G(z)/(z - lambda) -> G'(lambda).
      s.at(n) = 1.0;
    } else {
      s.at(n) = model.eval(x) / (z.deriv * u);
    }
  }
  return s;
}

double pairing(const SampledPWVector& a, const SampledPWVector& b) {
  if (a.N != b.N) {
    throw std::invalid_argument("pairing: sample windows must agree");
  }
  KahanAccumulator acc;
  for (std::size_t i = 0; i < a.v.size(); ++i) acc.add(a.v[i] * b.v[i]);
  return acc.result();
}

DefectReport gram_defect_streamed(const StreamedDefectInput& input) {
  const std::int64_t N = input.N;
  const int cols = input.cols;
  if (N < 1 || N > kMaxWindow) {
    throw std::invalid_argument("gram_defect: N must lie in [1, 2^22]");
  }
  if (cols < 1 || cols > 4096) {
    throw std::invalid_argument("gram_defect: column count must lie in [1, 4096]");
  }
  if (!input.fill_row) {
    throw std::invalid_argument("gram_defect: fill_row must be set");
  }
  if (input.candidate && input.candidate->N != N) {
    throw std::invalid_argument("gram_defect: candidate window must match N");
  }
  for (const SampledPWVector* a : input.audit) {
    if (!a || a->N != N) {
      throw std::invalid_argument("gram_defect: audit window must match N");
    }
  }
  const std::int64_t panel = std::max<std::int64_t>(1, input.panel_rows);
  const std::int64_t rows = 2 * N + 1;

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
  Eigen::VectorXd atg = Eigen::VectorXd::Zero(cols);
  Eigen::MatrixXd ata_audit =
      Eigen::MatrixXd::Zero(cols, static_cast<Eigen::Index>(input.audit.size()));
  RowMajor buf(panel, cols);  // row-major so fill_row writes one contiguous row

  double cand_norm_sq = 0.0;
  for (std::int64_t start = 0; start < rows; start += panel) {
    const std::int64_t len = std::min(panel, rows - start);
    for (std::int64_t r = 0; r < len; ++r) {
      input.fill_row(start + r - N, buf.row(r).data());
    }
    auto block = buf.topRows(len);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose(), 1.0);
    if (input.candidate) {
      Eigen::Map<const Eigen::VectorXd> g(input.candidate->v.data() + start, len);
      atg.noalias() += block.transpose() * g;
      cand_norm_sq += g.squaredNorm();
    }
    for (std::size_t a = 0; a < input.audit.size(); ++a) {
      Eigen::Map<const Eigen::VectorXd> h(input.audit[a]->v.data() + start, len);
      ata_audit.col(static_cast<Eigen::Index>(a)).noalias() += block.transpose() * h;
    }
  }
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::VectorXd diag = gram.diagonal();
  Eigen::VectorXd inv_scale(cols);
  for (int j = 0; j < cols; ++j) {
    if (!(diag(j) > 0.0)) {
      throw std::domain_error("gram_defect: column " + std::to_string(j) +
                              " has zero norm");
    }
    inv_scale(j) = 1.0 / std::sqrt(diag(j));
  }
  Eigen::MatrixXd gram_n = inv_scale.asDiagonal() * gram * inv_scale.asDiagonal();
  // Exact unit diagonal keeps the eigenvalue scale honest.
  for (int j = 0; j < cols; ++j) gram_n(j, j) = 1.0;

  DefectReport rep;
  rep.N = N;
  rep.cols = cols;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_n, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("gram_defect: eigenvalue solve failed");
  }
  rep.singular_values.resize(static_cast<std::size_t>(cols));
  for (int j = 0; j < cols; ++j) {
    rep.singular_values[static_cast<std::size_t>(j)] =
        std::sqrt(std::max(0.0, eig.eigenvalues()(j)));
  }
  rep.sigma_min = rep.singular_values.front();
  rep.sigma_max = rep.singular_values.back();

  for (std::size_t a = 0; a < input.audit.size(); ++a) {
    std::vector<double> prods(static_cast<std::size_t>(cols));
    for (int j = 0; j < cols; ++j) {
      prods[static_cast<std::size_t>(j)] =
          ata_audit(j, static_cast<Eigen::Index>(a)) * inv_scale(j);
    }
    rep.audit_products.push_back(std::move(prods));
  }

  if (input.candidate) {
    rep.has_candidate = true;
    rep.candidate_norm = std::sqrt(cand_norm_sq);
    if (!(cand_norm_sq > 0.0)) {
      throw std::domain_error("gram_defect: candidate has zero norm");
    }
    Eigen::VectorXd rhs = inv_scale.asDiagonal() * atg;
    Eigen::VectorXd x = gram_n.ldlt().solve(rhs);
    rep.solution.assign(x.data(), x.data() + cols);
    rep.solution_l1 = x.lpNorm<1>();
    // Second pass: residual measured directly on g - A x.
    Eigen::VectorXd x_cols = inv_scale.asDiagonal() * x;  // raw-column weights
    double res_sq = 0.0;
    for (std::int64_t start = 0; start < rows; start += panel) {
      const std::int64_t len = std::min(panel, rows - start);
      for (std::int64_t r = 0; r < len; ++r) {
        input.fill_row(start + r - N, buf.row(r).data());
      }
      Eigen::Map<const Eigen::VectorXd> g(input.candidate->v.data() + start, len);
      res_sq += (g - buf.topRows(len) * x_cols).squaredNorm();
    }
    rep.residual = std::sqrt(res_sq) / rep.candidate_norm;
  }
  return rep;
}

DefectReport gram_defect(const std::vector<SampledPWVector>& columns,
                         const SampledPWVector* candidate) {
  if (columns.empty()) {
    throw std::invalid_argument("gram_defect: need at least one column");
  }
  const std::int64_t N = columns.front().N;
  for (const SampledPWVector& c : columns) {
    if (c.N != N) {
      throw std::invalid_argument("gram_defect: column windows must agree");
    }
  }
  if (static_cast<std::int64_t>(columns.size()) * (2 * N + 1) > (std::int64_t{1} << 26)) {
    throw std::invalid_argument(
        "gram_defect: system too large to materialize; use the streamed form");
  }
  StreamedDefectInput in;
  in.N = N;
  in.cols = static_cast<int>(columns.size());
  in.candidate = candidate;
  in.fill_row = [&columns, N](std::int64_t n, double* out) {
    const auto i = static_cast<std::size_t>(n + N);
    for (std::size_t j = 0; j < columns.size(); ++j) out[j] = columns[j].v[i];
  };
  return gram_defect_streamed(in);
}

}  // namespace pwsynth
