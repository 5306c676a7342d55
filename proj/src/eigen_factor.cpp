#include "factorscope/eigen_factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "factorscope/errors.hpp"

namespace factorscope {

namespace {

// Full symmetric eigendecomposition of L~, eigenvalues descending.
void eigendecompose(const LMatrix& l, Eigen::VectorXd& values,
                    Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l.l);
  if (solver.info() != Eigen::Success) {
    throw EigensolverError(
        "symmetric eigensolver failed to converge on the " +
        std::to_string(l.l.rows()) + "x" + std::to_string(l.l.cols()) +
        " lag-covariance product matrix");
  }
  // Eigen returns ascending order; flip to descending.
  values = solver.eigenvalues().reverse();
  vectors = solver.eigenvectors().rowwise().reverse();
}

// Largest-absolute-entry-positive sign convention, ties toward lowest index.
void canonicalize_sign(Eigen::Ref<Eigen::MatrixXd> columns) {
  for (long j = 0; j < columns.cols(); ++j) {
    long best = 0;
    double best_abs = -1.0;
    for (long i = 0; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, j));
      if (a > best_abs) {  // strict: first maximum wins
        best_abs = a;
        best = i;
      }
    }
    if (columns(best, j) < 0.0) columns.col(j) = -columns.col(j);
  }
}

}  // namespace

LoadingEstimate estimate_loadings(const LMatrix& l, int r) {
  const long p = l.l.rows();
  if (r < 1 || r > p) {
    throw DimensionError("factor count r = " + std::to_string(r) +
                         " outside [1, p] with p = " + std::to_string(p));
  }
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  eigendecompose(l, values, vectors);

  LoadingEstimate est;
  est.a_hat = vectors.leftCols(r);
  canonicalize_sign(est.a_hat);
  // Roundoff can push trailing eigenvalues of an exactly-PSD matrix slightly
  // negative; clamp for reporting.
  est.eigenvalues = values.cwiseMax(0.0);
  return est;
}

FactorModelFit fit(const TimeSeriesPanel& panel, int r, int k0) {
  LoadingEstimate est = estimate_loadings(build_L(panel, k0), r);

  FactorModelFit out;
  out.a_hat = std::move(est.a_hat);
  out.eigenvalues = std::move(est.eigenvalues);
  out.r = r;
  out.k0 = k0;
  // x_t = A^T y_t row-wise; e_t = y_t - A x_t. Computing the residual through
  // the factors (rather than materializing I - AA^T) is O(npr) and makes the
  // reconstruction identity y_t = A x_t + e_t hold exactly in floating point.
  out.factors = panel.data() * out.a_hat;
  out.residuals = panel.data() - out.factors * out.a_hat.transpose();
  return out;
}

int select_num_factors(const Eigen::VectorXd& eigenvalues_descending,
                       int r_max) {
  const long len = eigenvalues_descending.size();
  if (len < 2) {
    throw DimensionError("need at least 2 eigenvalues to form a ratio");
  }
  if (r_max < 1 || r_max >= len) {
    throw DimensionError("r_max = " + std::to_string(r_max) +
                         " outside [1, p-1] with p = " + std::to_string(len));
  }
  if (!(eigenvalues_descending(0) > 0.0)) {
    throw DegenerateSpectrumError(
        "all eigenvalues are nonpositive; spectrum carries no factor signal");
  }
  const double floor = 1e-12 * eigenvalues_descending(0);
  int best_i = 1;
  double best_ratio = -1.0;
  for (int i = 1; i <= r_max; ++i) {
    const double hi = std::max(eigenvalues_descending(i - 1), floor);
    const double lo = std::max(eigenvalues_descending(i), floor);
    const double ratio = hi / lo;
    if (ratio > best_ratio) {  // strict: ties keep the smaller i
      best_ratio = ratio;
      best_i = i;
    }
  }
  return best_i;
}

int select_num_factors_ic(const TimeSeriesPanel& panel, int k0, int r_max) {
  const long p = panel.p();
  const long n = panel.n();
  if (r_max < 1 || r_max >= p) {
    throw DimensionError("r_max = " + std::to_string(r_max) +
                         " outside [1, p-1] with p = " + std::to_string(p));
  }
  LoadingEstimate est = estimate_loadings(build_L(panel, k0), r_max);

  // V(r) = (np)^-1 ||Y - Y A_r A_r^T||_F^2 shrinks incrementally: projecting
  // onto one more orthonormal direction removes exactly ||Y a_j||^2.
  const double total = panel.data().squaredNorm();
  const double np = static_cast<double>(n) * static_cast<double>(p);
  const double penalty_unit =
      (static_cast<double>(n) + static_cast<double>(p)) / np *
      std::log(np / (static_cast<double>(n) + static_cast<double>(p)));

  double explained = 0.0;
  int best_r = 1;
  double best_ic = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= r_max; ++r) {
    explained += (panel.data() * est.a_hat.col(r - 1)).squaredNorm();
    const double v = std::max((total - explained) / np, 1e-300);
    const double ic = std::log(v) + r * penalty_unit;
    if (ic < best_ic) {  // strict: ties keep the smaller r
      best_ic = ic;
      best_r = r;
    }
  }
  return best_r;
}

}  // namespace factorscope
