#include "factorscope/two_step.hpp"

#include <cmath>
#include <string>

#include "factorscope/errors.hpp"

namespace factorscope {

TwoStepFit two_step_fit(const TimeSeriesPanel& panel, int r1, int r2, int k0) {
  const long p = panel.p();
  if (r1 < 1 || r2 < 1 || r1 + r2 > p) {
    throw DimensionError("need r1 >= 1, r2 >= 1, r1 + r2 <= p; got r1 = " +
                         std::to_string(r1) + ", r2 = " + std::to_string(r2) +
                         ", p = " + std::to_string(p));
  }

  FactorModelFit stage1 = fit(panel, r1, k0);

  // Project the fitted directions out row by row: y*_t = y_t - a1 (a1^T y_t).
  // stage1.residuals is exactly that matrix already.
  TimeSeriesPanel projected(stage1.residuals, panel.labels());
  FactorModelFit stage2 = fit(projected, r2, k0);

  TwoStepFit out;
  out.r1 = r1;
  out.r2 = r2;
  out.k0 = k0;
  out.a1_hat = std::move(stage1.a_hat);
  out.a2_check = std::move(stage2.a_hat);
  out.stage1_eigenvalues = std::move(stage1.eigenvalues);
  out.stage2_eigenvalues = std::move(stage2.eigenvalues);
  out.combined.resize(p, r1 + r2);
  out.combined.leftCols(r1) = out.a1_hat;
  out.combined.rightCols(r2) = out.a2_check;
  out.factors = panel.data() * out.combined;
  out.residuals = panel.data() - out.factors * out.combined.transpose();
  return out;
}

FactorModelFit to_factor_fit(const TwoStepFit& fit) {
  FactorModelFit view;
  view.a_hat = fit.combined;
  view.eigenvalues = fit.stage1_eigenvalues;
  view.factors = fit.factors;
  view.residuals = fit.residuals;
  view.r = fit.r1 + fit.r2;
  view.k0 = fit.k0;
  return view;
}

double factor_strength_ratio(const FactorModelFit& fit, int split) {
  const long r = fit.factors.cols();
  if (split < 1 || split >= r) {
    throw DimensionError("split = " + std::to_string(split) +
                         " outside [1, r-1] with r = " + std::to_string(r));
  }
  const long n = fit.factors.rows();
  double lead = 0.0;
  double trail = 0.0;
  for (long t = 0; t < n; ++t) {
    lead += fit.factors.row(t).head(split).norm();
    trail += fit.factors.row(t).tail(r - split).norm();
  }
  lead /= static_cast<double>(n);
  trail /= static_cast<double>(n);
  if (!(lead > 0.0)) {
    throw DegenerateFactorError(
        "leading factor components have zero average norm");
  }
  return trail / lead;
}

int suggest_strength_split(const Eigen::VectorXd& eigenvalues_descending,
                           int r) {
  if (r < 2 || r > eigenvalues_descending.size()) {
    throw DimensionError("need 2 <= r <= p to propose a split, got r = " +
                         std::to_string(r));
  }
  const double floor = 1e-12 * std::max(eigenvalues_descending(0), 0.0);
  if (!(floor > 0.0)) {
    throw DegenerateSpectrumError("leading eigenvalue is nonpositive");
  }
  int best = 1;
  double best_gap = -1.0;
  for (int i = 1; i < r; ++i) {
    const double hi = std::max(eigenvalues_descending(i - 1), floor);
    const double lo = std::max(eigenvalues_descending(i), floor);
    const double gap = std::log(hi) - std::log(lo);
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

}  // namespace factorscope
