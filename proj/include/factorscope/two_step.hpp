#pragma once

#include <Eigen/Dense>

#include "factorscope/eigen_factor.hpp"
#include "factorscope/panel.hpp"

namespace factorscope {

// Two-stage fit for factors of unequal strength: stage 1 estimates the r1
// strongest directions, the data is projected onto their orthocomplement, and
// stage 2 re-runs the eigenanalysis there for r2 more directions.
struct TwoStepFit {
  Eigen::MatrixXd a1_hat;             // p x r1, stage-1 loading
  Eigen::MatrixXd a2_check;           // p x r2, stage-2 loading
  Eigen::MatrixXd combined;           // p x (r1+r2), columns (a1_hat, a2_check)
  Eigen::VectorXd stage1_eigenvalues; // spectrum of the stage-1 L~
  Eigen::VectorXd stage2_eigenvalues; // spectrum of the projected-panel L~
  Eigen::MatrixXd factors;            // n x (r1+r2), x_t = combined^T y_t
  Eigen::MatrixXd residuals;          // n x p, y_t - combined x_t
  int r1 = 0;
  int r2 = 0;
  int k0 = 0;
};

// Stage 1 is exactly fit(panel, r1, k0) (same code path, bit-identical
// loading); the projected panel has rows y_t - a1 (a1^T y_t); stage 2 is
// fit(projected, r2, k0). Factors and residuals use the combined loading.
TwoStepFit two_step_fit(const TimeSeriesPanel& panel, int r1, int r2,
                        int k0 = 1);

// View of the two-step result in single-fit form (combined loading, combined
// factors/residuals, stage-1 spectrum) so the covariance estimators and the
// strength diagnostic apply unchanged.
FactorModelFit to_factor_fit(const TwoStepFit& fit);

// (mean_t ||trailing factor components||) / (mean_t ||leading components||),
// split at `split` (leading block = components 0..split-1). Small values mean
// the trailing factors are much weaker and a two-step fit is advisable.
double factor_strength_ratio(const FactorModelFit& fit, int split);

// Convenience heuristic (not part of the estimation theory): proposes a
// strength split at the largest gap in log-eigenvalues among the leading r.
int suggest_strength_split(const Eigen::VectorXd& eigenvalues_descending,
                           int r);

}  // namespace factorscope
