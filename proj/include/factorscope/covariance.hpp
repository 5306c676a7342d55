#pragma once

#include <Eigen/Dense>
#include <vector>

#include "factorscope/eigen_factor.hpp"
#include "factorscope/panel.hpp"

namespace factorscope {

// Grouped-diagonal noise model: the p coordinates are partitioned into groups
// that share one pooled variance each. Groups are arbitrary index sets (the
// estimators never need contiguity).
struct NoiseModel {
  std::vector<std::vector<int>> groups;  // disjoint, union = {0..p-1}
  std::vector<double> variances;         // one per group
  bool degenerate = false;  // set when any pooled variance is zero

  // Per-coordinate variance vector (expands group variances to length p).
  Eigen::VectorXd diagonal(long p) const;
};

// How the pooled variance divides the residual energy.
//  - plain: sigma2_j = ||group rows of E||_F^2 / (n * m_j), the mean of
//    squared residual entries.
//  - projection_adjusted: divides by n * max(m_j - q_j, 1) instead, where
//    q_j = sum over the group of ||row i of a_hat||^2 is the share of the r
//    fitted directions carried by the group. Residuals live in the
//    orthocomplement of the fitted directions, so the plain mean understates
//    the variance by roughly (m_j - q_j)/m_j; the adjustment removes that
//    bias, which is what keeps small-p precision estimates on target.
enum class NoiseDofPolicy { plain, projection_adjusted };

// Pools squared residual entries over each group of coordinates.
NoiseModel estimate_noise_variances(
    const FactorModelFit& fit, const std::vector<std::vector<int>>& groups,
    NoiseDofPolicy policy = NoiseDofPolicy::plain);

// Data-driven partition into k groups: per-coordinate residual variances are
// sorted and split at the k-1 largest consecutive gaps. If fewer than k-1
// strictly positive gaps exist the split falls back to fewer groups and sets
// `reduced`.
struct Grouping {
  std::vector<std::vector<int>> groups;
  bool reduced = false;
};
Grouping infer_grouping(const FactorModelFit& fit, int k);

// The assembled low-rank-plus-diagonal covariance model and its inverse.
struct CovarianceEstimates {
  Eigen::MatrixXd sigma_x_hat;   // r x r symmetric
  NoiseModel noise;              // diagonal Sigma_eps
  Eigen::MatrixXd loading;       // p x r, the a_hat the estimates were built on
  Eigen::MatrixXd sigma_y_hat;   // p x p symmetric
  Eigen::MatrixXd precision_hat; // p x p symmetric; empty until computed
};

// Sigma_x = A^T (Sigma~_y(0) - Sigma_eps) A, symmetrized as (M + M^T)/2;
// Sigma_y = A Sigma_x A^T + Sigma_eps. Accepts r = 0 (empty loading), in
// which case Sigma_y is just the diagonal noise.
CovarianceEstimates assemble_sigma_y(const FactorModelFit& fit,
                                     const TimeSeriesPanel& panel,
                                     const NoiseModel& noise);

// Woodbury inverse of the structured covariance:
//   Sigma_y^-1 = D^-1 - D^-1 A (Sigma_x^-1 + A^T D^-1 A)^-1 A^T D^-1
// with D the diagonal noise. Costs O(p^2 r) plus one r x r Cholesky; no dense
// p x p inversion happens anywhere. Requires all noise variances > 0 and
// cond(Sigma_x) <= 1e12.
Eigen::MatrixXd precision_woodbury(const CovarianceEstimates& est);

// assemble_sigma_y + precision_woodbury, with the precision stored in place.
CovarianceEstimates estimate_covariances(const FactorModelFit& fit,
                                         const TimeSeriesPanel& panel,
                                         const NoiseModel& noise);

}  // namespace factorscope
