#pragma once

#include <Eigen/Dense>

#include "factorscope/moments.hpp"
#include "factorscope/panel.hpp"

namespace factorscope {

// Result of the eigenanalysis-based factor fit. a_hat's columns are the r
// leading orthonormal eigenvectors of L~; factors are x_t = a_hat^T y_t
// (uncentered, as the estimator defines them); residuals are
// e_t = y_t - a_hat x_t = (I - a_hat a_hat^T) y_t, so y_t = a_hat x_t + e_t
// holds exactly.
struct FactorModelFit {
  Eigen::MatrixXd a_hat;        // p x r, orthonormal columns, canonical signs
  Eigen::VectorXd eigenvalues;  // all p eigenvalues of L~, descending,
                                // roundoff negatives clamped to zero
  Eigen::MatrixXd factors;      // n x r, row t is x_t^T
  Eigen::MatrixXd residuals;    // n x p, row t is e_t^T
  int r = 0;
  int k0 = 0;
};

// Leading-r eigenvectors of L~ plus the full descending eigenvalue sequence.
// Each eigenvector's sign is canonicalized: the entry of largest absolute
// value is made positive (ties broken toward the lowest index).
struct LoadingEstimate {
  Eigen::MatrixXd a_hat;        // p x r
  Eigen::VectorXd eigenvalues;  // length p
};
LoadingEstimate estimate_loadings(const LMatrix& l, int r);

// Full pipeline: build L~ from the panel, eigendecompose, extract factors and
// residuals. Needs n >= k0 + 2.
FactorModelFit fit(const TimeSeriesPanel& panel, int r, int k0 = 1);

// Eigenvalue-ratio selector: argmax over 1 <= i <= r_max of
// eigenvalues[i-1] / eigenvalues[i] (0-based array), ties toward smaller i.
// Values below 1e-12 * eigenvalues[0] are clamped to that floor first.
int select_num_factors(const Eigen::VectorXd& eigenvalues_descending,
                       int r_max);

// Information-criterion selector: minimizes
//   ln V(r) + r * ((n+p)/(np)) * ln(np/(n+p))
// over r = 1..r_max, where V(r) is the mean squared residual entry of the
// r-factor fit. Shares one eigendecomposition across all candidate r.
int select_num_factors_ic(const TimeSeriesPanel& panel, int k0, int r_max);

}  // namespace factorscope
