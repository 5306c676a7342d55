#pragma once

#include <Eigen/Dense>
#include <vector>

#include "factorscope/panel.hpp"

namespace factorscope {

// Lag-k sample autocovariances Sigma~(k), k = 0..k0, all centered with the
// single full-sample mean y_bar and divided by n-k.
struct AutocovarianceSet {
  int k0 = 0;
  std::vector<Eigen::MatrixXd> sigma_tilde;  // size k0+1, entry k is lag k
  Eigen::VectorXd y_bar;
};

// The symmetric PSD eigen-target: L~ = sum_{k=1..k0} Sigma~(k) Sigma~(k)^T.
struct LMatrix {
  Eigen::MatrixXd l;
  int k0 = 0;
};

// Sigma~(k) = (n-k)^-1 sum_{t} (y_{t+k} - y_bar)(y_t - y_bar)^T with y_bar the
// mean over all n observations (the same y_bar for every lag). 0 <= k <= n-2.
Eigen::MatrixXd sample_autocov(const TimeSeriesPanel& panel, int k);

// All lags 0..k0 in one pass (shares the centering work).
AutocovarianceSet compute_autocovariances(const TimeSeriesPanel& panel, int k0);

// Assembles L~ from externally supplied lag-1..k0 autocovariances. This is
// the seam build_L rests on; tests inject hand-built matrices through it.
LMatrix build_L_from_autocov(const std::vector<Eigen::MatrixXd>& sigma_lags);

// L~ for the panel, lags 1..k0 (lag 0 excluded). 1 <= k0 <= n-2.
LMatrix build_L(const TimeSeriesPanel& panel, int k0 = 1);

}  // namespace factorscope
