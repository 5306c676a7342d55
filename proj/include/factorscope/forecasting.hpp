#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "factorscope/panel.hpp"

namespace factorscope {

// How the factor count is chosen for each window.
enum class RSelect {
  fixed,  // use RollingConfig::r for every window
  ratio,  // eigenvalue-ratio selector, capped at r_max
  ic_p1,  // information-criterion selector, capped at r_max
};

// Rolling one-step-ahead backtest configuration. Window i covers rows
// [i, i + window_length) and predicts row i + window_length.
struct RollingConfig {
  long window_length = 100;
  int r = 1;          // factor count when r_select == fixed
  int k0 = 5;         // max lag for the eigen-target matrix
  int ar_max_order = 5;
  RSelect r_select = RSelect::fixed;
  int r_max = 8;      // selector cap when r_select != fixed
};

// Univariate AR fit by the Levinson-Durbin recursion on raw (uncentered)
// second moments, with AIC order selection. `degenerate` marks a series whose
// centered variance is numerically zero; the forecast is then the sample mean
// and no coefficients are reported.
struct ArFit {
  int order = 0;
  std::vector<double> coefficients;  // phi_1..phi_order
  double innovation_variance = 0.0;
  double forecast = 0.0;
  bool degenerate = false;
};

// Fits AR(q) for q = 1..max_order by Yule-Walker on uncentered
// autocovariances, picks q by AIC(q) = n ln(sigma2_q) + 2q, and returns the
// one-step linear prediction sum_j phi_j x_{n-j}. Needs
// series length >= max_order + 10.
ArFit ar_fit_forecast(const Eigen::VectorXd& series, int max_order);

// Outcome for one window. The benchmark (random-walk) RMSE is always
// computed; the factor-model RMSE is NaN when the window's fit failed, with
// the failure message recorded.
struct WindowResult {
  long index = 0;        // window start row
  double rmse_factor = 0.0;
  double rmse_rw = 0.0;
  int r_used = 0;
  bool valid = false;
  std::string error;     // empty when valid
};

struct ForecastReport {
  std::vector<WindowResult> windows;      // n - window_length entries
  std::vector<double> cumulative_factor;  // running sum; invalid windows add 0
  std::vector<double> cumulative_rw;      // running sum of benchmark RMSEs
  long valid_windows = 0;
  double total_factor = 0.0;  // final cumulative values
  double total_rw = 0.0;
};

// For each window: fit the factor model on the window's rows, forecast each
// factor coordinate with ar_fit_forecast, reconstruct y_hat = A_hat x_hat,
// and score RMSE = p^{-1/2} ||y_hat - y_actual|| against the random-walk
// forecast y_hat = (last window row). Numeric failures inside a window mark
// it invalid instead of aborting the run. Windows are independent and run on
// `threads` workers; the report is identical for every thread count.
ForecastReport rolling_forecast(const TimeSeriesPanel& panel,
                                const RollingConfig& cfg, int threads = 1);

}  // namespace factorscope
