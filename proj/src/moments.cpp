#include "factorscope/moments.hpp"

#include <string>

namespace factorscope {

namespace {

void check_lag(const TimeSeriesPanel& panel, int k, int lo) {
  if (k < lo || static_cast<long>(k) > panel.n() - 2) {
    throw LagError("lag " + std::to_string(k) + " outside [" +
                   std::to_string(lo) + ", n-2] with n = " +
                   std::to_string(panel.n()));
  }
}

// Centered data matrix: row t is (y_t - y_bar)^T.
Eigen::MatrixXd centered(const TimeSeriesPanel& panel, Eigen::VectorXd* mean) {
  Eigen::VectorXd y_bar = panel.data().colwise().mean().transpose();
  if (mean) *mean = y_bar;
  return panel.data().rowwise() - y_bar.transpose();
}

// Sigma~(k) from the centered matrix. The t-sum is evaluated as one matrix
// product over the overlapping row blocks; Eigen's blocked accumulation keeps
// the reduction order fixed for a given shape, so results are deterministic
// and accurate at the 1e-13-relative level the tests pin.
Eigen::MatrixXd lag_cov(const Eigen::MatrixXd& yc, int k) {
  const long n = yc.rows();
  return yc.bottomRows(n - k).transpose() * yc.topRows(n - k) /
         static_cast<double>(n - k);
}

}  // namespace

Eigen::MatrixXd sample_autocov(const TimeSeriesPanel& panel, int k) {
  check_lag(panel, k, 0);
  return lag_cov(centered(panel, nullptr), k);
}

AutocovarianceSet compute_autocovariances(const TimeSeriesPanel& panel,
                                          int k0) {
  check_lag(panel, k0, 0);
  AutocovarianceSet set;
  set.k0 = k0;
  const Eigen::MatrixXd yc = centered(panel, &set.y_bar);
  set.sigma_tilde.reserve(k0 + 1);
  for (int k = 0; k <= k0; ++k) {
    set.sigma_tilde.push_back(lag_cov(yc, k));
  }
  return set;
}

LMatrix build_L_from_autocov(const std::vector<Eigen::MatrixXd>& sigma_lags) {
  if (sigma_lags.empty()) {
    throw LagError("build_L needs at least one lag autocovariance");
  }
  const long p = sigma_lags.front().rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  for (const auto& s : sigma_lags) {
    if (s.rows() != p || s.cols() != p) {
      throw DimensionError("autocovariance matrices must all be p x p");
    }
    // rankUpdate computes acc += s s^T on the lower triangle only, which
    // keeps L~ exactly symmetric instead of symmetric-up-to-GEMM-roundoff.
    acc.selfadjointView<Eigen::Lower>().rankUpdate(s);
  }
  LMatrix out;
  out.l = acc.selfadjointView<Eigen::Lower>();
  out.k0 = static_cast<int>(sigma_lags.size());
  return out;
}

LMatrix build_L(const TimeSeriesPanel& panel, int k0) {
  check_lag(panel, k0, 1);
  const Eigen::MatrixXd yc = centered(panel, nullptr);
  std::vector<Eigen::MatrixXd> lags;
  lags.reserve(k0);
  for (int k = 1; k <= k0; ++k) {
    lags.push_back(lag_cov(yc, k));
  }
  return build_L_from_autocov(lags);
}

}  // namespace factorscope
