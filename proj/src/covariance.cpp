#include "factorscope/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "factorscope/errors.hpp"
#include "factorscope/moments.hpp"

namespace factorscope {

Eigen::VectorXd NoiseModel::diagonal(long p) const {
  Eigen::VectorXd d(p);
  d.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    for (int idx : groups[j]) {
      d(idx) = variances[j];
    }
  }
  if (d.hasNaN()) {
    throw PartitionError("noise groups do not cover all coordinates");
  }
  return d;
}

namespace {

void check_partition(const std::vector<std::vector<int>>& groups, long p) {
  std::vector<char> seen(p, 0);
  long covered = 0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (groups[j].empty()) {
      throw PartitionError("group " + std::to_string(j) + " is empty");
    }
    for (int idx : groups[j]) {
      if (idx < 0 || idx >= p) {
        throw PartitionError("coordinate " + std::to_string(idx) +
                             " outside [0, " + std::to_string(p - 1) + "]");
      }
      if (seen[idx]) {
        throw PartitionError("coordinate " + std::to_string(idx) +
                             " appears in two groups");
      }
      seen[idx] = 1;
      ++covered;
    }
  }
  if (covered != p) {
    throw PartitionError("groups cover " + std::to_string(covered) + " of " +
                         std::to_string(p) + " coordinates");
  }
}

}  // namespace

NoiseModel estimate_noise_variances(const FactorModelFit& fit,
                                    const std::vector<std::vector<int>>& groups,
                                    NoiseDofPolicy policy) {
  const long p = fit.residuals.cols();
  const long n = fit.residuals.rows();
  check_partition(groups, p);

  NoiseModel model;
  model.groups = groups;
  model.variances.reserve(groups.size());
  for (const auto& group : groups) {
    double ssq = 0.0;
    double direction_share = 0.0;
    for (int idx : group) {
      ssq += fit.residuals.col(idx).squaredNorm();
      if (fit.a_hat.size() > 0) {
        direction_share += fit.a_hat.row(idx).squaredNorm();
      }
    }
    double dof = static_cast<double>(group.size());
    if (policy == NoiseDofPolicy::projection_adjusted) {
      dof = std::max(dof - direction_share, 1.0);
    }
    model.variances.push_back(ssq / (static_cast<double>(n) * dof));
  }
  model.degenerate =
      std::any_of(model.variances.begin(), model.variances.end(),
                  [](double v) { return !(v > 0.0); });
  return model;
}

Grouping infer_grouping(const FactorModelFit& fit, int k) {
  const long p = fit.residuals.cols();
  const long n = fit.residuals.rows();
  if (k < 1 || k > p) {
    throw PartitionError("group count k = " + std::to_string(k) +
                         " outside [1, p] with p = " + std::to_string(p));
  }

  // Per-coordinate mean squared residual, the same statistic the pooled
  // estimator averages within groups.
  std::vector<double> var(p);
  for (long i = 0; i < p; ++i) {
    var[i] = fit.residuals.col(i).squaredNorm() / static_cast<double>(n);
  }
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return var[a] < var[b]; });

  // Candidate split points: positions with a strictly positive variance gap,
  // ranked by gap size (ties toward the earlier position, deterministically).
  std::vector<std::pair<double, int>> gaps;  // (-gap, position) for sorting
  for (long i = 0; i + 1 < p; ++i) {
    const double gap = var[order[i + 1]] - var[order[i]];
    if (gap > 0.0) {
      gaps.emplace_back(-gap, static_cast<int>(i));
    }
  }
  std::stable_sort(gaps.begin(), gaps.end());

  const int splits = std::min<int>(k - 1, static_cast<int>(gaps.size()));
  Grouping out;
  out.reduced = splits < k - 1;
  std::vector<int> cut_positions;
  for (int s = 0; s < splits; ++s) {
    cut_positions.push_back(gaps[s].second);
  }
  std::sort(cut_positions.begin(), cut_positions.end());

  long start = 0;
  for (int cut : cut_positions) {
    out.groups.emplace_back(order.begin() + start, order.begin() + cut + 1);
    start = cut + 1;
  }
  out.groups.emplace_back(order.begin() + start, order.end());
  for (auto& g : out.groups) {
    std::sort(g.begin(), g.end());
  }
  return out;
}

CovarianceEstimates assemble_sigma_y(const FactorModelFit& fit,
                                     const TimeSeriesPanel& panel,
                                     const NoiseModel& noise) {
  const long p = panel.p();
  if (fit.a_hat.size() > 0 && fit.a_hat.rows() != p) {
    throw DimensionError("loading has " + std::to_string(fit.a_hat.rows()) +
                         " rows, panel has p = " + std::to_string(p));
  }
  CovarianceEstimates est;
  est.noise = noise;
  est.loading = fit.a_hat;
  const Eigen::VectorXd d = noise.diagonal(p);

  const Eigen::MatrixXd sigma_y0 = sample_autocov(panel, 0);
  const long r = fit.a_hat.cols();
  if (r == 0) {
    est.sigma_x_hat.resize(0, 0);
    est.sigma_y_hat = d.asDiagonal();
    return est;
  }

  Eigen::MatrixXd centered = sigma_y0;
  centered.diagonal() -= d;
  const Eigen::MatrixXd sandwich =
      fit.a_hat.transpose() * centered * fit.a_hat;
  est.sigma_x_hat = 0.5 * (sandwich + sandwich.transpose());

  Eigen::MatrixXd sy = fit.a_hat * est.sigma_x_hat * fit.a_hat.transpose();
  sy = 0.5 * (sy + sy.transpose()).eval();
  sy.diagonal() += d;
  est.sigma_y_hat = std::move(sy);
  return est;
}

Eigen::MatrixXd precision_woodbury(const CovarianceEstimates& est) {
  const long p = est.sigma_y_hat.rows();
  for (double v : est.noise.variances) {
    if (!(v > 0.0)) {
      throw NoiseModelError(
          "noise variance " + std::to_string(v) +
          " is not positive; the structured inverse needs positive noise");
    }
  }
  const Eigen::VectorXd dinv = est.noise.diagonal(p).cwiseInverse();

  const long r = est.loading.cols();
  if (r == 0) {
    return Eigen::MatrixXd(dinv.asDiagonal());
  }

  // Invert Sigma_x through its symmetric eigendecomposition: it is tiny
  // (r x r), may legitimately be indefinite, and the spectrum doubles as the
  // conditioning diagnostic.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sx(est.sigma_x_hat);
  if (sx.info() != Eigen::Success) {
    throw EigensolverError("eigensolver failed on the r x r factor covariance");
  }
  const Eigen::VectorXd abs_ev = sx.eigenvalues().cwiseAbs();
  const double max_ev = abs_ev.maxCoeff();
  const double min_ev = abs_ev.minCoeff();
  if (!(min_ev > 0.0) || max_ev / min_ev > 1e12) {
    throw ConditioningError(
        "factor covariance condition number " +
        std::to_string(min_ev > 0.0 ? max_ev / min_ev
                                    : std::numeric_limits<double>::infinity()) +
        " exceeds 1e12; consider a smaller factor count");
  }
  const Eigen::MatrixXd sigma_x_inv =
      sx.eigenvectors() * sx.eigenvalues().cwiseInverse().asDiagonal() *
      sx.eigenvectors().transpose();

  // B = Sigma_x^-1 + A^T D^-1 A, solved by Cholesky: the Woodbury identity
  // needs B positive definite for Sigma_y to be invertible this way.
  const Eigen::MatrixXd w = dinv.asDiagonal() * est.loading;  // D^-1 A, p x r
  Eigen::MatrixXd b = sigma_x_inv + est.loading.transpose() * w;
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success) {
    throw ConditioningError(
        "Woodbury core matrix is not positive definite; the structured "
        "covariance is not invertible at this factor count");
  }

  Eigen::MatrixXd precision = -w * llt.solve(w.transpose());
  precision.diagonal() += dinv;
  precision = 0.5 * (precision + precision.transpose()).eval();
  return precision;
}

CovarianceEstimates estimate_covariances(const FactorModelFit& fit,
                                         const TimeSeriesPanel& panel,
                                         const NoiseModel& noise) {
  CovarianceEstimates est = assemble_sigma_y(fit, panel, noise);
  est.precision_hat = precision_woodbury(est);
  return est;
}

}  // namespace factorscope
