#include "factorscope/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "factorscope/covariance.hpp"
#include "factorscope/eigen_factor.hpp"
#include "factorscope/errors.hpp"
#include "factorscope/num_format.hpp"
#include "factorscope/rng.hpp"
#include "factorscope/two_step.hpp"

namespace factorscope {

namespace {

constexpr std::uint64_t kLoadingStreamSalt = 0x10ADF00D5EEDULL;
constexpr int kExample2Burnin = 500;

void validate(const Example1Config& cfg) {
  if (cfg.n < 10 || cfg.p < 2) {
    throw ConfigError("example1 needs n >= 10 and p >= 2, got n = " +
                      std::to_string(cfg.n) + ", p = " + std::to_string(cfg.p));
  }
  if (cfg.k0 < 1 || cfg.k0 > cfg.n - 2) {
    throw ConfigError("example1 k0 = " + std::to_string(cfg.k0) +
                      " outside [1, n-2]");
  }
  if (std::abs(cfg.ar_coef) >= 1.0) {
    throw ConfigError("example1 ar_coef must be inside (-1, 1)");
  }
  if (cfg.r < 1 || cfg.r > cfg.p) {
    throw ConfigError("example1 r outside [1, p]");
  }
}

void validate(const Example2Config& cfg) {
  if (cfg.n < 10 || cfg.p < 6) {
    throw ConfigError("example2 needs n >= 10 and p >= 6, got n = " +
                      std::to_string(cfg.n) + ", p = " + std::to_string(cfg.p));
  }
  if (cfg.p % 2 != 0) {
    throw ConfigError("example2 needs even p (half-support loading recipe), "
                      "got p = " + std::to_string(cfg.p));
  }
  if (cfg.k0 < 1 || cfg.k0 > cfg.n - 2) {
    throw ConfigError("example2 k0 = " + std::to_string(cfg.k0) +
                      " outside [1, n-2]");
  }
  if (cfg.r < 1 || cfg.r > 3 || cfg.r1 < 1 || cfg.r2 < 1 ||
      cfg.r1 + cfg.r2 > cfg.p) {
    throw ConfigError("example2 factor counts out of range");
  }
}

Eigen::VectorXd example1_loading(const Example1Config& cfg) {
  Eigen::VectorXd a(cfg.p);
  for (long i = 0; i < cfg.p; ++i) {
    a(i) = 2.0 * std::cos(2.0 * std::numbers::pi *
                          static_cast<double>(i + 1) /
                          static_cast<double>(cfg.p));
  }
  return a;
}

// Dense SPD inverse for the *true* covariance only (estimators never invert
// a p x p matrix directly).
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericFailure("true covariance is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

Eigen::VectorXd example2_noise_variances(long p) {
  Eigen::VectorXd v(p);
  for (long i = 0; i < p; ++i) {
    v(i) = (i % 2 == 0) ? 0.5 : 0.8;  // pattern 0.5, 0.8, 0.5, 0.8, ...
  }
  return v;
}

// ARMA parameters of factor 1 and the state-space form of factors (2, 3):
//   s_t = PHI s_{t-1} + PSI u_t + THETA u_{t-1},  s_t = (x2_t, x3_t).
const Eigen::Matrix2d& phi_23() {
  static const Eigen::Matrix2d m = [] {
    Eigen::Matrix2d v;
    v << -0.7, 0.0, -0.56, -0.5;
    return v;
  }();
  return m;
}
const Eigen::Matrix2d& psi_23() {
  static const Eigen::Matrix2d m = [] {
    Eigen::Matrix2d v;
    v << 1.0, 0.0, 0.8, 1.0;
    return v;
  }();
  return m;
}
const Eigen::Matrix2d& theta_23() {
  static const Eigen::Matrix2d m = [] {
    Eigen::Matrix2d v;
    v << 0.85, 0.0, 0.68, 0.0;
    return v;
  }();
  return m;
}

// Stationary covariance of the (x2, x3) state: solves the discrete Lyapunov
// fixed point G = PHI G PHI^T + PHI PSI THETA^T + THETA PSI^T PHI^T
//                + PSI PSI^T + THETA THETA^T via the 4x4 vectorized system.
Eigen::Matrix2d stationary_gamma0_23() {
  const Eigen::Matrix2d& f = phi_23();
  const Eigen::Matrix2d rhs = f * psi_23() * theta_23().transpose() +
                              theta_23() * psi_23().transpose() * f.transpose() +
                              psi_23() * psi_23().transpose() +
                              theta_23() * theta_23().transpose();
  Eigen::Matrix4d kron;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      kron.block<2, 2>(2 * i, 2 * j) = f(i, j) * f;
    }
  }
  // column-major vec: vec(F G F^T) = (F (x) F) vec(G)
  Eigen::Vector4d vec_rhs(rhs(0, 0), rhs(1, 0), rhs(0, 1), rhs(1, 1));
  Eigen::Vector4d vec_g =
      (Eigen::Matrix4d::Identity() - kron).partialPivLu().solve(vec_rhs);
  Eigen::Matrix2d g;
  g << vec_g(0), vec_g(2), vec_g(1), vec_g(3);
  return 0.5 * (g + g.transpose());
}

}  // namespace

Eigen::Matrix3d example2_sigma_x(int lag) {
  if (lag < 0) {
    throw ConfigError("lag must be >= 0");
  }
  // Factor 1 is ARMA(1,1): x_t = phi x_{t-1} + e_t + theta e_{t-1}.
  constexpr double phi1 = -0.8;
  constexpr double theta1 = 0.9;
  const double gamma0_1 =
      (1.0 + theta1 * theta1 + 2.0 * phi1 * theta1) / (1.0 - phi1 * phi1);

  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  if (lag == 0) {
    out(0, 0) = gamma0_1;
    out.block<2, 2>(1, 1) = stationary_gamma0_23();
    return out;
  }
  double g1 = phi1 * gamma0_1 + theta1;  // lag-1 autocovariance of factor 1
  Eigen::Matrix2d g23 =
      phi_23() * stationary_gamma0_23() + theta_23() * psi_23().transpose();
  for (int k = 2; k <= lag; ++k) {
    g1 *= phi1;
    g23 = phi_23() * g23;
  }
  out(0, 0) = g1;
  out.block<2, 2>(1, 1) = g23;
  return out;
}

SimulationTruth example1_truth(const Example1Config& cfg) {
  validate(cfg);
  SimulationTruth truth;
  const Eigen::VectorXd a = example1_loading(cfg);
  truth.loading_raw = a;
  truth.loading_target = a / a.norm();
  const double var_x = cfg.innovation_sd * cfg.innovation_sd /
                       (1.0 - cfg.ar_coef * cfg.ar_coef);
  truth.sigma_y = var_x * a * a.transpose();
  truth.sigma_y.diagonal().array() += cfg.noise_sd * cfg.noise_sd;
  truth.precision = spd_inverse(truth.sigma_y);
  return truth;
}

TimeSeriesPanel gen_example1_panel(const Example1Config& cfg,
                                   std::uint64_t seed) {
  validate(cfg);
  Rng rng(seed);
  const Eigen::VectorXd a = example1_loading(cfg);

  // Draw order (frozen): the factor path first (stationary start, then n-1
  // innovations), then the noise matrix row by row.
  const double stationary_sd =
      cfg.innovation_sd / std::sqrt(1.0 - cfg.ar_coef * cfg.ar_coef);
  Eigen::VectorXd x(cfg.n);
  x(0) = rng.normal(0.0, stationary_sd);
  for (long t = 1; t < cfg.n; ++t) {
    x(t) = cfg.ar_coef * x(t - 1) + rng.normal(0.0, cfg.innovation_sd);
  }
  Eigen::MatrixXd y(cfg.n, cfg.p);
  for (long t = 0; t < cfg.n; ++t) {
    for (long j = 0; j < cfg.p; ++j) {
      y(t, j) = a(j) * x(t) + rng.normal(0.0, cfg.noise_sd);
    }
  }
  return TimeSeriesPanel(std::move(y));
}

std::pair<TimeSeriesPanel, SimulationTruth> gen_example1(
    const Example1Config& cfg, std::uint64_t seed) {
  return {gen_example1_panel(cfg, seed), example1_truth(cfg)};
}

Eigen::MatrixXd example2_loadings(const Example2Config& cfg,
                                  std::uint64_t loading_seed) {
  validate(cfg);
  Rng rng(loading_seed);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cfg.p, 3);
  // Draw order (frozen): column by column, first half of each column.
  const double deltas[3] = {cfg.delta1, cfg.delta2, cfg.delta2};
  for (int j = 0; j < 3; ++j) {
    for (long i = 0; i < cfg.p / 2; ++i) {
      a(i, j) = rng.uniform(-2.0, 2.0);
    }
  }
  for (int j = 0; j < 3; ++j) {
    a.col(j) *= std::pow(static_cast<double>(cfg.p), -deltas[j] / 2.0);
  }
  return a;
}

SimulationTruth example2_truth(const Example2Config& cfg,
                               std::uint64_t base_seed) {
  validate(cfg);
  SimulationTruth truth;
  truth.loading_raw =
      example2_loadings(cfg, derive_stream(base_seed, kLoadingStreamSalt));
  const Eigen::MatrixXd& a = truth.loading_raw;

  const Eigen::Matrix3d sigma_x = example2_sigma_x(0);
  truth.sigma_y = a * sigma_x * a.transpose();
  truth.sigma_y = 0.5 * (truth.sigma_y + truth.sigma_y.transpose()).eval();
  truth.sigma_y.diagonal() += example2_noise_variances(cfg.p);
  truth.precision = spd_inverse(truth.sigma_y);

  // Orthonormal loading target: eigenvectors of the population eigen-target
  // matrix L = sum_k Sigma_y(k) Sigma_y(k)^T. White noise drops out of every
  // lag k >= 1, so L = A M A^T with M = sum_k Sigma_x(k) G Sigma_x(k)^T and
  // G = A^T A; eigenvectors inside span(A) come from the symmetric 3x3
  // problem G^(1/2) M G^(1/2) w = lambda w via u = A G^(-1/2) w.
  const Eigen::Matrix3d g = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ge(g);
  const Eigen::Matrix3d g_half =
      ge.eigenvectors() *
      ge.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      ge.eigenvectors().transpose();
  const Eigen::Matrix3d g_half_inv =
      ge.eigenvectors() *
      ge.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().asDiagonal() *
      ge.eigenvectors().transpose();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int k = 1; k <= cfg.k0; ++k) {
    const Eigen::Matrix3d sk = example2_sigma_x(k);
    m += sk * g * sk.transpose();
  }
  const Eigen::Matrix3d h = g_half * m * g_half;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> he(
      Eigen::Matrix3d(0.5 * (h + h.transpose())));
  // descending eigenvalue order to match the estimator's column order
  Eigen::Matrix3d w = he.eigenvectors().rowwise().reverse();
  Eigen::MatrixXd target = a * (g_half_inv * w);
  for (int j = 0; j < 3; ++j) {
    target.col(j) /= target.col(j).norm();
    long best = 0;
    double best_abs = -1.0;
    for (long i = 0; i < target.rows(); ++i) {
      if (std::abs(target(i, j)) > best_abs) {
        best_abs = std::abs(target(i, j));
        best = i;
      }
    }
    if (target(best, j) < 0.0) target.col(j) = -target.col(j);
  }
  truth.loading_target = std::move(target);
  return truth;
}

TimeSeriesPanel gen_example2_panel(const Example2Config& cfg,
                                   const Eigen::MatrixXd& loading_raw,
                                   std::uint64_t seed) {
  validate(cfg);
  if (loading_raw.rows() != cfg.p || loading_raw.cols() != 3) {
    throw DimensionError("example2 loading must be p x 3");
  }
  Rng rng(seed);

  // Draw order (frozen): the factor recursion runs burn-in + n steps with
  // three innovations per step, then the noise matrix row by row.
  Eigen::MatrixXd x(cfg.n, 3);
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
  double e1p = 0.0, e2p = 0.0;
  for (long step = 0; step < kExample2Burnin + cfg.n; ++step) {
    const double e1 = rng.normal01();
    const double e2 = rng.normal01();
    const double e3 = rng.normal01();
    x1 = -0.8 * x1 + e1 + 0.9 * e1p;
    x2 = -0.7 * x2 + e2 + 0.85 * e2p;
    x3 = 0.8 * x2 - 0.5 * x3 + e3;
    e1p = e1;
    e2p = e2;
    if (step >= kExample2Burnin) {
      x(step - kExample2Burnin, 0) = x1;
      x(step - kExample2Burnin, 1) = x2;
      x(step - kExample2Burnin, 2) = x3;
    }
  }

  const Eigen::VectorXd noise_var = example2_noise_variances(cfg.p);
  Eigen::MatrixXd y = x * loading_raw.transpose();
  for (long t = 0; t < cfg.n; ++t) {
    for (long j = 0; j < cfg.p; ++j) {
      const double sd_j = std::sqrt(noise_var(j));
      if (cfg.noise_dist == NoiseDist::normal) {
        y(t, j) += rng.normal(0.0, sd_j);
      } else {
        // Var(t5) = 5/3, so scale by sqrt(3/5) to hit the target variance.
        y(t, j) += rng.student_t5() * std::sqrt(noise_var(j) * 0.6);
      }
    }
  }
  return TimeSeriesPanel(std::move(y));
}

std::pair<TimeSeriesPanel, SimulationTruth> gen_example2(
    const Example2Config& cfg, std::uint64_t seed) {
  SimulationTruth truth = example2_truth(cfg, seed);
  return {gen_example2_panel(cfg, truth.loading_raw, seed), std::move(truth)};
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (!m.allFinite()) {
    throw NumericFailure("spectral_norm: matrix has non-finite entries");
  }
  const double fro = m.norm();
  if (fro == 0.0) return 0.0;

  if (m.rows() == m.cols() &&
      (m - m.transpose()).norm() <= 1e-12 * fro) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m,
                                                      Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues()(0)),
                    std::abs(es.eigenvalues()(m.rows() - 1)));
  }
  // Gram matrix on the smaller side; singular values come out squared.
  Eigen::MatrixXd gram;
  if (m.rows() <= m.cols()) {
    gram = m * m.transpose();
  } else {
    gram = m.transpose() * m;
  }
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                    Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

Eigen::MatrixXd align_columns_to_target(const Eigen::MatrixXd& estimate,
                                        const Eigen::MatrixXd& target) {
  if (estimate.rows() != target.rows() || estimate.cols() != target.cols()) {
    throw DimensionError("alignment needs equal shapes");
  }
  const long r = estimate.cols();
  const Eigen::MatrixXd corr = target.transpose() * estimate;  // r x r
  Eigen::MatrixXd aligned(estimate.rows(), r);
  std::vector<char> row_used(r, 0), col_used(r, 0);
  for (long pick = 0; pick < r; ++pick) {
    long bi = -1, bj = -1;
    double best = -1.0;
    for (long i = 0; i < r; ++i) {
      if (row_used[i]) continue;
      for (long j = 0; j < r; ++j) {
        if (col_used[j]) continue;
        if (std::abs(corr(i, j)) > best) {  // strict: lexicographic ties
          best = std::abs(corr(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = 1;
    col_used[bj] = 1;
    aligned.col(bi) = estimate.col(bj);
    if (corr(bi, bj) < 0.0) aligned.col(bi) = -aligned.col(bi);
  }
  return aligned;
}

double metric_mean(const MetricSeries& s) {
  if (!s.defined || s.values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double acc = 0.0;
  long count = 0;
  for (double v : s.values) {
    if (std::isfinite(v)) {
      acc += v;
      ++count;
    }
  }
  return count ? acc / static_cast<double>(count)
               : std::numeric_limits<double>::quiet_NaN();
}

double metric_sd(const MetricSeries& s) {
  const double mean = metric_mean(s);
  if (!std::isfinite(mean)) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  long count = 0;
  for (double v : s.values) {
    if (std::isfinite(v)) {
      acc += (v - mean) * (v - mean);
      ++count;
    }
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(acc / static_cast<double>(count - 1));
}

namespace {

struct RepMetrics {
  double loading = std::numeric_limits<double>::quiet_NaN();
  double cov_sample = std::numeric_limits<double>::quiet_NaN();
  double cov_fitted = std::numeric_limits<double>::quiet_NaN();
  double prec_sample = std::numeric_limits<double>::quiet_NaN();
  double prec_fitted = std::numeric_limits<double>::quiet_NaN();
  double ts_loading = std::numeric_limits<double>::quiet_NaN();
  double ts_cov = std::numeric_limits<double>::quiet_NaN();
  double ts_prec = std::numeric_limits<double>::quiet_NaN();
};

struct RunPlan {
  int r = 1;
  int r1 = 0;
  int r2 = 0;
  int k0 = 1;
  MethodSet methods;
  std::vector<std::vector<int>> groups;
  std::function<TimeSeriesPanel(std::uint64_t)> generate;
};

RepMetrics run_one(const RunPlan& plan, const SimulationTruth& truth,
                   std::uint64_t seed) {
  RepMetrics out;
  const TimeSeriesPanel panel = plan.generate(seed);
  const long n = panel.n();
  const long p = panel.p();

  const Eigen::MatrixXd sample_cov = sample_autocov(panel, 0);
  out.cov_sample = spectral_norm(sample_cov - truth.sigma_y);
  if (p < n) {
    // The unstructured benchmark: invert the raw sample covariance.
    Eigen::MatrixXd sample_prec =
        sample_cov.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    out.prec_sample = spectral_norm(sample_prec - truth.precision);
  }

  // A numeric breakdown inside one replication (a degenerate spectrum, a
  // Woodbury refusal on a near-singular factor covariance, ...) is recorded
  // as NaN for the metrics that were not reached, rather than aborting the
  // whole batch: summaries average the replications that succeeded.
  if (plan.methods.one_step) {
    try {
      FactorModelFit one = fit(panel, plan.r, plan.k0);
      out.loading = spectral_norm(
          align_columns_to_target(one.a_hat, truth.loading_target) -
          truth.loading_target);
      const NoiseModel noise = estimate_noise_variances(
          one, plan.groups, NoiseDofPolicy::projection_adjusted);
      const CovarianceEstimates est = estimate_covariances(one, panel, noise);
      out.cov_fitted = spectral_norm(est.sigma_y_hat - truth.sigma_y);
      out.prec_fitted = spectral_norm(est.precision_hat - truth.precision);
    } catch (const NumericFailure&) {
      // Metrics computed before the failure keep their values.
    }
  }

  if (plan.methods.two_step) {
    try {
      const TwoStepFit two = two_step_fit(panel, plan.r1, plan.r2, plan.k0);
      const FactorModelFit view = to_factor_fit(two);
      out.ts_loading = spectral_norm(
          align_columns_to_target(view.a_hat, truth.loading_target) -
          truth.loading_target);
      const NoiseModel noise = estimate_noise_variances(
          view, plan.groups, NoiseDofPolicy::projection_adjusted);
      const CovarianceEstimates est = estimate_covariances(view, panel, noise);
      out.ts_cov = spectral_norm(est.sigma_y_hat - truth.sigma_y);
      out.ts_prec = spectral_norm(est.precision_hat - truth.precision);
    } catch (const NumericFailure&) {
      // Metrics computed before the failure keep their values.
    }
  }
  return out;
}

SimulationReport run_common(const RunPlan& plan, const SimulationTruth& truth,
                            long n, long p, int reps, std::uint64_t base_seed,
                            int threads) {
  if (reps < 1) {
    throw ConfigError("reps must be >= 1");
  }
  if (threads < 1) {
    throw ConfigError("threads must be >= 1");
  }

  std::vector<RepMetrics> rows(reps);
  if (threads == 1) {
    for (int i = 0; i < reps; ++i) {
      rows[i] = run_one(plan, truth, base_seed + static_cast<std::uint64_t>(i));
    }
  } else {
    // Work-stealing over replication indices; every replication owns its RNG
    // stream and a fixed slot in `rows`, so scheduling cannot change results.
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= reps) break;
        try {
          rows[i] =
              run_one(plan, truth, base_seed + static_cast<std::uint64_t>(i));
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(threads, reps);
    pool.reserve(count);
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  SimulationReport report;
  report.base_seed = base_seed;
  report.reps = reps;

  auto add_metric = [&](const std::string& name, bool defined,
                        double RepMetrics::*field) {
    MetricSeries series;
    series.name = name;
    series.defined = defined;
    if (defined) {
      series.values.reserve(reps);
      for (const auto& row : rows) series.values.push_back(row.*field);
    }
    report.metrics.push_back(std::move(series));
  };

  const bool sample_prec_defined = p < n;
  if (plan.methods.one_step) {
    add_metric("loading_error", true, &RepMetrics::loading);
  }
  add_metric("cov_error_sample", true, &RepMetrics::cov_sample);
  if (plan.methods.one_step) {
    add_metric("cov_error_fitted", true, &RepMetrics::cov_fitted);
  }
  add_metric("prec_error_sample", sample_prec_defined,
             &RepMetrics::prec_sample);
  if (plan.methods.one_step) {
    add_metric("prec_error_fitted", true, &RepMetrics::prec_fitted);
  }
  if (plan.methods.two_step) {
    add_metric("loading_error_two_step", true, &RepMetrics::ts_loading);
    add_metric("cov_error_two_step", true, &RepMetrics::ts_cov);
    add_metric("prec_error_two_step", true, &RepMetrics::ts_prec);
  }
  return report;
}

std::vector<std::vector<int>> single_group(long p) {
  std::vector<int> all(p);
  for (long i = 0; i < p; ++i) all[i] = static_cast<int>(i);
  return {all};
}

std::vector<std::vector<int>> alternating_groups(long p) {
  std::vector<int> even, odd;
  for (long i = 0; i < p; ++i) {
    ((i % 2 == 0) ? even : odd).push_back(static_cast<int>(i));
  }
  return {even, odd};
}

}  // namespace

SimulationReport run_replications(const Example1Config& cfg, int reps,
                                  MethodSet methods, std::uint64_t base_seed,
                                  int threads) {
  validate(cfg);
  if (methods.two_step) {
    throw ConfigError(
        "the two-step method is not defined for the one-factor example1 "
        "design; use example2");
  }
  if (!methods.one_step) {
    throw ConfigError("no estimation method selected");
  }
  const SimulationTruth truth = example1_truth(cfg);
  RunPlan plan;
  plan.r = cfg.r;
  plan.k0 = cfg.k0;
  plan.methods = methods;
  plan.groups = single_group(cfg.p);  // example1 noise is homoscedastic
  plan.generate = [&cfg](std::uint64_t seed) {
    return gen_example1_panel(cfg, seed);
  };
  SimulationReport report =
      run_common(plan, truth, cfg.n, cfg.p, reps, base_seed, threads);
  report.config_echo = {
      {"design", "example1"},
      {"n", std::to_string(cfg.n)},
      {"p", std::to_string(cfg.p)},
      {"k0", std::to_string(cfg.k0)},
      {"r", std::to_string(cfg.r)},
      {"ar_coef", format_double(cfg.ar_coef)},
      {"innovation_sd", format_double(cfg.innovation_sd)},
      {"noise_sd", format_double(cfg.noise_sd)},
      {"method", "one_step"},
      {"noise_groups", "1"},
      {"reps", std::to_string(reps)},
      {"base_seed", std::to_string(base_seed)},
  };
  return report;
}

SimulationReport run_replications(const Example2Config& cfg, int reps,
                                  MethodSet methods, std::uint64_t base_seed,
                                  int threads) {
  validate(cfg);
  if (!methods.one_step && !methods.two_step) {
    throw ConfigError("no estimation method selected");
  }
  const SimulationTruth truth = example2_truth(cfg, base_seed);
  RunPlan plan;
  plan.r = cfg.r;
  plan.r1 = cfg.r1;
  plan.r2 = cfg.r2;
  plan.k0 = cfg.k0;
  plan.methods = methods;
  plan.groups = alternating_groups(cfg.p);  // the 0.5 / 0.8 design groups
  const Eigen::MatrixXd& loading = truth.loading_raw;
  plan.generate = [&cfg, &loading](std::uint64_t seed) {
    return gen_example2_panel(cfg, loading, seed);
  };
  SimulationReport report =
      run_common(plan, truth, cfg.n, cfg.p, reps, base_seed, threads);
  std::string method_desc;
  if (methods.one_step) method_desc = "one_step";
  if (methods.two_step) {
    if (!method_desc.empty()) method_desc += "+";
    method_desc += "two_step";
  }
  report.config_echo = {
      {"design", "example2"},
      {"n", std::to_string(cfg.n)},
      {"p", std::to_string(cfg.p)},
      {"k0", std::to_string(cfg.k0)},
      {"r", std::to_string(cfg.r)},
      {"r1", std::to_string(cfg.r1)},
      {"r2", std::to_string(cfg.r2)},
      {"delta1", format_double(cfg.delta1)},
      {"delta2", format_double(cfg.delta2)},
      {"noise_dist",
       cfg.noise_dist == NoiseDist::normal ? "normal" : "t5"},
      {"method", method_desc},
      {"noise_groups", "2"},
      {"reps", std::to_string(reps)},
      {"base_seed", std::to_string(base_seed)},
  };
  return report;
}

}  // namespace factorscope
