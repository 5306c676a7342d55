#include "factorscope/forecasting.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "factorscope/eigen_factor.hpp"
#include "factorscope/errors.hpp"

namespace factorscope {

namespace {

void validate(const RollingConfig& cfg, long n, long p) {
  if (cfg.k0 < 1) {
    throw ConfigError("k0 must be >= 1");
  }
  if (cfg.ar_max_order < 1) {
    throw ConfigError("ar_max_order must be >= 1");
  }
  const long floor_len =
      std::max<long>(cfg.k0 + 10, cfg.ar_max_order + 10);
  if (cfg.window_length < floor_len) {
    throw ConfigError("window_length = " + std::to_string(cfg.window_length) +
                      " too short; need at least max(k0, ar_max_order) + 10 = " +
                      std::to_string(floor_len));
  }
  if (cfg.window_length >= n) {
    throw ConfigError("window_length = " + std::to_string(cfg.window_length) +
                      " must be smaller than the panel length n = " +
                      std::to_string(n));
  }
  if (cfg.r_select == RSelect::fixed) {
    if (cfg.r < 1 || cfg.r > p) {
      throw ConfigError("r = " + std::to_string(cfg.r) + " outside [1, p]");
    }
  } else {
    if (cfg.r_max < 1 || cfg.r_max > p - 1) {
      throw ConfigError("r_max = " + std::to_string(cfg.r_max) +
                        " outside [1, p-1]");
    }
  }
}

}  // namespace

ArFit ar_fit_forecast(const Eigen::VectorXd& series, int max_order) {
  if (max_order < 1) {
    throw ConfigError("ar_fit_forecast: max_order must be >= 1");
  }
  const long n = series.size();
  if (n < max_order + 10) {
    throw ConfigError("ar_fit_forecast: series length " + std::to_string(n) +
                      " < max_order + 10 = " + std::to_string(max_order + 10));
  }
  if (!series.allFinite()) {
    throw NumericFailure("ar_fit_forecast: series has non-finite entries");
  }

  const double mean = series.mean();
  // Raw second moments about zero, divisor n at every lag.
  std::vector<double> acov(max_order + 1, 0.0);
  for (int k = 0; k <= max_order; ++k) {
    double acc = 0.0;
    for (long t = k; t < n; ++t) acc += series(t) * series(t - k);
    acov[k] = acc / static_cast<double>(n);
  }
  const double centered_var = acov[0] - mean * mean;
  if (!(centered_var > 1e-12 * (acov[0] + 1.0))) {
    // (Numerically) constant series: the AR normal equations are singular,
    // and the best constant predictor is the mean itself.
    ArFit flat;
    flat.degenerate = true;
    flat.forecast = mean;
    return flat;
  }

  // Levinson-Durbin, keeping the best-AIC order seen so far. The recursion
  // stops early if the prediction error variance collapses (perfect fit) —
  // the collapsed order already has AIC ~ -inf and cannot be beaten.
  std::vector<double> phi(max_order + 1, 0.0);   // phi[1..q] for current q
  std::vector<double> prev(max_order + 1, 0.0);
  double err = acov[0];
  double best_aic = std::numeric_limits<double>::infinity();
  ArFit best;
  for (int q = 1; q <= max_order; ++q) {
    if (!(err > 1e-300)) break;
    double num = acov[q];
    for (int j = 1; j < q; ++j) num -= phi[j] * acov[q - j];
    const double kappa = num / err;
    prev = phi;
    phi[q] = kappa;
    for (int j = 1; j < q; ++j) phi[j] = prev[j] - kappa * prev[q - j];
    err *= (1.0 - kappa * kappa);
    const double var_q = std::max(err, 1e-300);
    const double aic = static_cast<double>(n) * std::log(var_q) + 2.0 * q;
    if (aic < best_aic) {
      best_aic = aic;
      best.order = q;
      best.coefficients.assign(phi.begin() + 1, phi.begin() + q + 1);
      best.innovation_variance = var_q;
    }
  }
  if (best.order == 0) {
    // err collapsed before order 1 could be fit; treat as degenerate.
    ArFit flat;
    flat.degenerate = true;
    flat.forecast = mean;
    return flat;
  }
  double fc = 0.0;
  for (int j = 1; j <= best.order; ++j) {
    fc += best.coefficients[j - 1] * series(n - j);
  }
  best.forecast = fc;
  return best;
}

ForecastReport rolling_forecast(const TimeSeriesPanel& panel,
                                const RollingConfig& cfg, int threads) {
  const long n = panel.n();
  const long p = panel.p();
  validate(cfg, n, p);
  if (threads < 1) {
    throw ConfigError("threads must be >= 1");
  }

  const long w = cfg.window_length;
  const long num_windows = n - w;
  const Eigen::MatrixXd& data = panel.data();
  const double root_p = std::sqrt(static_cast<double>(p));

  ForecastReport report;
  report.windows.resize(num_windows);

  auto run_window = [&](long i) {
    WindowResult& out = report.windows[i];
    out.index = i;
    const auto actual = data.row(i + w);
    // The benchmark never needs the fit, so it is computed before anything
    // that can throw.
    out.rmse_rw = (data.row(i + w - 1) - actual).norm() / root_p;
    try {
      const TimeSeriesPanel window(data.middleRows(i, w));
      int r = cfg.r;
      if (cfg.r_select == RSelect::ratio) {
        const FactorModelFit probe = fit(window, 1, cfg.k0);
        r = select_num_factors(probe.eigenvalues, cfg.r_max);
      } else if (cfg.r_select == RSelect::ic_p1) {
        r = select_num_factors_ic(window, cfg.k0, cfg.r_max);
      }
      const FactorModelFit wfit = fit(window, r, cfg.k0);
      Eigen::VectorXd x_fc(r);
      for (int j = 0; j < r; ++j) {
        x_fc(j) = ar_fit_forecast(wfit.factors.col(j), cfg.ar_max_order)
                      .forecast;
      }
      const Eigen::VectorXd y_fc = wfit.a_hat * x_fc;
      out.rmse_factor = (y_fc.transpose() - actual).norm() / root_p;
      out.r_used = r;
      out.valid = true;
    } catch (const NumericFailure& e) {
      out.valid = false;
      out.rmse_factor = std::numeric_limits<double>::quiet_NaN();
      out.error = e.what();
    }
  };

  if (threads == 1 || num_windows <= 1) {
    for (long i = 0; i < num_windows; ++i) run_window(i);
  } else {
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (true) {
        const long i = next.fetch_add(1);
        if (i >= num_windows) break;
        try {
          run_window(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const long count = std::min<long>(threads, num_windows);
    pool.reserve(count);
    for (long t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  report.cumulative_factor.resize(num_windows);
  report.cumulative_rw.resize(num_windows);
  double acc_f = 0.0, acc_rw = 0.0;
  for (long i = 0; i < num_windows; ++i) {
    const WindowResult& win = report.windows[i];
    if (win.valid) {
      acc_f += win.rmse_factor;
      ++report.valid_windows;
    }
    acc_rw += win.rmse_rw;
    report.cumulative_factor[i] = acc_f;
    report.cumulative_rw[i] = acc_rw;
  }
  report.total_factor = acc_f;
  report.total_rw = acc_rw;
  return report;
}

}  // namespace factorscope
