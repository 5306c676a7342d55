#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "factorscope/panel.hpp"

namespace factorscope {

// One strong AR(1) factor observed through cosine loadings with i.i.d.
// Gaussian noise: x_t = ar_coef x_{t-1} + eta_t, A_i = 2 cos(2 pi i / p),
// y_t = A x_t + eps_t. The factor starts from its stationary distribution.
struct Example1Config {
  long n = 0;
  long p = 0;
  double ar_coef = 0.9;
  double innovation_sd = 2.0;
  double noise_sd = 2.0;
  int k0 = 1;
  int r = 1;
};

enum class NoiseDist { normal, student_t5 };

// Three ARMA-coupled factors of tunable strength. Each raw loading column has
// its first p/2 entries uniform on (-2, 2) and the rest zero, then column i
// is scaled by p^(-delta_i / 2) with (delta1, delta2, delta2): delta = 0 is a
// strong factor, larger delta weaker. Noise is diagonal with variances
// alternating 0.5, 0.8, either Gaussian or t5 rescaled to the same variances.
struct Example2Config {
  long n = 0;
  long p = 0;  // must be even
  double delta1 = 0.0;
  double delta2 = 0.0;
  NoiseDist noise_dist = NoiseDist::student_t5;
  int k0 = 3;
  int r = 3;   // one-step factor count
  int r1 = 1;  // two-step split
  int r2 = 2;
};

// Ground truth attached to a generated design: the data-generating loading,
// the orthonormal comparison target for loading errors (the eigenvectors of
// the population lag-covariance product restricted to the loading span), and
// the exact stationary covariance with its dense inverse.
struct SimulationTruth {
  Eigen::MatrixXd loading_raw;     // p x r as used for generation
  Eigen::MatrixXd loading_target;  // p x r orthonormal
  Eigen::MatrixXd sigma_y;         // p x p
  Eigen::MatrixXd precision;      // p x p
};

SimulationTruth example1_truth(const Example1Config& cfg);
TimeSeriesPanel gen_example1_panel(const Example1Config& cfg,
                                   std::uint64_t seed);
std::pair<TimeSeriesPanel, SimulationTruth> gen_example1(
    const Example1Config& cfg, std::uint64_t seed);

// Exact stationary (cross-)covariance of the three Example-2 factor processes
// at lag k >= 0: entry (i, j) is Cov(x_{i,t+k}, x_{j,t}).
Eigen::Matrix3d example2_sigma_x(int lag);

// The loading matrix is a per-configuration quantity: one draw (from a stream
// derived off the base seed) is shared by every replication, so the true
// covariance is fixed and inverted once.
Eigen::MatrixXd example2_loadings(const Example2Config& cfg,
                                  std::uint64_t loading_seed);
SimulationTruth example2_truth(const Example2Config& cfg,
                               std::uint64_t base_seed);
TimeSeriesPanel gen_example2_panel(const Example2Config& cfg,
                                   const Eigen::MatrixXd& loading_raw,
                                   std::uint64_t seed);
std::pair<TimeSeriesPanel, SimulationTruth> gen_example2(
    const Example2Config& cfg, std::uint64_t seed);

// Largest singular value. Symmetric inputs take a direct eigenvalue path;
// general matrices go through the Gram matrix on the smaller side.
double spectral_norm(const Eigen::MatrixXd& m);

// Reorders/signs the estimate's columns to best match the target: greedy
// maximal |target_i . estimate_j| assignment (exact for the r <= 3 designs),
// then sign alignment. For r = 1 this reduces to a sign flip.
Eigen::MatrixXd align_columns_to_target(const Eigen::MatrixXd& estimate,
                                        const Eigen::MatrixXd& target);

struct MethodSet {
  bool one_step = true;
  bool two_step = false;
};

// One error metric across replications. `defined` is false when the design
// rules the metric out wholesale (sample precision needs p < n); individual
// entries are NaN only for replications where estimation failed.
struct MetricSeries {
  std::string name;
  bool defined = true;
  std::vector<double> values;
};

double metric_mean(const MetricSeries& s);
double metric_sd(const MetricSeries& s);  // sample sd; NaN when reps < 2

struct SimulationReport {
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::uint64_t base_seed = 0;
  int reps = 0;
  std::vector<MetricSeries> metrics;
};

// Runs `reps` independent replications; replication i draws its paths from
// seed base_seed + i, so any thread count yields bit-identical reports.
SimulationReport run_replications(const Example1Config& cfg, int reps,
                                  MethodSet methods, std::uint64_t base_seed,
                                  int threads = 1);
SimulationReport run_replications(const Example2Config& cfg, int reps,
                                  MethodSet methods, std::uint64_t base_seed,
                                  int threads = 1);

}  // namespace factorscope
