#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "factorscope/covariance.hpp"
#include "factorscope/eigen_factor.hpp"
#include "factorscope/errors.hpp"
#include "factorscope/panel.hpp"
#include "factorscope/rng.hpp"
#include "support/oracles.hpp"

using namespace factorscope;

namespace {

// A fit stub carrying only the fields the noise estimator reads.
FactorModelFit fit_with_residuals(const Eigen::MatrixXd& residuals,
                                  const Eigen::MatrixXd& a_hat = {}) {
  FactorModelFit f;
  f.residuals = residuals;
  f.a_hat = a_hat;
  return f;
}

CovarianceEstimates manual_estimates(const Eigen::MatrixXd& loading,
                                     const Eigen::MatrixXd& sigma_x,
                                     const std::vector<double>& variances,
                                     long p) {
  CovarianceEstimates est;
  est.loading = loading;
  est.sigma_x_hat = sigma_x;
  std::vector<int> all(static_cast<std::size_t>(p));
  for (long i = 0; i < p; ++i) all[static_cast<std::size_t>(i)] = i;
  est.noise.groups = {all};
  est.noise.variances = variances;
  est.sigma_y_hat = loading * sigma_x * loading.transpose();
  est.sigma_y_hat.diagonal() += est.noise.diagonal(p);
  return est;
}

}  // namespace

TEST_CASE("pooled noise variance is the grand mean square of the residuals") {
  SUBCASE("constant residuals give the constant squared") {
    const Eigen::MatrixXd res = Eigen::MatrixXd::Constant(8, 5, 1.5);
    const NoiseModel m =
        estimate_noise_variances(fit_with_residuals(res), {{0, 1, 2, 3, 4}});
    REQUIRE(m.variances.size() == 1);
    CHECK(m.variances[0] == doctest::Approx(2.25).epsilon(1e-14));
    CHECK_FALSE(m.degenerate);
  }

  SUBCASE("zero residuals are flagged degenerate") {
    const Eigen::MatrixXd res = Eigen::MatrixXd::Zero(6, 3);
    const NoiseModel m =
        estimate_noise_variances(fit_with_residuals(res), {{0, 1, 2}});
    CHECK(m.variances[0] == 0.0);
    CHECK(m.degenerate);
  }

  SUBCASE("per-coordinate groups read off column mean squares") {
    Eigen::MatrixXd res(4, 2);
    res.col(0).setConstant(1.0);
    res.col(1).setConstant(2.0);
    const NoiseModel m =
        estimate_noise_variances(fit_with_residuals(res), {{0}, {1}});
    REQUIRE(m.variances.size() == 2);
    CHECK(m.variances[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.variances[1] == doctest::Approx(4.0).epsilon(1e-14));
  }

  SUBCASE("order inside a group does not matter") {
    const Eigen::MatrixXd res = oracles::random_matrix(20, 4, 31);
    const FactorModelFit f = fit_with_residuals(res);
    const NoiseModel a = estimate_noise_variances(f, {{0, 1}, {2, 3}});
    const NoiseModel b = estimate_noise_variances(f, {{1, 0}, {3, 2}});
    CHECK(a.variances[0] == b.variances[0]);
    CHECK(a.variances[1] == b.variances[1]);
  }
}

TEST_CASE("projection adjustment removes the fitted directions' share") {
  const long n = 10, p = 2;
  const Eigen::MatrixXd res = oracles::random_matrix(n, p, 77);
  Eigen::MatrixXd a_hat(p, 1);
  a_hat << 1, 0;  // one unit of leverage inside the single group

  const FactorModelFit f = fit_with_residuals(res, a_hat);
  const NoiseModel plain =
      estimate_noise_variances(f, {{0, 1}}, NoiseDofPolicy::plain);
  const NoiseModel adj = estimate_noise_variances(
      f, {{0, 1}}, NoiseDofPolicy::projection_adjusted);

  // dof drops from 2 to max(2 - 1, 1) = 1, doubling the estimate.
  CHECK(adj.variances[0] == doctest::Approx(2.0 * plain.variances[0]));

  // The adjusted dof never drops below one even when the group is saturated.
  Eigen::MatrixXd full(p, 2);
  full.setIdentity();
  const NoiseModel floor = estimate_noise_variances(
      fit_with_residuals(res, full), {{0, 1}},
      NoiseDofPolicy::projection_adjusted);
  CHECK(floor.variances[0] ==
        doctest::Approx(res.squaredNorm() / static_cast<double>(n)));
}

TEST_CASE("noise groups must partition the coordinates") {
  const Eigen::MatrixXd res = Eigen::MatrixXd::Ones(5, 3);
  const FactorModelFit f = fit_with_residuals(res);
  CHECK_THROWS_AS(estimate_noise_variances(f, {{0, 1}}), PartitionError);
  CHECK_THROWS_AS(estimate_noise_variances(f, {{0, 1, 2}, {}}),
                  PartitionError);
  CHECK_THROWS_AS(estimate_noise_variances(f, {{0, 1}, {1, 2}}),
                  PartitionError);
  CHECK_THROWS_AS(estimate_noise_variances(f, {{0, 1, 2, 3}}),
                  PartitionError);
  CHECK_THROWS_AS(estimate_noise_variances(f, {{-1, 0, 1, 2}}),
                  PartitionError);
}

TEST_CASE("noise diagonal expands group variances onto coordinates") {
  NoiseModel m;
  m.groups = {{0, 2}, {1}};
  m.variances = {0.25, 4.0};
  const Eigen::VectorXd d = m.diagonal(3);
  CHECK(d(0) == 0.25);
  CHECK(d(1) == 4.0);
  CHECK(d(2) == 0.25);

  NoiseModel gap;
  gap.groups = {{0}};
  gap.variances = {1.0};
  CHECK_THROWS_AS(gap.diagonal(2), PartitionError);
}

TEST_CASE("grouping inference splits at the largest variance gaps") {
  SUBCASE("k = 1 pools everything") {
    const Eigen::MatrixXd res = oracles::random_matrix(12, 4, 3);
    const Grouping g = infer_grouping(fit_with_residuals(res), 1);
    REQUIRE(g.groups.size() == 1);
    CHECK(g.groups[0] == std::vector<int>{0, 1, 2, 3});
    CHECK_FALSE(g.reduced);
  }

  SUBCASE("two variance levels split into the matching pairs") {
    Eigen::MatrixXd res(9, 4);
    res.col(0).setConstant(std::sqrt(0.5));
    res.col(1).setConstant(std::sqrt(0.5));
    res.col(2).setConstant(std::sqrt(0.8));
    res.col(3).setConstant(std::sqrt(0.8));
    const Grouping g = infer_grouping(fit_with_residuals(res), 2);
    REQUIRE(g.groups.size() == 2);
    CHECK(g.groups[0] == std::vector<int>{0, 1});
    CHECK(g.groups[1] == std::vector<int>{2, 3});
    CHECK_FALSE(g.reduced);
  }

  SUBCASE("identical variances cannot support a second group") {
    const Eigen::MatrixXd res = Eigen::MatrixXd::Ones(6, 4);
    const Grouping g = infer_grouping(fit_with_residuals(res), 2);
    REQUIRE(g.groups.size() == 1);
    CHECK(g.groups[0] == std::vector<int>{0, 1, 2, 3});
    CHECK(g.reduced);
  }

  SUBCASE("k outside [1, p] is rejected") {
    const Eigen::MatrixXd res = Eigen::MatrixXd::Ones(6, 4);
    CHECK_THROWS_AS(infer_grouping(fit_with_residuals(res), 0),
                    PartitionError);
    CHECK_THROWS_AS(infer_grouping(fit_with_residuals(res), 5),
                    PartitionError);
  }

  SUBCASE("inferred groups always satisfy the partition contract") {
    const Eigen::MatrixXd res = oracles::random_matrix(40, 7, 99);
    for (int k = 1; k <= 7; ++k) {
      const Grouping g =
          infer_grouping(fit_with_residuals(res), k);
      CHECK_NOTHROW(
          estimate_noise_variances(fit_with_residuals(res), g.groups));
    }
  }
}

TEST_CASE("covariance assembly reproduces a worked two-coordinate example") {
  // Sample covariance diag(3, 1): sign-symmetric rows make the cross terms
  // cancel exactly.
  const double s = std::sqrt(3.0);
  Eigen::MatrixXd y(4, 2);
  y << s, 1, -s, 1, s, -1, -s, -1;
  const TimeSeriesPanel panel(y);

  Eigen::MatrixXd a_hat(2, 1);
  a_hat << 1, 0;
  FactorModelFit f;
  f.a_hat = a_hat;

  NoiseModel noise;
  noise.groups = {{0, 1}};
  noise.variances = {1.0};

  const CovarianceEstimates est = estimate_covariances(f, panel, noise);
  REQUIRE(est.sigma_x_hat.rows() == 1);
  CHECK(est.sigma_x_hat(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

  Eigen::MatrixXd expected_y(2, 2);
  expected_y << 3, 0, 0, 1;
  CHECK((est.sigma_y_hat - expected_y).norm() <= 1e-12);

  Eigen::MatrixXd expected_p(2, 2);
  expected_p << 1.0 / 3.0, 0, 0, 1;
  CHECK((est.precision_hat - expected_p).norm() <= 1e-12);
}

TEST_CASE("with no factors the model collapses to the noise diagonal") {
  const TimeSeriesPanel panel(oracles::random_matrix(15, 3, 4));
  FactorModelFit f;  // empty loading, r = 0

  NoiseModel noise;
  noise.groups = {{0, 1, 2}};
  noise.variances = {0.5};

  const CovarianceEstimates est = estimate_covariances(f, panel, noise);
  CHECK(est.sigma_x_hat.size() == 0);
  CHECK((est.sigma_y_hat - 0.5 * Eigen::MatrixXd::Identity(3, 3)).norm() ==
        0.0);
  CHECK((est.precision_hat - 2.0 * Eigen::MatrixXd::Identity(3, 3)).norm() ==
        0.0);
}

TEST_CASE("assembly rejects a loading of the wrong height") {
  const TimeSeriesPanel panel(oracles::random_matrix(15, 3, 4));
  FactorModelFit f;
  f.a_hat = Eigen::MatrixXd::Identity(4, 2);
  NoiseModel noise;
  noise.groups = {{0, 1, 2}};
  noise.variances = {1.0};
  CHECK_THROWS_AS(assemble_sigma_y(f, panel, noise), DimensionError);
}

TEST_CASE("structured precision multiplies back to the identity") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const long p = 10 + static_cast<long>(seed) * 9;  // up to 100
    const long r = 1 + static_cast<long>(seed % 5);
    const Eigen::MatrixXd loading = oracles::random_orthonormal(p, r, seed);
    Eigen::MatrixXd sigma_x = oracles::random_psd(r, seed + 100);
    sigma_x.diagonal().array() += 0.5;
    std::vector<double> variances = {0.3 + 0.05 * static_cast<double>(seed)};
    const CovarianceEstimates est =
        manual_estimates(loading, sigma_x, variances, p);
    const Eigen::MatrixXd precision = precision_woodbury(est);
    const double err = (est.sigma_y_hat * precision -
                        Eigen::MatrixXd::Identity(p, p))
                           .cwiseAbs()
                           .maxCoeff();
    CHECK(err <= 1e-6);
    CHECK((precision - precision.transpose()).norm() <= 1e-12);
  }
}

TEST_CASE("precision is invariant to loading sign flips") {
  const long p = 12, r = 3;
  const Eigen::MatrixXd loading = oracles::random_orthonormal(p, r, 8);
  Eigen::MatrixXd sigma_x = oracles::random_psd(r, 9);
  sigma_x.diagonal().array() += 1.0;
  const CovarianceEstimates base =
      manual_estimates(loading, sigma_x, {0.7}, p);

  Eigen::MatrixXd flipped = loading;
  flipped.col(1) = -flipped.col(1);
  Eigen::MatrixXd sigma_x_flipped = sigma_x;
  sigma_x_flipped.row(1) = -sigma_x_flipped.row(1);
  sigma_x_flipped.col(1) = -sigma_x_flipped.col(1);
  const CovarianceEstimates alt =
      manual_estimates(flipped, sigma_x_flipped, {0.7}, p);

  CHECK((base.sigma_y_hat - alt.sigma_y_hat).norm() <= 1e-12);
  CHECK((precision_woodbury(base) - precision_woodbury(alt)).norm() <= 1e-10);
}

TEST_CASE("precision construction rejects unusable inputs") {
  const long p = 6;
  const Eigen::MatrixXd loading = oracles::random_orthonormal(p, 2, 5);

  SUBCASE("non-positive noise variance") {
    Eigen::MatrixXd sigma_x = Eigen::MatrixXd::Identity(2, 2);
    CovarianceEstimates est = manual_estimates(loading, sigma_x, {1.0}, p);
    est.noise.variances = {0.0};
    CHECK_THROWS_AS(precision_woodbury(est), NoiseModelError);
  }

  SUBCASE("ill-conditioned factor covariance") {
    Eigen::MatrixXd sigma_x(2, 2);
    sigma_x << 1.0, 0.0, 0.0, 1e-15;
    const CovarianceEstimates est =
        manual_estimates(loading, sigma_x, {1.0}, p);
    CHECK_THROWS_AS(precision_woodbury(est), ConditioningError);
  }

  SUBCASE("exactly singular factor covariance") {
    Eigen::MatrixXd sigma_x = Eigen::MatrixXd::Zero(2, 2);
    sigma_x(0, 0) = 1.0;
    const CovarianceEstimates est =
        manual_estimates(loading, sigma_x, {1.0}, p);
    CHECK_THROWS_AS(precision_woodbury(est), ConditioningError);
  }
}

TEST_CASE("end-to-end estimates agree with a dense-inverse oracle") {
  const TimeSeriesPanel panel(oracles::random_matrix(120, 8, 2024));
  const FactorModelFit f = fit(panel, 2, 1);
  const Grouping g = infer_grouping(f, 2);
  const NoiseModel noise = estimate_noise_variances(f, g.groups);
  const CovarianceEstimates est = estimate_covariances(f, panel, noise);

  CHECK((est.sigma_y_hat - est.sigma_y_hat.transpose()).norm() <= 1e-12);
  const Eigen::MatrixXd dense = est.sigma_y_hat.fullPivLu().inverse();
  CHECK((est.precision_hat - dense).norm() <= 1e-8 * dense.norm());
}
