#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "shapegam/inference.hpp"

namespace {

using namespace shapegam;
using shapegam::testing::component_for;
using shapegam::testing::make_cone;
using shapegam::testing::Rng;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(EstimateSigma2, DirectEvaluation) {
  EXPECT_DOUBLE_EQ(estimate_sigma2(186.0, 100, 1, 4, 1.2), 2.0);
  EXPECT_DOUBLE_EQ(estimate_sigma2(50.0, 27, 1, 0, 1.0), 2.0);
}

TEST(EstimateSigma2, RejectsBadArguments) {
  EXPECT_THROW(estimate_sigma2(1.0, 100, 1, 4, 0.9), InvalidInput);
  EXPECT_THROW(estimate_sigma2(1.0, 100, 1, 4, 2.1), InvalidInput);
  EXPECT_THROW(estimate_sigma2(1.0, 10, 1, 8, 1.2), InvalidInput);
}

TEST(CoefTable, ReducesToOrdinaryLeastSquares) {
  Rng rng(1);
  const int n = 40;
  MatrixXd z(n, 2);
  z.col(0) = rng.normal_vector(n);
  z.col(1) = rng.normal_vector(n);
  const VectorXd y = 1.0 + 2.0 * z.col(0).array() - z.col(1).array() + rng.normal_vector(n).array();
  const auto cone = std::make_shared<const CompositeCone>(assemble_cone({}, z, {"a", "b"}));
  const FitResult fit = fit_gaussian(y, cone);
  const CoefTable t = coef_table(fit);

  MatrixXd x(n, 3);
  x << VectorXd::Ones(n), z;
  const VectorXd beta = x.colPivHouseholderQr().solve(y);
  const double s2 = (y - x * beta).squaredNorm() / (n - 3 - 1.2 * 3);
  const MatrixXd cov = s2 * (x.transpose() * x).inverse();
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].name, "(Intercept)");
  EXPECT_EQ(t.rows[2].name, "b");
  EXPECT_EQ(t.statistic, "t");
  EXPECT_DOUBLE_EQ(*t.df, std::floor(n - 3 - 1.2 * 3));
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(t.rows[static_cast<std::size_t>(k)].estimate, beta[k], 1e-10);
    EXPECT_NEAR(t.rows[static_cast<std::size_t>(k)].std_error, std::sqrt(cov(k, k)), 1e-10);
  }
  EXPECT_GT(t.rows[1].statistic, 5.0);
  EXPECT_LT(t.rows[1].p_value, 1e-5);
}

TEST(CoefTable, ExactRecoveryWithoutNoise) {
  const int n = 30;
  std::vector<double> x(n);
  MatrixXd z(n, 1);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = i;
    z(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
    y[i] = (i / 10) + 1.5 * z(i, 0);
  }
  const FitResult fit = fit_gaussian(y, make_cone({component_for(Shape::Incr, x)}, z, {"z"}));
  const CoefTable t = coef_table(fit);
  EXPECT_NEAR(t.rows[1].estimate, 1.5, 1e-10);
  EXPECT_LT(t.rows[1].std_error, 1e-6);
}

TEST(CoefTable, EmptyWithoutCovariates) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const FitResult fit = fit_gaussian(vec({1, 3, 2, 5, 4}), make_cone({component_for(Shape::Incr, x)}));
  EXPECT_TRUE(coef_table(fit).rows.empty());
}

TEST(CoefTable, NonGaussianUsesNormal) {
  Rng rng(2);
  const int n = 60;
  const std::vector<double> x = rng.uniform_sorted(n, 0, 1);
  MatrixXd z = rng.normal_vector(n);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::poisson_distribution<int>(std::exp(x[static_cast<std::size_t>(i)] + 0.3 * z(i, 0)))(rng.engine());
  const FitResult fit = fit_irls(y, Family::poisson(), make_cone({component_for(Shape::SIncr, x)}, z, {"z"}));
  const CoefTable t = coef_table(fit);
  EXPECT_EQ(t.statistic, "z");
  EXPECT_FALSE(t.df.has_value());
  EXPECT_EQ(t.dispersion, 1.0);
}

TEST(CoefTable, InvariantToEdgeScaling) {
  Rng rng(3);
  const int n = 50;
  const std::vector<double> x = rng.uniform_sorted(n, 0, 1);
  MatrixXd z = rng.normal_vector(n);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::sqrt(x[static_cast<std::size_t>(i)]) + 0.5 * z(i, 0) + rng.normal(0, 0.3);
  ConeComponent c = component_for(Shape::SIncr, x);
  const FitResult a = fit_gaussian(y, make_cone({c}, z, {"z"}));
  c.edges *= 10.0;
  const FitResult b = fit_gaussian(y, make_cone({c}, z, {"z"}));
  EXPECT_LT((a.eta_hat - b.eta_hat).cwiseAbs().maxCoeff(), 1e-9);
  const CoefTable ta = coef_table(a);
  const CoefTable tb = coef_table(b);
  for (std::size_t k = 0; k < ta.rows.size(); ++k) {
    EXPECT_NEAR(ta.rows[k].estimate, tb.rows[k].estimate, 1e-9);
    EXPECT_NEAR(ta.rows[k].std_error, tb.rows[k].std_error, 1e-9);
  }
}

TEST(Deviances, GaussianNull) {
  const std::vector<double> x{1, 2, 3};
  const FitResult fit = fit_gaussian(vec({1, 2, 3}), make_cone({component_for(Shape::Incr, x)}));
  EXPECT_NEAR(deviances(fit).null_deviance, 2.0, 1e-12);
  EXPECT_NEAR(deviances(fit).residual_deviance, 0.0, 1e-12);
}

TEST(Deviances, SaturatedPoisson) {
  EXPECT_NEAR(Family::poisson().deviance(vec({0, 1, 4}), vec({0, 1, 4})), 0.0, 1e-12);
}

TEST(Deviances, BinomialInterceptOnly) {
  const VectorXd y = vec({1, 0, 0, 1, 1, 1, 0, 1});
  const auto cone = std::make_shared<const CompositeCone>(assemble_cone({}, MatrixXd(8, 0)));
  const FitResult fit = fit_irls(y, Family::binomial(), cone);
  const double p = y.mean();
  const double loglik = 8 * (p * std::log(p) + (1 - p) * std::log(1 - p));
  EXPECT_NEAR(deviances(fit).residual_deviance, -2.0 * loglik, 1e-8);
  EXPECT_NEAR(deviances(fit).null_deviance, -2.0 * loglik, 1e-8);
}

TEST(Deviances, NestedConesDoNotIncreaseDeviance) {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<double> x = rng.uniform_sorted(40, 0, 1);
    VectorXd y = rng.normal_vector(40);
    for (int i = 0; i < 40; ++i) y[i] += std::sin(4 * x[static_cast<std::size_t>(i)]);
    // Increasing-concave functions are a subset of increasing ones on the
    // same ordinal levels.
    const FitResult a = fit_gaussian(y, make_cone({component_for(Shape::IncrConc, x)}));
    const FitResult b = fit_gaussian(y, make_cone({component_for(Shape::Incr, x)}));
    EXPECT_LE(b.residual_deviance, a.residual_deviance + 1e-8);
  }
}

TEST(Cic, DirectEvaluation) {
  EXPECT_NEAR(cic_value(-10.0, 20, 1, 3.0), 1.0 + std::log(8.0 / 14.5 + 1.0), 1e-12);
  EXPECT_THROW(cic_value(-10.0, 5, 1, 3.0), InvalidInput);
}

TEST(Cic, LogLikelihoodConventions) {
  const std::vector<double> x{1, 2, 3, 4};
  const FitResult fit = fit_gaussian(vec({1, 3, 2, 5}), make_cone({component_for(Shape::Incr, x)}));
  EXPECT_NEAR(log_likelihood(fit), -2.0 * std::log(fit.residual_deviance / 4.0), 1e-12);
}

struct CicFixture {
  FitResult fit;
  Eigen::Index edges = 0;
};

CicFixture cic_fixture(FamilyKind kind) {
  Rng rng(5);
  const int n = 50;
  const std::vector<double> x = rng.uniform_sorted(n, 0, 1);
  MatrixXd z = rng.normal_vector(n);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double eta = x[static_cast<std::size_t>(i)] + 0.2 * z(i, 0);
    y[i] = kind == FamilyKind::Gaussian ? eta + rng.normal(0, 0.3)
                                        : std::poisson_distribution<int>(std::exp(eta))(rng.engine());
  }
  const auto cone = make_cone({component_for(Shape::SIncr, x)}, z, {"z"});
  return {fit_model(y, Family(kind), cone), cone->num_edges()};
}

TEST(Cic, DeterministicAcrossRunsAndThreads) {
  for (FamilyKind kind : {FamilyKind::Gaussian, FamilyKind::Poisson}) {
    const CicFixture f = cic_fixture(kind);
    CicOptions opt;
    opt.nsim = 30;
    opt.seed = 7;
    const CicResult a = simulate_cic(f.fit, opt);
    const CicResult b = simulate_cic(f.fit, opt);
    opt.threads = 3;
    const CicResult c = simulate_cic(f.fit, opt);
    EXPECT_EQ(a.cic, b.cic);
    EXPECT_EQ(a.e0_edf, b.e0_edf);
    EXPECT_EQ(a.cic, c.cic);
    EXPECT_EQ(a.e0_edf, c.e0_edf);
    EXPECT_GE(a.e0_edf, static_cast<double>(f.fit.d0));
    EXPECT_LE(a.e0_edf, static_cast<double>(f.fit.d0 + f.edges));
    opt.seed = 8;
    EXPECT_NE(simulate_cic(f.fit, opt).e0_edf, a.e0_edf);
  }
}

TEST(Cic, NoEdgesGivesLinearDimension) {
  Rng rng(6);
  MatrixXd z = rng.normal_vector(30);
  const auto cone = std::make_shared<const CompositeCone>(assemble_cone({}, z, {"z"}));
  const FitResult fit = fit_gaussian(rng.normal_vector(30), cone);
  CicOptions opt;
  opt.nsim = 10;
  const CicResult r = simulate_cic(fit, opt);
  EXPECT_EQ(r.e0_edf, 2.0);
  EXPECT_EQ(r.failed, 0);
}

}  // namespace
