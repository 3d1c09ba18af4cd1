#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/gam.hpp"

namespace shapegam {

/// SSR / (n - d0 - c EDF) with EDF = active + d0. Throws InvalidInput when
/// c is outside [1, 2] or the denominator is not positive.
double estimate_sigma2(double ssr, Eigen::Index n, Eigen::Index d0, Eigen::Index active, double c);

/// Same, from a Gaussian fit.
double estimate_sigma2(const FitResult& fit, double c);

struct CoefRow {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
};

struct CoefTable {
  /// Intercept first, then covariates. Empty when the model has no covariates.
  std::vector<CoefRow> rows;
  Eigen::MatrixXd covariance;
  double dispersion = 1.0;
  /// "t" (Gaussian) or "z".
  std::string statistic = "t";
  /// Degrees of freedom for t statistics: floor(n - d0 - c EDF).
  std::optional<double> df;
};

/// Estimates, standard errors and two-sided p-values for the intercept and
/// covariates, treating the active face of the cone as fixed. Throws
/// RankError naming a covariate that is collinear with the face.
CoefTable coef_table(const FitResult& fit);

struct Deviances {
  double null_deviance = 0.0;
  double residual_deviance = 0.0;
};

Deviances deviances(const FitResult& fit);

/// Maximized log-likelihood used by the information criterion:
/// -(n/2) log(SSR/n) for Gaussian fits, sum(y eta - b(eta)) otherwise.
double log_likelihood(const FitResult& fit);

/// -(2/n) logL + log(2 (e0_edf + d0) / (n - d0 - 1.5 e0_edf) + 1).
/// Throws InvalidInput when the denominator is not positive.
double cic_value(double loglik, Eigen::Index n, Eigen::Index d0, double e0_edf);

struct CicOptions {
  int nsim = 100;
  std::uint64_t seed = 0;
  /// Worker threads for replicates; 0 picks the hardware concurrency.
  int threads = 1;
};

struct CicResult {
  double cic = 0.0;
  double e0_edf = 0.0;
  double loglik = 0.0;
  int nsim = 0;
  int failed = 0;
  std::uint64_t seed = 0;
};

/// Simulates the null model (every shape component zero, covariates at
/// their fitted values), refits the full model nsim times and averages the
/// EDF. Results do not depend on the thread count.
CicResult simulate_cic(const FitResult& fit, const CicOptions& options = {},
                       const FitOptions& fit_options = {});

}  // namespace shapegam
