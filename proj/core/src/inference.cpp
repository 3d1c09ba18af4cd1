#include "shapegam/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "linalg.hpp"

namespace shapegam {

namespace {

constexpr double kRankTol = 1e-9;

double two_sided_p(double stat, std::optional<double> df) {
  const double a = std::abs(stat);
  if (!std::isfinite(a)) return 0.0;
  if (df) {
    const boost::math::students_t dist(*df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, a)));
  }
  const boost::math::normal dist;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, a)));
}

Eigen::VectorXd null_eta(const FitResult& fit) {
  const CompositeCone& cone = *fit.cone;
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(fit.n(), fit.intercept);
  for (std::size_t k = 0; k < cone.z_cols.size(); ++k) {
    eta += fit.alpha_hat[static_cast<Eigen::Index>(k)] * cone.linear_basis.col(cone.z_cols[k]);
  }
  return eta;
}

}  // namespace

double estimate_sigma2(double ssr, Eigen::Index n, Eigen::Index d0, Eigen::Index active, double c) {
  if (!(c >= 1.0 && c <= 2.0)) {
    throw InvalidInput("c must lie in [1, 2], got " + std::to_string(c));
  }
  const double edf = static_cast<double>(active + d0);
  const double denom = static_cast<double>(n) - static_cast<double>(d0) - c * edf;
  if (!(denom > 0.0)) {
    throw InvalidInput("n - d0 - c*EDF = " + std::to_string(denom) +
                       " is not positive; use fewer knots or a smaller c");
  }
  return ssr / denom;
}

double estimate_sigma2(const FitResult& fit, double c) {
  if (fit.family.kind() != FamilyKind::Gaussian) {
    throw InvalidInput("the variance estimate applies to Gaussian fits only");
  }
  return estimate_sigma2(fit.residual_deviance, fit.n(), fit.d0,
                         static_cast<Eigen::Index>(fit.active_set.size()), c);
}

CoefTable coef_table(const FitResult& fit) {
  CoefTable table;
  const CompositeCone& cone = *fit.cone;
  const bool gaussian = fit.family.kind() == FamilyKind::Gaussian;
  table.statistic = gaussian ? "t" : "z";
  if (cone.z_cols.empty()) return table;

  const Eigen::Index n = fit.n();
  std::vector<Eigen::Index> x0_cols;
  for (Eigen::Index j = 1; j < cone.linear_basis.cols(); ++j) {
    if (std::find(cone.z_cols.begin(), cone.z_cols.end(), j) == cone.z_cols.end()) {
      x0_cols.push_back(j);
    }
  }
  const auto nj = static_cast<Eigen::Index>(fit.active_set.size());
  Eigen::MatrixXd face(n, nj + static_cast<Eigen::Index>(x0_cols.size()));
  for (Eigen::Index k = 0; k < nj; ++k) {
    face.col(k) = cone.raw_edges.col(fit.active_set[static_cast<std::size_t>(k)]);
  }
  for (std::size_t k = 0; k < x0_cols.size(); ++k) {
    face.col(nj + static_cast<Eigen::Index>(k)) = cone.linear_basis.col(x0_cols[k]);
  }

  std::vector<std::string> names{"(Intercept)"};
  names.insert(names.end(), cone.z_names.begin(), cone.z_names.end());
  const auto p = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd zt(n, p);
  zt.col(0).setOnes();
  for (std::size_t k = 0; k < cone.z_cols.size(); ++k) {
    zt.col(static_cast<Eigen::Index>(k) + 1) = cone.linear_basis.col(cone.z_cols[k]);
  }

  const Eigen::VectorXd sw = fit.weights.cwiseSqrt();
  const Eigen::MatrixXd q = detail::orthonormal_columns(sw.asDiagonal() * face, kRankTol);
  const Eigen::MatrixXd rz = detail::residualize(Eigen::MatrixXd(sw.asDiagonal() * zt), q);
  const Eigen::VectorXd rr =
      detail::residualize(Eigen::VectorXd(fit.working_response.cwiseProduct(sw)), q);

  for (Eigen::Index k = 1; k <= p; ++k) {
    if (detail::numerical_rank(rz.leftCols(k), kRankTol) < k) {
      const std::string& name = names[static_cast<std::size_t>(k - 1)];
      throw RankError("covariate '" + name + "' is collinear with the fitted face", name);
    }
  }
  const Eigen::MatrixXd g = rz.transpose() * rz;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  const Eigen::VectorXd estimate = ldlt.solve(rz.transpose() * rr);
  const Eigen::MatrixXd ginv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));

  if (gaussian) {
    if (!fit.sigma2_hat) {
      throw InvalidInput("no variance estimate: n - d0 - c*EDF is not positive");
    }
    table.dispersion = *fit.sigma2_hat;
    table.df = std::floor(static_cast<double>(n) - static_cast<double>(fit.d0) - fit.c * fit.edf);
  }
  table.covariance = ginv * table.dispersion;
  for (Eigen::Index k = 0; k < p; ++k) {
    CoefRow row;
    row.name = names[static_cast<std::size_t>(k)];
    row.estimate = estimate[k];
    row.std_error = std::sqrt(std::max(0.0, table.covariance(k, k)));
    row.statistic = row.estimate / row.std_error;
    row.p_value = two_sided_p(row.statistic, table.df);
    table.rows.push_back(std::move(row));
  }
  return table;
}

Deviances deviances(const FitResult& fit) { return {fit.null_deviance, fit.residual_deviance}; }

double log_likelihood(const FitResult& fit) {
  const auto n = static_cast<double>(fit.n());
  if (fit.family.kind() == FamilyKind::Gaussian) {
    return -0.5 * n * std::log(fit.residual_deviance / n);
  }
  return -fit.family.negloglik(fit.y, fit.eta_hat);
}

double cic_value(double loglik, Eigen::Index n, Eigen::Index d0, double e0_edf) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d0);
  const double denom = nn - dd - 1.5 * e0_edf;
  if (!(denom > 0.0)) {
    throw InvalidInput("n - d0 - 1.5*E0(EDF) = " + std::to_string(denom) +
                       " is not positive; the information criterion is undefined");
  }
  return -2.0 / nn * loglik + std::log(2.0 * (e0_edf + dd) / denom + 1.0);
}

CicResult simulate_cic(const FitResult& fit, const CicOptions& options,
                       const FitOptions& fit_options) {
  if (options.nsim < 1) throw InvalidInput("nsim must be at least 1");
  const Eigen::VectorXd eta0 = null_eta(fit);
  const Family family = fit.family;
  const Eigen::VectorXd mu0 = family.mean(eta0);
  double sd = 0.0;
  if (family.kind() == FamilyKind::Gaussian) {
    const double s2 = fit.sigma2_hat.value_or(
        fit.residual_deviance / std::max(1.0, static_cast<double>(fit.n()) - fit.edf));
    sd = std::sqrt(s2);
  }

  const auto nsim = static_cast<std::size_t>(options.nsim);
  std::vector<double> edf(nsim, 0.0);
  std::vector<char> ok(nsim, 0);
  auto run = [&](std::size_t rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(rep)};
    std::mt19937_64 rng(seq);
    Eigen::VectorXd y(fit.n());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      switch (family.kind()) {
        case FamilyKind::Gaussian:
          y[i] = mu0[i] + sd * std::normal_distribution<double>(0.0, 1.0)(rng);
          break;
        case FamilyKind::Poisson:
          y[i] = mu0[i] > 0.0
                     ? static_cast<double>(std::poisson_distribution<long long>(mu0[i])(rng))
                     : 0.0;
          break;
        case FamilyKind::Binomial:
          y[i] = std::bernoulli_distribution(mu0[i])(rng) ? 1.0 : 0.0;
          break;
      }
    }
    try {
      edf[rep] = fit_model(y, family, fit.cone, fit_options).edf;
      ok[rep] = 1;
    } catch (const Error&) {
      ok[rep] = 0;
    }
  };

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min<int>(threads, options.nsim);
  if (threads <= 1) {
    for (std::size_t r = 0; r < nsim; ++r) run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < nsim; r = next++) run(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  CicResult out;
  out.nsim = options.nsim;
  out.seed = options.seed;
  double total = 0.0;
  int good = 0;
  for (std::size_t r = 0; r < nsim; ++r) {
    if (ok[r]) {
      total += edf[r];
      ++good;
    }
  }
  out.failed = options.nsim - good;
  if (good == 0 || 5 * out.failed >= options.nsim) {
    throw Error(std::to_string(out.failed) + " of " + std::to_string(options.nsim) +
                " null replicates failed to fit");
  }
  out.e0_edf = total / good;
  out.loglik = log_likelihood(fit);
  out.cic = cic_value(out.loglik, fit.n(), fit.d0, out.e0_edf);
  return out;
}

}  // namespace shapegam
