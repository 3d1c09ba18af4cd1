#include "shapegam/wps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "linalg.hpp"

namespace shapegam {

namespace {

constexpr double kRankTol = 1e-10;

void check_grid(int k1, int k2) {
  if (k1 < 2 || k2 < 2) {
    throw InvalidInput("warped-plane knots need k1, k2 >= 2, got " + std::to_string(k1) + ", " +
                       std::to_string(k2));
  }
}

Eigen::Index product_col(int k1, int k2, int a, int b) {
  return 1 + (k1 - 1) + (k2 - 1) + static_cast<Eigen::Index>(a - 1) * (k2 - 1) + (b - 1);
}

// Interval index and upper weight of x among the knots.
std::pair<int, double> locate(const std::vector<double>& t, double x) {
  const int k = static_cast<int>(t.size());
  int a = static_cast<int>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
  a = std::clamp(a, 0, k - 2);
  return {a, (x - t[static_cast<std::size_t>(a)]) /
                 (t[static_cast<std::size_t>(a) + 1] - t[static_cast<std::size_t>(a)])};
}

void check_knot_sequence(const KnotSequence& k, const char* which) {
  if (k.count() < 2) throw InvalidInput(std::string(which) + " needs at least 2 knots");
  for (std::size_t i = 1; i < k.count(); ++i) {
    if (!(k.knots[i] > k.knots[i - 1])) {
      throw InvalidInput(std::string(which) + " knots must be strictly increasing");
    }
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::vector<std::string> empty_cells(const WpsDesign& d, std::span<const double> x1,
                                     std::span<const double> x2) {
  const int k1 = d.k1(), k2 = d.k2();
  std::vector<int> count(static_cast<std::size_t>((k1 - 1) * (k2 - 1)), 0);
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const int a = locate(d.knots1.knots, x1[i]).first;
    const int b = locate(d.knots2.knots, x2[i]).first;
    ++count[static_cast<std::size_t>(a * (k2 - 1) + b)];
  }
  std::vector<std::string> out;
  for (int a = 0; a + 1 < k1; ++a) {
    for (int b = 0; b + 1 < k2; ++b) {
      if (count[static_cast<std::size_t>(a * (k2 - 1) + b)] == 0) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
        out.push_back("[" + fmt(d.knots1.knots[ua]) + ", " + fmt(d.knots1.knots[ua + 1]) + "] x [" +
                      fmt(d.knots2.knots[ub]) + ", " + fmt(d.knots2.knots[ub + 1]) + "]");
      }
    }
  }
  return out;
}

}  // namespace

std::string_view direction_name(WpsDirection d) noexcept {
  switch (d) {
    case WpsDirection::II: return "ii";
    case WpsDirection::DD: return "dd";
    case WpsDirection::DI: return "di";
  }
  return "ii";
}

std::optional<WpsDirection> parse_direction(std::string_view name) noexcept {
  if (name == "ii") return WpsDirection::II;
  if (name == "dd") return WpsDirection::DD;
  if (name == "di") return WpsDirection::DI;
  return std::nullopt;
}

Eigen::MatrixXd wps_basis(std::span<const double> x1, std::span<const double> x2,
                          const KnotSequence& knots1, const KnotSequence& knots2) {
  check_knot_sequence(knots1, "x1");
  check_knot_sequence(knots2, "x2");
  if (x1.size() != x2.size()) throw InvalidInput("x1 and x2 differ in length");
  const int k1 = static_cast<int>(knots1.count()), k2 = static_cast<int>(knots2.count());
  const auto n = static_cast<Eigen::Index>(x1.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k1) * k2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v1 = x1[static_cast<std::size_t>(i)], v2 = x2[static_cast<std::size_t>(i)];
    if (!(v1 >= knots1.front() && v1 <= knots1.back() && v2 >= knots2.front() &&
          v2 <= knots2.back())) {
      throw InvalidInput("point (" + fmt(v1) + ", " + fmt(v2) + ") lies outside the knot rectangle");
    }
    const auto [a, w1] = locate(knots1.knots, v1);
    const auto [b, w2] = locate(knots2.knots, v2);
    Eigen::VectorXd h1 = Eigen::VectorXd::Zero(k1), h2 = Eigen::VectorXd::Zero(k2);
    h1[a] = 1.0 - w1;
    h1[a + 1] = w1;
    h2[b] = 1.0 - w2;
    h2[b + 1] = w2;
    out(i, 0) = 1.0;
    for (int l = 1; l < k1; ++l) out(i, l) = h1[l];
    for (int l = 1; l < k2; ++l) out(i, k1 - 1 + l) = h2[l];
    for (int l1 = 1; l1 < k1; ++l1) {
      for (int l2 = 1; l2 < k2; ++l2) out(i, product_col(k1, k2, l1, l2)) = h1[l1] * h2[l2];
    }
  }
  return out;
}

Eigen::MatrixXd wps_knot_values(int k1, int k2) {
  check_grid(k1, k2);
  const Eigen::Index p = static_cast<Eigen::Index>(k1) * k2;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
  for (int a = 0; a < k1; ++a) {
    for (int b = 0; b < k2; ++b) {
      const Eigen::Index row = static_cast<Eigen::Index>(a) * k2 + b;
      m(row, 0) = 1.0;
      if (a >= 1) m(row, a) = 1.0;
      if (b >= 1) m(row, k1 - 1 + b) = 1.0;
      if (a >= 1 && b >= 1) m(row, product_col(k1, k2, a, b)) = 1.0;
    }
  }
  return m;
}

Eigen::MatrixXd wps_constraint_matrix(int k1, int k2, WpsDirection direction) {
  const Eigen::MatrixXd m = wps_knot_values(k1, k2);
  const double s1 = direction == WpsDirection::II ? 1.0 : -1.0;
  const double s2 = direction == WpsDirection::DD ? -1.0 : 1.0;
  Eigen::MatrixXd a(2 * k1 * k2 - k1 - k2, m.cols());
  Eigen::Index r = 0;
  for (int i = 0; i + 1 < k1; ++i) {
    for (int j = 0; j < k2; ++j) {
      a.row(r++) = s1 * (m.row((i + 1) * k2 + j) - m.row(i * k2 + j));
    }
  }
  for (int i = 0; i < k1; ++i) {
    for (int j = 0; j + 1 < k2; ++j) {
      a.row(r++) = s2 * (m.row(i * k2 + j + 1) - m.row(i * k2 + j));
    }
  }
  return a;
}

Eigen::MatrixXd wps_penalty_matrix(const KnotSequence& knots1, const KnotSequence& knots2) {
  check_knot_sequence(knots1, "x1");
  check_knot_sequence(knots2, "x2");
  const int k1 = static_cast<int>(knots1.count()), k2 = static_cast<int>(knots2.count());
  const Eigen::MatrixXd m = wps_knot_values(k1, k2);
  auto widths = [](const KnotSequence& k) {
    std::vector<double> h;
    const double span = k.back() - k.front();
    for (std::size_t i = 1; i < k.count(); ++i) h.push_back((k.knots[i] - k.knots[i - 1]) / span);
    return h;
  };
  const std::vector<double> h1 = widths(knots1), h2 = widths(knots2);
  const Eigen::Index rows = static_cast<Eigen::Index>(k1 - 2) * k2 + static_cast<Eigen::Index>(k2 - 2) * k1;
  Eigen::MatrixXd d(std::max<Eigen::Index>(rows, 0), m.cols());
  Eigen::Index r = 0;
  for (int i = 0; i + 2 < k1; ++i) {
    const double ha = h1[static_cast<std::size_t>(i)], hb = h1[static_cast<std::size_t>(i) + 1];
    for (int j = 0; j < k2; ++j) {
      const Eigen::RowVectorXd s_lo = (m.row((i + 1) * k2 + j) - m.row(i * k2 + j)) / ha;
      const Eigen::RowVectorXd s_hi = (m.row((i + 2) * k2 + j) - m.row((i + 1) * k2 + j)) / hb;
      d.row(r++) = (s_hi - s_lo) / std::sqrt(ha * hb);
    }
  }
  for (int i = 0; i < k1; ++i) {
    for (int j = 0; j + 2 < k2; ++j) {
      const double ha = h2[static_cast<std::size_t>(j)], hb = h2[static_cast<std::size_t>(j) + 1];
      const Eigen::RowVectorXd s_lo = (m.row(i * k2 + j + 1) - m.row(i * k2 + j)) / ha;
      const Eigen::RowVectorXd s_hi = (m.row(i * k2 + j + 2) - m.row(i * k2 + j + 1)) / hb;
      d.row(r++) = (s_hi - s_lo) / std::sqrt(ha * hb);
    }
  }
  return d;
}

WpsDesign make_wps_bases(std::span<const double> x1, std::span<const double> x2,
                         const KnotSequence& knots1, const KnotSequence& knots2,
                         WpsDirection direction) {
  WpsDesign d;
  d.knots1 = knots1;
  d.knots2 = knots2;
  d.direction = direction;
  d.basis = wps_basis(x1, x2, knots1, knots2);
  d.x1.assign(x1.begin(), x1.end());
  d.x2.assign(x2.begin(), x2.end());
  d.constraints = wps_constraint_matrix(d.k1(), d.k2(), direction);
  d.penalty = wps_penalty_matrix(knots1, knots2);
  d.z.resize(d.basis.rows(), 0);
  return d;
}

double gcv_score(double sse, double edfc, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  if (!(edfc < nn)) {
    throw InvalidInput("GCV needs edfc < n (edfc = " + fmt(edfc) + ", n = " + std::to_string(n) + ")");
  }
  const double f = 1.0 - edfc / nn;
  return sse / (f * f);
}

WpsFit fit_wps(const Eigen::VectorXd& y, WpsDesign design, double lambda, double c,
               const SolverOptions& solver) {
  const Eigen::Index n = design.basis.rows();
  if (y.size() != n) throw InvalidInput("response length does not match the design");
  if (!y.allFinite()) throw InvalidInput("response contains non-finite values");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
  if (!(c >= 1.0 && c <= 2.0)) throw InvalidInput("c must lie in [1, 2]");
  if (design.z.rows() != n) design.z.resize(n, 0);
  if (static_cast<Eigen::Index>(design.z_names.size()) != design.z.cols()) {
    throw InvalidInput("covariate names do not match the covariate columns");
  }

  const Eigen::Index pb = design.basis.cols();
  const Eigen::Index pz = design.z.cols();
  const Eigen::Index p = pb + pz;
  Eigen::MatrixXd x(n, p);
  x << design.basis, design.z;

  Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(design.penalty.rows(), p);
  pen.leftCols(pb) = design.penalty;
  Eigen::MatrixXd aug(n + pen.rows(), p);
  aug << x, std::sqrt(lambda) * pen;
  Eigen::VectorXd yaug = Eigen::VectorXd::Zero(aug.rows());
  yaug.head(n) = y;

  if (lambda == 0.0) {
    const std::vector<std::string> cells = empty_cells(design, design.x1, design.x2);
    if (!cells.empty()) {
      std::string list;
      for (const auto& cell : cells) list += (list.empty() ? "" : "; ") + cell;
      throw InvalidInput("empty knot cells with no penalty: " + list);
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> piv(aug.rows(), aug.cols());
  piv.setThreshold(kRankTol);
  piv.compute(aug);
  if (piv.rank() < p) {
    throw RankError("warped-plane design is rank deficient (rank " + std::to_string(piv.rank()) +
                    " of " + std::to_string(p) + "); use fewer knots or a positive penalty");
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(aug);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::VectorXd qty = (qr.householderQ().transpose() * yaug).head(p);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(design.constraints.rows(), p);
  a.leftCols(pb) = design.constraints;
  const auto rt = r.triangularView<Eigen::Upper>();
  const Eigen::MatrixXd ar = rt.transpose().solve(a.transpose()).transpose();
  const ConeProjectionResult proj = project_polyhedral(qty, ar, Eigen::MatrixXd(0, p), {}, solver);
  const Eigen::VectorXd gamma = rt.solve(proj.theta);

  WpsFit fit;
  fit.design = std::move(design);
  fit.y = y;
  fit.beta_hat = gamma.head(pb);
  fit.alpha_hat = gamma.tail(pz);
  fit.mu_hat = x * gamma;
  fit.unconstrained_mu = x * rt.solve(qty);
  fit.active_rows = proj.active_set;
  fit.lambda_used = lambda;
  fit.c = c;
  fit.sse = (y - fit.mu_hat).squaredNorm();

  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::MatrixXd m = xtx + lambda * pen.transpose() * pen;
  Eigen::MatrixXd nmat = Eigen::MatrixXd::Identity(p, p);
  if (!fit.active_rows.empty()) {
    Eigen::MatrixXd aj(static_cast<Eigen::Index>(fit.active_rows.size()), p);
    for (std::size_t k = 0; k < fit.active_rows.size(); ++k) {
      aj.row(static_cast<Eigen::Index>(k)) = a.row(fit.active_rows[k]);
    }
    nmat = detail::null_space(aj, kRankTol);
  }
  const Eigen::MatrixXd nmn = nmat.transpose() * m * nmat;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(nmn);
  const Eigen::MatrixXd g = ldlt.solve(Eigen::MatrixXd::Identity(nmn.rows(), nmn.cols()));
  const Eigen::MatrixXd nxxn = nmat.transpose() * xtx * nmat;
  fit.edfc = (g * nxxn).trace();
  fit.gcv = gcv_score(fit.sse, fit.edfc, n);

  const double d0 = 1.0 + static_cast<double>(pz);
  const double denom = static_cast<double>(n) - d0 - c * fit.edfc;
  if (denom > 0.0) {
    fit.sigma2_hat = fit.sse / denom;
  } else {
    fit.warnings.push_back("variance estimate unavailable: n - d0 - c*edfc is not positive");
  }

  fit.coefficients.statistic = "t";
  if (pz > 0 && fit.sigma2_hat) {
    // Covariance of the face-restricted estimator N G N' X'y.
    const Eigen::MatrixXd h = nmat * g * nmat.transpose();
    const Eigen::MatrixXd cov = h * xtx * h.transpose() * *fit.sigma2_hat;
    fit.coefficients.covariance = cov.bottomRightCorner(pz, pz);
    fit.coefficients.dispersion = *fit.sigma2_hat;
    fit.coefficients.df = std::floor(denom);
    const boost::math::students_t dist(*fit.coefficients.df);
    for (Eigen::Index k = 0; k < pz; ++k) {
      CoefRow row;
      row.name = fit.design.z_names[static_cast<std::size_t>(k)];
      row.estimate = fit.alpha_hat[k];
      row.std_error = std::sqrt(std::max(0.0, fit.coefficients.covariance(k, k)));
      row.statistic = row.estimate / row.std_error;
      row.p_value = std::isfinite(row.statistic)
                        ? std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(
                                              dist, std::abs(row.statistic))))
                        : 0.0;
      fit.coefficients.rows.push_back(std::move(row));
    }
  }
  return fit;
}

WpsFit fit_wps(const Eigen::VectorXd& y, std::span<const double> x1, std::span<const double> x2,
               const Eigen::MatrixXd& z, std::vector<std::string> z_names, WpsDirection direction,
               const WpsOptions& options) {
  if (x1.size() != x2.size() || static_cast<Eigen::Index>(x1.size()) != y.size()) {
    throw InvalidInput("response and predictors differ in length");
  }
  const KnotSequence k1 = default_knots(x1, options.numknots1, options.spacing1, BasisKind::Linear);
  const KnotSequence k2 = default_knots(x2, options.numknots2, options.spacing2, BasisKind::Linear);
  WpsDesign design = make_wps_bases(x1, x2, k1, k2, direction);
  design.z = z.cols() > 0 ? z : Eigen::MatrixXd(y.size(), 0);
  design.z_names = std::move(z_names);
  return fit_wps(y, std::move(design), options.lambda, options.c, options.solver);
}

WpsFit select_lambda(const Eigen::VectorXd& y, std::span<const double> x1,
                     std::span<const double> x2, const Eigen::MatrixXd& z,
                     std::vector<std::string> z_names, WpsDirection direction,
                     const WpsOptions& options, std::vector<double> lambda_grid, int threads) {
  if (lambda_grid.empty()) throw InvalidInput("lambda grid is empty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidInput("lambda values must be >= 0");
  }
  std::sort(lambda_grid.begin(), lambda_grid.end());
  lambda_grid.erase(std::unique(lambda_grid.begin(), lambda_grid.end()), lambda_grid.end());

  const std::size_t g = lambda_grid.size();
  std::vector<std::optional<WpsFit>> fits(g);
  std::vector<std::string> errors(g);
  auto run = [&](std::size_t i) {
    WpsOptions o = options;
    o.lambda = lambda_grid[i];
    try {
      fits[i] = fit_wps(y, x1, x2, z, z_names, direction, o);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  };
  int nthreads = threads > 0 ? threads
                             : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  nthreads = std::min<int>(nthreads, static_cast<int>(g));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < g; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < g; i = next++) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < g; ++i) {
    if (fits[i] && (!best || fits[i]->gcv < fits[*best]->gcv)) best = i;
  }
  if (!best) {
    std::string msg = "every lambda in the grid failed:";
    for (std::size_t i = 0; i < g; ++i) msg += " [" + fmt(lambda_grid[i]) + ": " + errors[i] + "]";
    throw InvalidInput(msg);
  }
  return std::move(*fits[*best]);
}

Eigen::VectorXd wps_surface(const WpsFit& fit, std::span<const double> x1,
                            std::span<const double> x2) {
  return wps_basis(x1, x2, fit.design.knots1, fit.design.knots2) * fit.beta_hat;
}

}  // namespace shapegam
