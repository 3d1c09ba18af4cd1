#include "nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shapegam::detail {

namespace {

std::vector<Eigen::Index> flagged(const std::vector<char>& flags) {
  std::vector<Eigen::Index> idx;
  for (std::size_t j = 0; j < flags.size(); ++j) {
    if (flags[j]) idx.push_back(static_cast<Eigen::Index>(j));
  }
  return idx;
}

Eigen::MatrixXd take_cols(const Eigen::MatrixXd& m,
                          const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(k) = m.col(idx[k]);
  return out;
}

// Solves the normal equations restricted to `idx`. Returns false when the
// Gram block is numerically singular.
bool passive_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& gr,
                   const std::vector<Eigen::Index>& idx, Eigen::VectorXd& z) {
  const auto p = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd sub(p, p);
  Eigen::VectorXd rhs(p);
  for (Eigen::Index a = 0; a < p; ++a) {
    rhs[a] = gr[idx[a]];
    for (Eigen::Index b = 0; b < p; ++b) sub(a, b) = gram(idx[a], idx[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) return false;
  z = llt.solve(rhs);
  return z.allFinite();
}

}  // namespace

NnlsResult solve_nnls(const Eigen::MatrixXd& g, const Eigen::VectorXd& r,
                      const NnlsOptions& options) {
  const Eigen::Index m = g.cols();
  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(m);
  if (m == 0) {
    out.converged = true;
    return out;
  }

  const Eigen::VectorXd col_norm = g.colwise().norm().transpose();
  const double max_norm = col_norm.maxCoeff();
  std::vector<char> usable(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    usable[j] = col_norm[j] > 1e-13 * max_norm && col_norm[j] > 0.0;
  }

  const Eigen::MatrixXd gram = g.transpose() * g;
  const Eigen::VectorXd gr = g.transpose() * r;

  std::vector<char> passive(m, 0);
  std::vector<char> rejected(m, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd resid = r;
  int iterations = 0;
  bool capped = false;

  auto normalized_gradient = [&](const Eigen::VectorXd& res) {
    Eigen::VectorXd w = g.transpose() * res;
    for (Eigen::Index j = 0; j < m; ++j) {
      w[j] = usable[j] ? w[j] / col_norm[j] : 0.0;
    }
    return w;
  };

  while (!capped) {
    const Eigen::VectorXd w = normalized_gradient(resid);
    Eigen::Index enter = -1;
    double best = options.enter_threshold;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (passive[j] || rejected[j] || !usable[j]) continue;
      if (w[j] > best) {
        best = w[j];
        enter = j;
      }
    }
    if (enter < 0) break;

    passive[enter] = 1;
    bool first_pass = true;
    bool progressed = false;
    while (true) {
      if (++iterations > options.max_iterations) {
        capped = true;
        break;
      }
      std::vector<Eigen::Index> idx = flagged(passive);
      Eigen::VectorXd z;
      if (!passive_solve(gram, gr, idx, z)) {
        // Entering column is numerically dependent on the passive set.
        passive[enter] = 0;
        rejected[enter] = 1;
        break;
      }
      bool all_positive = true;
      for (Eigen::Index k = 0; k < z.size(); ++k) {
        if (z[k] <= 0.0) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[k];
        progressed = true;
        break;
      }
      if (first_pass) {
        const auto pos = std::find(idx.begin(), idx.end(), enter) - idx.begin();
        if (z[pos] <= 0.0) {
          // Rounding-level gradient: the column cannot improve the fit.
          passive[enter] = 0;
          rejected[enter] = 1;
          break;
        }
      }
      first_pass = false;
      double alpha = std::numeric_limits<double>::infinity();
      Eigen::Index blocking = -1;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const Eigen::Index j = idx[k];
        if (z[k] <= 0.0) {
          const double denom = x[j] - z[k];
          const double a = denom > 0.0 ? x[j] / denom : 0.0;
          if (a < alpha) {
            alpha = a;
            blocking = j;
          }
        }
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const Eigen::Index j = idx[k];
        x[j] += alpha * (z[k] - x[j]);
        if (j == blocking || x[j] <= 0.0) {
          x[j] = 0.0;
          passive[j] = 0;
        }
      }
      progressed = true;
    }
    if (progressed) std::fill(rejected.begin(), rejected.end(), 0);
    std::vector<Eigen::Index> idx = flagged(passive);
    resid = r;
    if (!idx.empty()) {
      Eigen::VectorXd xp(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) xp[k] = x[idx[k]];
      resid -= take_cols(g, idx) * xp;
    }
  }

  // Polish the final face with an orthogonal factorization.
  std::vector<Eigen::Index> idx = flagged(passive);
  if (!idx.empty()) {
    const Eigen::MatrixXd gp = take_cols(g, idx);
    Eigen::VectorXd z = gp.colPivHouseholderQr().solve(r);
    if (z.allFinite() && (z.array() > 0.0).all()) {
      for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[k];
    }
    Eigen::VectorXd xp(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) xp[k] = x[idx[k]];
    resid = r - gp * xp;
  } else {
    resid = r;
  }

  const Eigen::VectorXd w = normalized_gradient(resid);
  double violation = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double v = passive[j] ? std::abs(w[j]) : std::max(0.0, w[j]);
    violation = std::max(violation, v);
  }

  out.x = x;
  out.passive = std::move(idx);
  out.iterations = iterations;
  out.violation = violation;
  out.converged = violation <= options.kkt_threshold;
  return out;
}

}  // namespace shapegam::detail
