#include "shapegam/cone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "linalg.hpp"
#include "nnls.hpp"

namespace shapegam {

namespace {

constexpr double kRankTol = 1e-10;
// Entering threshold for the active-set loop, relative to ||y||_w.
constexpr double kEnterTol = 1e-13;

void check_finite(const Eigen::VectorXd& y, const char* what) {
  if (!y.allFinite()) throw InvalidInput(std::string(what) + " contains non-finite values");
}

// Projection in rescaled (unweighted) coordinates:
//   min || yt - Lt a - Et b ||,  b >= 0.
struct CoreSolution {
  Eigen::VectorXd fitted;
  Eigen::VectorXd edge_coef;
  Eigen::VectorXd linear_coef;
  std::vector<Eigen::Index> active;
  int iterations = 0;
  double violation = 0.0;
  bool converged = true;
};

CoreSolution project_core(const Eigen::VectorXd& yt, const Eigen::MatrixXd& et,
                          const Eigen::MatrixXd& lt, const SolverOptions& options) {
  CoreSolution sol;
  const Eigen::Index m = et.cols();
  const double scale = yt.norm();

  Eigen::HouseholderQR<Eigen::MatrixXd> lqr;
  Eigen::MatrixXd q;
  if (lt.cols() > 0) {
    lqr.compute(lt);
    q = lqr.householderQ() * Eigen::MatrixXd::Identity(lt.rows(), lt.cols());
  } else {
    q.resize(yt.size(), 0);
  }

  const Eigen::VectorXd r0 = detail::residualize(yt, q);
  sol.edge_coef = Eigen::VectorXd::Zero(m);

  // Exactly in L (or y = 0): nothing left for the edges to explain.
  const bool degenerate = r0.norm() <= std::numeric_limits<double>::epsilon() * scale || scale == 0.0;
  if (m > 0 && !degenerate) {
    const Eigen::MatrixXd g = detail::residualize(et, q);
    detail::NnlsOptions nopt;
    nopt.kkt_threshold = options.kkt_tol * scale;
    nopt.enter_threshold = kEnterTol * scale;
    nopt.max_iterations = std::max(1, options.iterations_per_edge * static_cast<int>(m));
    detail::NnlsResult nn = detail::solve_nnls(g, r0, nopt);
    sol.edge_coef = nn.x;
    sol.active = nn.passive;
    sol.iterations = nn.iterations;
    sol.violation = scale > 0.0 ? nn.violation / scale : 0.0;
    sol.converged = nn.converged;
  }

  Eigen::VectorXd edge_part = Eigen::VectorXd::Zero(yt.size());
  if (m > 0) edge_part = et * sol.edge_coef;
  if (lt.cols() > 0) {
    sol.linear_coef = lqr.solve(Eigen::VectorXd(yt - edge_part));
    sol.fitted = edge_part + lt * sol.linear_coef;
  } else {
    sol.linear_coef.resize(0);
    sol.fitted = edge_part;
  }
  return sol;
}

ConeProjectionResult finish(CoreSolution&& sol, const Eigen::VectorXd& sw) {
  ConeProjectionResult out;
  out.theta = sol.fitted.cwiseQuotient(sw);
  out.edge_coefficients = std::move(sol.edge_coef);
  out.linear_coefficients = std::move(sol.linear_coef);
  out.active_set = std::move(sol.active);
  out.iterations = sol.iterations;
  out.kkt_violation = sol.violation;
  if (!sol.converged) {
    throw ConvergenceError(
        "cone projection hit its iteration cap with KKT violation " +
            std::to_string(sol.violation),
        out.theta, sol.violation, sol.iterations);
  }
  return out;
}

}  // namespace

GeneratorCone::GeneratorCone(Eigen::Index n) : n_(n), edges_(n, 0), linear_(n, 0) {}

GeneratorCone::GeneratorCone(Eigen::MatrixXd edges, Eigen::MatrixXd linear_basis)
    : n_(std::max(edges.rows(), linear_basis.rows())),
      edges_(std::move(edges)),
      linear_(std::move(linear_basis)) {
  if (edges_.cols() == 0) edges_.resize(n_, 0);
  if (linear_.cols() == 0) linear_.resize(n_, 0);
  if (edges_.rows() != n_ || linear_.rows() != n_) {
    throw InvalidInput("edges and linear basis must have the same number of rows");
  }
  if (!edges_.allFinite() || !linear_.allFinite()) {
    throw InvalidInput("cone generators contain non-finite values");
  }
  if (linear_.cols() > 0) {
    if (detail::numerical_rank(linear_, kRankTol) < linear_.cols()) {
      throw RankError("linear-space basis is rank deficient");
    }
    const Eigen::MatrixXd q = detail::orthonormal_columns(linear_, kRankTol);
    for (Eigen::Index j = 0; j < edges_.cols(); ++j) {
      const double before = edges_.col(j).norm();
      edges_.col(j) = detail::residualize(Eigen::VectorXd(edges_.col(j)), q);
      if (edges_.col(j).norm() <= 1e-10 * before) {
        throw InvalidInput("edge " + std::to_string(j) + " lies in the linear space");
      }
    }
  }
  for (Eigen::Index j = 0; j < edges_.cols(); ++j) {
    if (edges_.col(j).norm() == 0.0) {
      throw InvalidInput("edge " + std::to_string(j) + " is zero");
    }
  }
}

ConstraintCone::ConstraintCone(Eigen::MatrixXd inequality, Eigen::MatrixXd equality)
    : n_(std::max(inequality.cols(), equality.cols())),
      a_(std::move(inequality)),
      b_(std::move(equality)) {
  if (a_.rows() == 0) a_.resize(0, n_);
  if (b_.rows() == 0) b_.resize(0, n_);
  if (a_.cols() != n_ || b_.cols() != n_) {
    throw InvalidInput("constraint matrices must have the same number of columns");
  }
  const Eigen::Index r = a_.rows() + b_.rows();
  if (r > n_) {
    throw RankError("constraint rows exceed the dimension (" + std::to_string(r) +
                    " > " + std::to_string(n_) + ")");
  }
  if (r > 0) {
    Eigen::MatrixXd stacked(r, n_);
    stacked << a_, b_;
    if (detail::numerical_rank(stacked.transpose(), kRankTol) < r) {
      throw RankError("rows of the constraint matrices are linearly dependent");
    }
  }
}

ConeProjectionResult project_generator_cone(const Eigen::VectorXd& y,
                                            const GeneratorCone& cone,
                                            const Eigen::VectorXd& weights,
                                            const SolverOptions& options) {
  if (y.size() != cone.dim()) {
    throw InvalidInput("response length " + std::to_string(y.size()) +
                       " does not match cone dimension " + std::to_string(cone.dim()));
  }
  if (y.size() == 0) throw InvalidInput("empty response");
  check_finite(y, "response");
  const Eigen::VectorXd sw = detail::sqrt_weights(weights, y.size());
  const Eigen::VectorXd yt = y.cwiseProduct(sw);
  const Eigen::MatrixXd et = sw.asDiagonal() * cone.edges();
  const Eigen::MatrixXd lt = sw.asDiagonal() * cone.linear_basis();
  return finish(project_core(yt, et, lt, options), sw);
}

ConeProjectionResult project_polyhedral(const Eigen::VectorXd& y,
                                        const Eigen::MatrixXd& inequality,
                                        const Eigen::MatrixXd& equality,
                                        const Eigen::VectorXd& weights,
                                        const SolverOptions& options) {
  const Eigen::Index n = y.size();
  if (n == 0) throw InvalidInput("empty response");
  if ((inequality.rows() > 0 && inequality.cols() != n) ||
      (equality.rows() > 0 && equality.cols() != n)) {
    throw InvalidInput("constraint matrices do not match the response length");
  }
  check_finite(y, "response");
  const Eigen::VectorXd sw = detail::sqrt_weights(weights, n);
  const Eigen::VectorXd yt = y.cwiseProduct(sw);

  // Moreau decomposition: the projection onto K is y minus the projection
  // onto the polar cone, generated by -A^T rows with B^T as lineality.
  const Eigen::VectorXd inv_sw = sw.cwiseInverse();
  Eigen::MatrixXd polar_edges(n, inequality.rows());
  for (Eigen::Index i = 0; i < inequality.rows(); ++i) {
    polar_edges.col(i) = -inequality.row(i).transpose().cwiseProduct(inv_sw);
  }
  Eigen::MatrixXd polar_linear(n, equality.rows());
  for (Eigen::Index i = 0; i < equality.rows(); ++i) {
    polar_linear.col(i) = equality.row(i).transpose().cwiseProduct(inv_sw);
  }
  if (polar_linear.cols() > 0 &&
      detail::numerical_rank(polar_linear, kRankTol) < polar_linear.cols()) {
    throw RankError("equality rows are linearly dependent");
  }

  CoreSolution polar = project_core(yt, polar_edges, polar_linear, options);
  CoreSolution sol;
  sol.fitted = yt - polar.fitted;
  sol.edge_coef = std::move(polar.edge_coef);
  sol.linear_coef = std::move(polar.linear_coef);
  sol.active = std::move(polar.active);
  sol.iterations = polar.iterations;
  sol.violation = polar.violation;
  sol.converged = polar.converged;
  return finish(std::move(sol), sw);
}

ConeProjectionResult project_constraint_cone(const Eigen::VectorXd& y,
                                             const ConstraintCone& cone,
                                             const Eigen::VectorXd& weights,
                                             const SolverOptions& options) {
  if (y.size() != cone.dim()) {
    throw InvalidInput("response length " + std::to_string(y.size()) +
                       " does not match cone dimension " + std::to_string(cone.dim()));
  }
  return project_polyhedral(y, cone.inequality(), cone.equality(), weights, options);
}

Eigen::VectorXd brute_force_projection(const Eigen::VectorXd& y,
                                       const GeneratorCone& cone,
                                       const Eigen::VectorXd& weights) {
  const Eigen::Index m = cone.num_edges();
  if (m > kMaxBruteForceEdges) {
    throw SizeError("brute-force projection refuses " + std::to_string(m) +
                    " edges (limit " + std::to_string(kMaxBruteForceEdges) + ")");
  }
  if (y.size() != cone.dim()) throw InvalidInput("response length does not match cone");
  const Eigen::VectorXd sw = detail::sqrt_weights(weights, y.size());
  const Eigen::VectorXd yt = y.cwiseProduct(sw);
  const Eigen::MatrixXd et = sw.asDiagonal() * cone.edges();
  const Eigen::MatrixXd lt = sw.asDiagonal() * cone.linear_basis();

  double best_obj = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  const std::uint64_t subsets = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (mask & (std::uint64_t{1} << j)) idx.push_back(j);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd design(y.size(), lt.cols() + k);
    design.leftCols(lt.cols()) = lt;
    for (Eigen::Index c = 0; c < k; ++c) design.col(lt.cols() + c) = et.col(idx[c]);
    if (design.cols() > design.rows()) continue;
    if (design.cols() > 0 && detail::numerical_rank(design, 1e-12) < design.cols()) continue;
    Eigen::VectorXd fitted = Eigen::VectorXd::Zero(y.size());
    if (design.cols() > 0) {
      const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(yt);
      if ((coef.tail(k).array() < 0.0).any()) continue;
      fitted = design * coef;
    }
    const double obj = (yt - fitted).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = fitted;
    }
  }
  return best.cwiseQuotient(sw);
}

}  // namespace shapegam
