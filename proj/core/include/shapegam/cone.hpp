#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/error.hpp"

namespace shapegam {

/// Tuning for the active-set projection. The defaults are the documented
/// contract; tests rely on them.
struct SolverOptions {
  /// KKT feasibility tolerance, relative to the weighted norm of y.
  double kkt_tol = 1e-8;
  /// Coefficients at or below this (relative) level are treated as zero.
  double coef_tol = 1e-10;
  /// Iteration cap is `iterations_per_edge * m`.
  int iterations_per_edge = 50;
};

/// Polyhedral cone {v + sum_j b_j e_j : v in L, b_j >= 0} in R^n.
///
/// Edges are stored orthogonalized against the linear space; the cone they
/// generate together with L is unchanged by that step.
class GeneratorCone {
 public:
  GeneratorCone() = default;

  /// Columns of `edges` are generators, columns of `linear_basis` span L.
  /// Throws RankError when L is rank deficient and InvalidInput when an edge
  /// lies in L.
  GeneratorCone(Eigen::MatrixXd edges, Eigen::MatrixXd linear_basis);

  /// Dimension-only constructor for a cone with no edges and L = {0}.
  explicit GeneratorCone(Eigen::Index n);

  const Eigen::MatrixXd& edges() const noexcept { return edges_; }
  const Eigen::MatrixXd& linear_basis() const noexcept { return linear_; }
  Eigen::Index dim() const noexcept { return n_; }
  Eigen::Index num_edges() const noexcept { return edges_.cols(); }
  Eigen::Index linear_dim() const noexcept { return linear_.cols(); }

 private:
  Eigen::Index n_ = 0;
  Eigen::MatrixXd edges_;
  Eigen::MatrixXd linear_;
};

/// Cone {theta : A theta >= 0, B theta = 0}; rows of [A; B] must be
/// linearly independent.
class ConstraintCone {
 public:
  ConstraintCone() = default;
  ConstraintCone(Eigen::MatrixXd inequality, Eigen::MatrixXd equality);

  const Eigen::MatrixXd& inequality() const noexcept { return a_; }
  const Eigen::MatrixXd& equality() const noexcept { return b_; }
  Eigen::Index dim() const noexcept { return n_; }

 private:
  Eigen::Index n_ = 0;
  Eigen::MatrixXd a_;
  Eigen::MatrixXd b_;
};

struct ConeProjectionResult {
  Eigen::VectorXd theta;
  /// Generator form: weights on edges. Constraint form: multipliers on the
  /// inequality rows. Always >= 0.
  Eigen::VectorXd edge_coefficients;
  /// Generator form: coordinates in the linear basis. Constraint form:
  /// multipliers on the equality rows.
  Eigen::VectorXd linear_coefficients;
  /// Indices with strictly positive edge coefficient, ascending.
  std::vector<Eigen::Index> active_set;
  int iterations = 0;
  /// Largest normalized KKT violation at exit (relative to ||y||_w).
  double kkt_violation = 0.0;
};

/// Weighted least-squares projection of y onto a generator cone. Empty
/// `weights` means unit weights.
ConeProjectionResult project_generator_cone(
    const Eigen::VectorXd& y, const GeneratorCone& cone,
    const Eigen::VectorXd& weights = Eigen::VectorXd(),
    const SolverOptions& options = {});

/// Weighted projection of y onto {A theta >= 0, B theta = 0}.
ConeProjectionResult project_constraint_cone(
    const Eigen::VectorXd& y, const ConstraintCone& cone,
    const Eigen::VectorXd& weights = Eigen::VectorXd(),
    const SolverOptions& options = {});

/// Same as project_constraint_cone but without the row-independence
/// requirement on A (B must still have independent rows). Redundant
/// inequality systems such as the warped-plane slope conditions go here.
ConeProjectionResult project_polyhedral(
    const Eigen::VectorXd& y, const Eigen::MatrixXd& inequality,
    const Eigen::MatrixXd& equality,
    const Eigen::VectorXd& weights = Eigen::VectorXd(),
    const SolverOptions& options = {});

/// Exact projection by enumerating every face. Exponential in the number of
/// edges; refuses cones with more than `kMaxBruteForceEdges` edges.
inline constexpr Eigen::Index kMaxBruteForceEdges = 20;

Eigen::VectorXd brute_force_projection(
    const Eigen::VectorXd& y, const GeneratorCone& cone,
    const Eigen::VectorXd& weights = Eigen::VectorXd());

}  // namespace shapegam
