#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/component.hpp"
#include "shapegam/cone.hpp"
#include "shapegam/family.hpp"

namespace shapegam {

/// Sum of component cones and the covariate space, in generator form.
///
/// L always starts with the intercept, followed by the independent parts of
/// each component's linear space and then the covariate columns.
struct CompositeCone {
  std::vector<ConeComponent> components;

  /// Edges orthogonalized against L, and the same edges as built.
  Eigen::MatrixXd edges;
  Eigen::MatrixXd raw_edges;
  /// For each kept edge: owning component and column within its edges.
  std::vector<std::size_t> edge_component;
  std::vector<Eigen::Index> edge_local;

  Eigen::MatrixXd linear_basis;
  /// Columns of `linear_basis` holding covariates, and their names.
  std::vector<Eigen::Index> z_cols;
  std::vector<std::string> z_names;
  /// Per component: (column of linear_basis, column within its linear_part).
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> component_linear;

  Eigen::Index d0 = 0;
  GeneratorCone generator;
  std::vector<std::string> warnings;

  Eigen::Index n() const noexcept { return linear_basis.rows(); }
  Eigen::Index num_edges() const noexcept { return edges.cols(); }
};

/// Throws RankError naming the covariate when a Z column is collinear with
/// the columns before it.
CompositeCone assemble_cone(std::vector<ConeComponent> components, const Eigen::MatrixXd& z,
                            std::vector<std::string> z_names = {});

struct FitOptions {
  /// Multiplier c in the variance estimate, in [1, 2].
  double c = 1.2;
  /// Relative deviance change that stops the iteration.
  double tol = 1e-8;
  int max_iter = 200;
  SolverOptions solver;
};

struct ComponentFit {
  std::string label;
  /// Component values at the design points (edges plus own linear part,
  /// without the intercept).
  Eigen::VectorXd values;
  Eigen::VectorXd edge_coefficients;
  /// Coefficients on the component's linear_part columns; zero for columns
  /// absorbed by the intercept or an earlier term.
  Eigen::VectorXd linear_coefficients;
};

struct FitResult {
  Family family;
  std::shared_ptr<const CompositeCone> cone;

  Eigen::VectorXd y;
  Eigen::VectorXd eta_hat;
  Eigen::VectorXd mu_hat;
  /// Covariate coefficients, in the order of cone->z_names.
  Eigen::VectorXd alpha_hat;
  double intercept = 0.0;
  Eigen::VectorXd edge_coefficients;
  Eigen::VectorXd linear_coefficients;
  std::vector<Eigen::Index> active_set;
  std::vector<ComponentFit> components;

  double edf = 0.0;
  Eigen::Index d0 = 0;
  double null_deviance = 0.0;
  double residual_deviance = 0.0;
  std::optional<double> sigma2_hat;
  double c = 1.2;

  /// Weights and working response of the final quadratic approximation
  /// (unit weights and y for the Gaussian family).
  Eigen::VectorXd weights;
  Eigen::VectorXd working_response;

  int irls_iterations = 0;
  std::vector<double> deviance_trace;
  bool separation = false;
  bool stalled = false;
  std::vector<std::string> warnings;

  Eigen::Index n() const noexcept { return y.size(); }
};

/// One weighted projection of y onto the cone. Empty weights mean unit weights.
FitResult fit_gaussian(const Eigen::VectorXd& y, std::shared_ptr<const CompositeCone> cone,
                       const Eigen::VectorXd& weights = Eigen::VectorXd(),
                       const FitOptions& options = {});

/// Iteratively re-weighted cone projection with a line search on each
/// segment. Throws ConvergenceError (best iterate: eta) after max_iter.
FitResult fit_irls(const Eigen::VectorXd& y, const Family& family,
                   std::shared_ptr<const CompositeCone> cone, const FitOptions& options = {});

/// fit_gaussian for the Gaussian family, fit_irls otherwise.
FitResult fit_model(const Eigen::VectorXd& y, const Family& family,
                    std::shared_ptr<const CompositeCone> cone, const FitOptions& options = {});

struct LineSearchResult {
  Eigen::VectorXd eta;
  double t = 0.0;
  bool stalled = false;
};

/// Minimizes negloglik over eta_k + t (eta_star - eta_k), t in [0, 1], by
/// golden section to 1e-6 in t. t = 1 wins ties.
LineSearchResult line_search_segment(
    const Eigen::VectorXd& eta_k, const Eigen::VectorXd& eta_star,
    const std::function<double(const Eigen::VectorXd&)>& negloglik);

/// Fitted component curve evaluated at new predictor values. Smooth
/// components only; ordinal components are defined at their levels, so x
/// must hold observed levels.
Eigen::VectorXd component_curve(const FitResult& fit, std::size_t component,
                                std::span<const double> x);

}  // namespace shapegam
