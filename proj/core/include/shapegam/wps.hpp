#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/inference.hpp"
#include "shapegam/spline_basis.hpp"

namespace shapegam {

/// Monotonicity of the warped-plane surface in (x1, x2): increasing in
/// both, decreasing in both, or decreasing in x1 and increasing in x2.
enum class WpsDirection { II, DD, DI };

std::string_view direction_name(WpsDirection d) noexcept;
std::optional<WpsDirection> parse_direction(std::string_view name) noexcept;

/// Design for a warped-plane fit.
///
/// Coefficients are ordered [1 | B1 (k1-1) | B2 (k2-1) | B12], where B1 and
/// B2 hold the hat functions of knots 2..k and the product of hats l1, l2
/// (both counted from 2) sits at B12 column (l1-2)(k2-1) + (l2-2).
struct WpsDesign {
  KnotSequence knots1;
  KnotSequence knots2;
  WpsDirection direction = WpsDirection::II;
  std::vector<double> x1;
  std::vector<double> x2;
  Eigen::MatrixXd basis;        // n x k1k2
  Eigen::MatrixXd constraints;  // (2k1k2 - k1 - k2) x k1k2
  Eigen::MatrixXd penalty;      // slope-difference rows x k1k2
  Eigen::MatrixXd z;
  std::vector<std::string> z_names;

  int k1() const noexcept { return static_cast<int>(knots1.count()); }
  int k2() const noexcept { return static_cast<int>(knots2.count()); }
};

/// Basis rows [1 | B1 | B2 | B12] at the given points. Throws InvalidInput
/// for points outside the knot rectangle.
Eigen::MatrixXd wps_basis(std::span<const double> x1, std::span<const double> x2,
                          const KnotSequence& knots1, const KnotSequence& knots2);

/// Map from coefficients to surface values at the knot grid; row a*k2 + b
/// holds knot (a, b), both 0-based.
Eigen::MatrixXd wps_knot_values(int k1, int k2);

/// All x1-direction slopes on the knot grid, then all x2-direction slopes,
/// signed so that feasible surfaces give non-negative rows.
Eigen::MatrixXd wps_constraint_matrix(int k1, int k2, WpsDirection direction);

/// Differences of adjacent slopes along each axis (on unit-scaled knots),
/// each row divided by the geometric mean of its two interval widths.
Eigen::MatrixXd wps_penalty_matrix(const KnotSequence& knots1, const KnotSequence& knots2);

WpsDesign make_wps_bases(std::span<const double> x1, std::span<const double> x2,
                         const KnotSequence& knots1, const KnotSequence& knots2,
                         WpsDirection direction = WpsDirection::II);

struct WpsOptions {
  std::optional<int> numknots1;
  std::optional<int> numknots2;
  KnotSpacing spacing1 = KnotSpacing::Equal;
  KnotSpacing spacing2 = KnotSpacing::Equal;
  double lambda = 0.0;
  double c = 1.2;
  SolverOptions solver;
};

struct WpsFit {
  WpsDesign design;
  Eigen::VectorXd y;
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd alpha_hat;
  /// Penalized fit without the monotonicity constraints.
  Eigen::VectorXd unconstrained_mu;
  std::vector<Eigen::Index> active_rows;
  double sse = 0.0;
  double edfc = 0.0;
  double gcv = 0.0;
  double lambda_used = 0.0;
  double c = 1.2;
  /// sse / (n - d0 - c edfc) with d0 = 1 + covariates, when positive.
  std::optional<double> sigma2_hat;
  /// Covariate rows only; empty without covariates.
  CoefTable coefficients;
  std::vector<std::string> warnings;
};

/// sse / (1 - edfc/n)^2. Throws InvalidInput when edfc >= n.
double gcv_score(double sse, double edfc, Eigen::Index n);

/// Fits a design with knots already chosen.
WpsFit fit_wps(const Eigen::VectorXd& y, WpsDesign design, double lambda, double c = 1.2,
               const SolverOptions& solver = {});

/// Chooses knots per options, then fits.
WpsFit fit_wps(const Eigen::VectorXd& y, std::span<const double> x1, std::span<const double> x2,
               const Eigen::MatrixXd& z, std::vector<std::string> z_names, WpsDirection direction,
               const WpsOptions& options = {});

/// Fits every distinct lambda in the grid and keeps the smallest GCV;
/// ties go to the smaller lambda. Fits run on up to `threads` threads.
WpsFit select_lambda(const Eigen::VectorXd& y, std::span<const double> x1,
                     std::span<const double> x2, const Eigen::MatrixXd& z,
                     std::vector<std::string> z_names, WpsDirection direction,
                     const WpsOptions& options, std::vector<double> lambda_grid, int threads = 1);

/// Surface part B(x) beta at new points (covariates excluded).
Eigen::VectorXd wps_surface(const WpsFit& fit, std::span<const double> x1,
                            std::span<const double> x2);

}  // namespace shapegam
