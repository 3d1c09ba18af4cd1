#pragma once

#include <vector>

#include <Eigen/Dense>

namespace shapegam::detail {

struct NnlsOptions {
  /// Absolute KKT threshold on the normalized gradient <r, g_j> / ||g_j||.
  double kkt_threshold = 0.0;
  /// Columns enter while their normalized gradient exceeds this value. Kept
  /// far below kkt_threshold so faces are identified to rounding level.
  double enter_threshold = 0.0;
  int max_iterations = 0;
};

struct NnlsResult {
  Eigen::VectorXd x;
  std::vector<Eigen::Index> passive;  // ascending
  int iterations = 0;
  double violation = 0.0;  // max normalized gradient among inactive columns
  bool converged = false;
};

/// Lawson-Hanson active-set solution of min ||r - G x|| subject to x >= 0.
/// The most violated column enters first (lowest index on ties); columns
/// whose coefficient would turn negative are stepped back out.
NnlsResult solve_nnls(const Eigen::MatrixXd& g, const Eigen::VectorXd& r,
                      const NnlsOptions& options);

}  // namespace shapegam::detail
