#pragma once

#include <vector>

#include <Eigen/Dense>

namespace shapegam::detail {

/// Sequential Gram-Schmidt (two passes) over the columns of `m`. A column
/// whose residual norm is at most `rel_tol` times its own norm is skipped.
/// Returns the orthonormal basis; `kept` receives the surviving indices.
Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m, double rel_tol,
                                    std::vector<Eigen::Index>* kept = nullptr);

/// m - Q Q^T m for orthonormal Q.
Eigen::MatrixXd residualize(const Eigen::MatrixXd& m, const Eigen::MatrixXd& q);
Eigen::VectorXd residualize(const Eigen::VectorXd& v, const Eigen::MatrixXd& q);

/// Numerical rank via column-pivoted QR.
Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

/// Orthonormal basis of {x : m x = 0}.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

/// Least-squares coefficients of v on the columns of m (full column rank).
Eigen::VectorXd least_squares(const Eigen::MatrixXd& m, const Eigen::VectorXd& v);

/// Square-root weights; empty input yields ones. Throws InvalidInput for a
/// non-positive or non-finite weight or a length mismatch.
Eigen::VectorXd sqrt_weights(const Eigen::VectorXd& weights, Eigen::Index n);

}  // namespace shapegam::detail
