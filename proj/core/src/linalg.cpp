#include "linalg.hpp"

#include <cmath>
#include <string>

#include "shapegam/error.hpp"

namespace shapegam::detail {

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& m, double rel_tol,
                                    std::vector<Eigen::Index>* kept) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd q(n, m.cols());
  Eigen::Index rank = 0;
  if (kept) kept->clear();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::VectorXd v = m.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (rank > 0) {
        v -= q.leftCols(rank) * (q.leftCols(rank).transpose() * v);
      }
    }
    const double norm = v.norm();
    if (norm <= rel_tol * norm0) continue;
    q.col(rank++) = v / norm;
    if (kept) kept->push_back(j);
  }
  return q.leftCols(rank);
}

Eigen::MatrixXd residualize(const Eigen::MatrixXd& m, const Eigen::MatrixXd& q) {
  if (q.cols() == 0) return m;
  return m - q * (q.transpose() * m);
}

Eigen::VectorXd residualize(const Eigen::VectorXd& v, const Eigen::MatrixXd& q) {
  if (q.cols() == 0) return v;
  return v - q * (q.transpose() * v);
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(rel_tol);
  return qr.rank();
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel_tol) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.transpose());
  qr.setThreshold(rel_tol);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd full_q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return full_q.rightCols(n - r);
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
  if (m.cols() == 0) return Eigen::VectorXd();
  return m.colPivHouseholderQr().solve(v);
}

Eigen::VectorXd sqrt_weights(const Eigen::VectorXd& weights, Eigen::Index n) {
  if (weights.size() == 0) return Eigen::VectorXd::Ones(n);
  if (weights.size() != n) {
    throw InvalidInput("weight vector has length " +
                       std::to_string(weights.size()) + ", expected " +
                       std::to_string(n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw InvalidInput("weights must be strictly positive and finite (index " +
                         std::to_string(i) + ")");
    }
  }
  return weights.array().sqrt().matrix();
}

}  // namespace shapegam::detail
