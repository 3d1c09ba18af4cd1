#pragma once

// Reference implementations used only by the tests. Each one follows a
// different route from the library code it checks.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/family.hpp"
#include "shapegam/shape.hpp"
#include "shapegam/spline_basis.hpp"

namespace shapegam::testing {

/// Weighted pool-adjacent-violators fit of a non-decreasing sequence.
Eigen::VectorXd pava(const Eigen::VectorXd& y, const Eigen::VectorXd& w);

/// Non-decreasing least-squares fit of y on an ordinal x (ties share a value).
Eigen::VectorXd pava_by_level(std::span<const double> x, const Eigen::VectorXd& y);

/// min ||y - X b||^2 subject to A b >= 0 by trying every set of binding rows.
Eigen::VectorXd qp_enumerate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::MatrixXd& a);

/// Unconstrained canonical-link GLM by Newton-Raphson with step halving.
/// Returns the coefficient vector.
Eigen::VectorXd newton_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, FamilyKind family);

/// I-spline j (1..k) as the integral of the normalized linear B-spline it is
/// built from, by adaptive Simpson quadrature on the unit-scaled knots.
double ispline_by_quadrature(const std::vector<double>& knots, int j, double x);

/// C-spline j (0..k-1): twice-integrated hat function by quadrature.
double cspline_by_quadrature(const std::vector<double>& knots, int j, double x, Anchor anchor);

/// Largest violation of the declared shape by component values at the design
/// points, measured on the per-level values (0 when the shape holds). Tree
/// and umbrella use level 0 as placebo and mode.
double shape_violation(Shape shape, std::span<const double> x, const Eigen::VectorXd& values);

/// Largest gap between component values at tied predictor values.
double tie_spread(std::span<const double> x, const Eigen::VectorXd& values);

/// argmin of f over an equally spaced grid on [0, 1].
double grid_argmin(const std::function<double(double)>& f, int points);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(gen_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  std::mt19937_64& engine() { return gen_; }

  Eigen::VectorXd normal_vector(Eigen::Index n, double sd = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(0.0, sd);
    return v;
  }
  std::vector<double> uniform_sorted(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(lo, hi);
    std::sort(v.begin(), v.end());
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace shapegam::testing
