#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/shape.hpp"
#include "shapegam/spline_basis.hpp"

namespace shapegam {

struct ShapeSpec {
  Shape shape = Shape::Incr;
  std::optional<int> numknots;
  KnotSpacing spacing = KnotSpacing::Equal;
};

/// What one predictor contributes to the composite cone.
///
/// Edges carry their sign already, so every edge coefficient is constrained
/// to be non-negative downstream. `linear_part` starts with the constant
/// vector; edges are orthogonal to all of it.
struct ConeComponent {
  std::string label;
  std::string predictor;
  ShapeSpec shape;

  Eigen::MatrixXd edges;        // n x m
  Eigen::MatrixXd linear_part;  // n x q

  /// Sign applied to spline edges (+1 increasing/convex, -1 otherwise).
  int edge_sign = 1;
  /// For the monotone-convex combinations the identity vector is an edge
  /// with this sign; 0 when the identity is unconstrained or absent.
  int identity_sign = 0;

  /// Present for smooth shapes: how every column is generated, so fitted
  /// components can be evaluated off the design points.
  std::optional<SplineFamily> spline;
  std::vector<ColumnForm> edge_forms;
  std::vector<ColumnForm> linear_forms;

  /// Predictor values at the design points.
  std::vector<double> x;
};

/// Builds the cone component for a smooth shape (`s.*` or `s`).
/// Throws InvalidInput for an ordinal shape.
ConeComponent build_shape_component(std::span<const double> x, const ShapeSpec& shape,
                                    std::string predictor = "x");

}  // namespace shapegam
