#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/component.hpp"
#include "shapegam/cone.hpp"
#include "shapegam/shape.hpp"

namespace shapegam {

/// An order restriction on the distinct values of an ordinal predictor.
struct OrderingSpec {
  Shape kind = Shape::Incr;
  /// Distinct predictor values, ascending.
  std::vector<double> levels;
  /// Level coded as placebo (tree) or mode (umbrella).
  double placebo_or_mode = 0.0;
};

/// Collects the sorted distinct levels of x for the given ordinal shape.
/// Throws InvalidInput for smooth shapes or non-finite values.
OrderingSpec make_ordering(std::span<const double> x, Shape kind);

/// {phi : A phi >= 0, B phi = 0} on the n observations. B ties each
/// observation to the next one sharing its level; A acts on the first
/// observation of every level.
ConstraintCone ordinal_constraint_matrices(std::span<const double> x, const OrderingSpec& spec);

/// Generator form of a constraint cone: edges dual to the inequality rows
/// and V = null([A; B]).
GeneratorCone edges_from_constraints(const ConstraintCone& cone);

/// Component for an ordinal shape; the linear part starts with the constant.
ConeComponent build_ordinal_component(std::span<const double> x, Shape kind,
                                      std::string predictor = "x");

}  // namespace shapegam
