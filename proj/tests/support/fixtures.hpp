#pragma once

// Small builders shared by the unit and acceptance tests.

#include <memory>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "shapegam/gam.hpp"
#include "shapegam/ordinal.hpp"

namespace shapegam::testing {

inline ConeComponent component_for(Shape shape, const std::vector<double>& x,
                                   const std::string& name = "x") {
  if (is_smooth(shape)) return build_shape_component(x, ShapeSpec{shape, std::nullopt, KnotSpacing::Equal}, name);
  return build_ordinal_component(x, shape, name);
}

inline std::shared_ptr<const CompositeCone> make_cone(std::vector<ConeComponent> comps,
                                                      const Eigen::MatrixXd& z = Eigen::MatrixXd(),
                                                      std::vector<std::string> names = {}) {
  Eigen::MatrixXd zz = z;
  if (zz.size() == 0 && !comps.empty()) zz.resize(static_cast<Eigen::Index>(comps.front().x.size()), 0);
  return std::make_shared<const CompositeCone>(assemble_cone(std::move(comps), zz, std::move(names)));
}

/// Predictor values suited to the shape: integer levels for ordinal shapes
/// (centered on 0 for tree and umbrella), continuous draws for smooth ones.
inline std::vector<double> predictor_for(Shape shape, Rng& rng, int n) {
  std::vector<double> x;
  if (is_smooth(shape)) return rng.uniform_sorted(static_cast<std::size_t>(n), 0.0, 1.0);
  const int levels = 6;
  const int offset = (shape == Shape::Tree || shape == Shape::Umbrella) ? 2 : 0;
  for (int i = 0; i < n; ++i) x.push_back((i < levels ? i : rng.integer(0, levels - 1)) - offset);
  std::sort(x.begin(), x.end());
  return x;
}

/// A mean function roughly in the shape's cone, plus some that is not.
inline double signal_for(Shape shape, double x) {
  const int mono = monotone_sign(shape);
  const int convex = convexity_sign(shape);
  const double u = is_smooth(shape) ? x : x / 5.0;
  double f = 0.0;
  if (mono != 0) f += mono * u;
  if (convex != 0) f += convex * 1.5 * (u - 0.5) * (u - 0.5);
  if (shape == Shape::Tree) f += x == 0.0 ? 0.0 : 0.3 * x;
  if (shape == Shape::Umbrella) f -= 0.2 * x * x;
  if (shape == Shape::S) f += std::sin(6.0 * u);
  return f;
}

}  // namespace shapegam::testing
