#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace shapegam {

/// The nineteen symbolic component shapes. The first ten act on ordinal
/// predictors without smoothing; the `S*` variants use constrained
/// regression splines; `S` is an unconstrained smooth.
enum class Shape {
  Incr,
  Decr,
  Conv,
  Conc,
  IncrConv,
  IncrConc,
  DecrConv,
  DecrConc,
  Tree,
  Umbrella,
  SIncr,
  SDecr,
  SConv,
  SConc,
  SIncrConv,
  SIncrConc,
  SDecrConv,
  SDecrConc,
  S,
};

inline constexpr std::array<Shape, 19> kAllShapes = {
    Shape::Incr,      Shape::Decr,      Shape::Conv,      Shape::Conc,
    Shape::IncrConv,  Shape::IncrConc,  Shape::DecrConv,  Shape::DecrConc,
    Shape::Tree,      Shape::Umbrella,  Shape::SIncr,     Shape::SDecr,
    Shape::SConv,     Shape::SConc,     Shape::SIncrConv, Shape::SIncrConc,
    Shape::SDecrConv, Shape::SDecrConc, Shape::S,
};

/// Formula symbol, e.g. "s.incr.conv".
std::string_view shape_name(Shape shape) noexcept;
std::optional<Shape> parse_shape(std::string_view name) noexcept;

bool is_smooth(Shape shape) noexcept;
bool is_ordinal(Shape shape) noexcept;

/// +1 increasing, -1 decreasing, 0 no monotonicity (also tree/umbrella).
int monotone_sign(Shape shape) noexcept;
/// +1 convex, -1 concave, 0 none.
int convexity_sign(Shape shape) noexcept;

}  // namespace shapegam
