#include "shapegam/shape.hpp"

namespace shapegam {

std::string_view shape_name(Shape shape) noexcept {
  switch (shape) {
    case Shape::Incr: return "incr";
    case Shape::Decr: return "decr";
    case Shape::Conv: return "conv";
    case Shape::Conc: return "conc";
    case Shape::IncrConv: return "incr.conv";
    case Shape::IncrConc: return "incr.conc";
    case Shape::DecrConv: return "decr.conv";
    case Shape::DecrConc: return "decr.conc";
    case Shape::Tree: return "tree";
    case Shape::Umbrella: return "umbrella";
    case Shape::SIncr: return "s.incr";
    case Shape::SDecr: return "s.decr";
    case Shape::SConv: return "s.conv";
    case Shape::SConc: return "s.conc";
    case Shape::SIncrConv: return "s.incr.conv";
    case Shape::SIncrConc: return "s.incr.conc";
    case Shape::SDecrConv: return "s.decr.conv";
    case Shape::SDecrConc: return "s.decr.conc";
    case Shape::S: return "s";
  }
  return "";
}

std::optional<Shape> parse_shape(std::string_view name) noexcept {
  for (Shape s : kAllShapes) {
    if (shape_name(s) == name) return s;
  }
  return std::nullopt;
}

bool is_smooth(Shape shape) noexcept {
  return static_cast<int>(shape) >= static_cast<int>(Shape::SIncr);
}

bool is_ordinal(Shape shape) noexcept { return !is_smooth(shape); }

int monotone_sign(Shape shape) noexcept {
  switch (shape) {
    case Shape::Incr:
    case Shape::IncrConv:
    case Shape::IncrConc:
    case Shape::SIncr:
    case Shape::SIncrConv:
    case Shape::SIncrConc:
      return 1;
    case Shape::Decr:
    case Shape::DecrConv:
    case Shape::DecrConc:
    case Shape::SDecr:
    case Shape::SDecrConv:
    case Shape::SDecrConc:
      return -1;
    default:
      return 0;
  }
}

int convexity_sign(Shape shape) noexcept {
  switch (shape) {
    case Shape::Conv:
    case Shape::IncrConv:
    case Shape::DecrConv:
    case Shape::SConv:
    case Shape::SIncrConv:
    case Shape::SDecrConv:
      return 1;
    case Shape::Conc:
    case Shape::IncrConc:
    case Shape::DecrConc:
    case Shape::SConc:
    case Shape::SIncrConc:
    case Shape::SDecrConc:
      return -1;
    default:
      return 0;
  }
}

}  // namespace shapegam
