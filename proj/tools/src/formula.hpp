#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapegam/error.hpp"
#include "shapegam/shape.hpp"
#include "shapegam/spline_basis.hpp"
#include "shapegam/wps.hpp"

namespace shapegam::cli {

/// Formula syntax error; `position()` is a 0-based offset into the text.
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& message, std::size_t position)
      : InvalidInput("syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

enum class TermKind { Shape, Wps, Factor, Linear };

struct Term {
  TermKind kind = TermKind::Linear;
  Shape shape = Shape::Incr;                      // kind == Shape
  WpsDirection direction = WpsDirection::II;      // kind == Wps
  std::vector<std::string> predictors;
  /// Empty, one value, or one per axis for warped-plane terms.
  std::vector<int> numknots;
  std::vector<KnotSpacing> space;

  friend bool operator==(const Term&, const Term&) = default;
};

struct ModelSpec {
  std::string response;
  std::vector<Term> terms;

  bool is_wps() const noexcept;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Parses `response ~ term (+ term)*`. Terms are a shape symbol, dd/ii/di,
/// factor(name), or a bare covariate name. Throws ParseError for syntax
/// problems and InvalidInput for semantic ones.
ModelSpec parse_model_spec(std::string_view text);

/// Canonical formula text; parse_model_spec(serialize(m)) == m.
std::string serialize(const ModelSpec& spec);

nlohmann::ordered_json to_json(const ModelSpec& spec);

std::string term_label(const Term& term);

}  // namespace shapegam::cli
