#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shapegam/error.hpp"

namespace shapegam {

enum class KnotSpacing { Equal, Quantile };
enum class BasisKind { ISplineQuadratic, CSplineCubic, Linear };

struct KnotSequence {
  std::vector<double> knots;  // strictly increasing
  KnotSpacing spacing = KnotSpacing::Equal;

  std::size_t count() const noexcept { return knots.size(); }
  double front() const { return knots.front(); }
  double back() const { return knots.back(); }
};

/// Default knot count for a sample of size n: max(4, round(2 n^(1/7)) + 2)
/// for I-splines and linear bases, max(4, round(2 n^(1/9)) + 2) for C-splines.
int default_knot_count(std::size_t n, BasisKind kind);

/// Knots covering [min(x), max(x)]. With `numknots` unset the default count
/// is used (capped at the number of distinct values). Quantile spacing drops
/// duplicate knots and falls back to equal spacing below three knots.
KnotSequence default_knots(std::span<const double> x, std::optional<int> numknots,
                           KnotSpacing spacing, BasisKind kind);

/// Raw spline functions on a knot sequence, evaluated on x rescaled to the
/// unit interval of the knot range.
///   ISplineQuadratic: k functions, tail sums of the k+1 clamped quadratic
///     B-splines; each rises from 0 to 1.
///   CSplineCubic:     k functions with second derivative equal to the hat
///     function at each knot; anchored so the function and its slope vanish
///     at the left (or right) end of the knot range.
enum class Anchor { Left, Right };

struct SplineFamily {
  BasisKind kind = BasisKind::ISplineQuadratic;
  Anchor anchor = Anchor::Left;
  std::vector<double> knots;

  std::size_t size() const noexcept { return knots.size(); }
  /// n x k matrix of raw function values. Values outside the knot range
  /// are extrapolated from the boundary polynomial pieces.
  Eigen::MatrixXd evaluate(std::span<const double> x) const;
};

/// One evaluated column expressed through its generating function:
///   value(x) = sign * base(x) - shift - slope * x
/// where base is the constant 1, the identity, or raw spline `index`.
struct ColumnForm {
  enum class Base { Constant, Identity, Spline };
  Base base = Base::Spline;
  int index = 0;
  double sign = 1.0;
  double shift = 0.0;
  double slope = 0.0;
};

enum class Centering { Constant, Identity };

struct BasisSet {
  Eigen::MatrixXd columns;  // n x k
  BasisKind kind = BasisKind::ISplineQuadratic;
  /// Fixed vectors the columns were made orthogonal to.
  std::vector<Centering> centering;
  SplineFamily family;
  std::vector<ColumnForm> forms;

  Eigen::MatrixXd evaluate(std::span<const double> x) const;
};

/// Evaluates a column form given raw spline values at the same point.
double evaluate_form(const ColumnForm& form, double x, const Eigen::RowVectorXd& raw);

/// Quadratic I-spline columns, each centered (orthogonal to 1).
BasisSet make_ispline_basis(std::span<const double> x, const KnotSequence& knots);

/// Cubic C-spline columns orthogonalized against 1 and x.
BasisSet make_cspline_basis(std::span<const double> x, const KnotSequence& knots);

}  // namespace shapegam
