#include "shapegam/ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "linalg.hpp"

namespace shapegam {

namespace {

constexpr double kRankTol = 1e-10;

// Difference rows e_to - e_from on level representatives.
Eigen::RowVectorXd diff_row(Eigen::Index n, Eigen::Index from, Eigen::Index to, double scale = 1.0) {
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
  r[to] += scale;
  r[from] -= scale;
  return r;
}

std::size_t find_level(const std::vector<double>& levels, double v) {
  const auto it = std::lower_bound(levels.begin(), levels.end(), v);
  if (it == levels.end() || *it != v) {
    throw InvalidInput("predictor value " + std::to_string(v) + " is not one of the ordering levels");
  }
  return static_cast<std::size_t>(it - levels.begin());
}

}  // namespace

OrderingSpec make_ordering(std::span<const double> x, Shape kind) {
  if (!is_ordinal(kind)) {
    throw InvalidInput("shape '" + std::string(shape_name(kind)) + "' is not an ordinal shape");
  }
  OrderingSpec spec;
  spec.kind = kind;
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput("predictor contains non-finite values");
  }
  spec.levels.assign(x.begin(), x.end());
  std::sort(spec.levels.begin(), spec.levels.end());
  spec.levels.erase(std::unique(spec.levels.begin(), spec.levels.end()), spec.levels.end());
  return spec;
}

ConstraintCone ordinal_constraint_matrices(std::span<const double> x, const OrderingSpec& spec) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const std::vector<double>& lv = spec.levels;
  const std::size_t nl = lv.size();
  if (nl < 2) throw InvalidInput("an ordinal shape needs at least 2 distinct levels");
  for (std::size_t i = 1; i < nl; ++i) {
    if (!(lv[i] > lv[i - 1])) throw InvalidInput("ordering levels must be strictly increasing");
  }

  std::vector<Eigen::Index> rep(nl, -1);
  std::vector<Eigen::Index> last(nl, -1);
  std::vector<Eigen::RowVectorXd> eq;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t l = find_level(lv, x[static_cast<std::size_t>(i)]);
    if (rep[l] < 0) {
      rep[l] = i;
    } else {
      eq.push_back(diff_row(n, i, last[l]));
    }
    last[l] = i;
  }
  for (std::size_t l = 0; l < nl; ++l) {
    if (rep[l] < 0) {
      throw InvalidInput("ordering level " + std::to_string(lv[l]) + " has no observations");
    }
  }

  const Shape kind = spec.kind;
  const int mono = monotone_sign(kind);
  const int convex = convexity_sign(kind);
  std::vector<Eigen::RowVectorXd> ineq;

  if (kind == Shape::Tree || kind == Shape::Umbrella) {
    const auto it = std::find(lv.begin(), lv.end(), spec.placebo_or_mode);
    if (it == lv.end()) {
      throw InvalidInput(std::string(shape_name(kind)) + " ordering needs a level equal to " +
                         std::to_string(spec.placebo_or_mode));
    }
    const auto zero = static_cast<std::size_t>(it - lv.begin());
    if (kind == Shape::Tree) {
      for (std::size_t l = 0; l < nl; ++l) {
        if (l != zero) ineq.push_back(diff_row(n, rep[zero], rep[l]));
      }
    } else {
      for (std::size_t l = 0; l + 1 < nl; ++l) {
        if (l + 1 <= zero) {
          ineq.push_back(diff_row(n, rep[l], rep[l + 1]));
        } else {
          ineq.push_back(diff_row(n, rep[l + 1], rep[l]));
        }
      }
    }
  } else if (convex == 0) {
    for (std::size_t l = 0; l + 1 < nl; ++l) {
      ineq.push_back(diff_row(n, rep[l], rep[l + 1], mono));
    }
  } else {
    if (nl < 3) {
      throw InvalidInput("shape '" + std::string(shape_name(kind)) +
                         "' needs at least 3 distinct levels, got " + std::to_string(nl));
    }
    for (std::size_t l = 1; l + 1 < nl; ++l) {
      const double left = lv[l] - lv[l - 1];
      const double right = lv[l + 1] - lv[l];
      Eigen::RowVectorXd r = diff_row(n, rep[l], rep[l + 1], left) -
                             diff_row(n, rep[l - 1], rep[l], right);
      ineq.push_back(r * static_cast<double>(convex));
    }
    // With monotone slopes only one end slope needs a sign condition.
    if (mono != 0) {
      const bool first = (mono > 0) == (convex > 0);
      const std::size_t l = first ? 0 : nl - 2;
      ineq.push_back(diff_row(n, rep[l], rep[l + 1], mono));
    }
  }

  Eigen::MatrixXd a(static_cast<Eigen::Index>(ineq.size()), n);
  for (std::size_t i = 0; i < ineq.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = ineq[i];
  Eigen::MatrixXd b(static_cast<Eigen::Index>(eq.size()), n);
  for (std::size_t i = 0; i < eq.size(); ++i) b.row(static_cast<Eigen::Index>(i)) = eq[i];
  return ConstraintCone(std::move(a), std::move(b));
}

GeneratorCone edges_from_constraints(const ConstraintCone& cone) {
  const Eigen::Index n = cone.dim();
  const Eigen::Index r1 = cone.inequality().rows();
  const Eigen::Index r2 = cone.equality().rows();
  Eigen::MatrixXd stacked(r1 + r2, n);
  stacked << cone.inequality(), cone.equality();
  const Eigen::MatrixXd v = r1 + r2 > 0 ? detail::null_space(stacked, kRankTol)
                                        : Eigen::MatrixXd::Identity(n, n);
  if (v.cols() != n - r1 - r2) {
    throw RankError("rows of the constraint matrices are linearly dependent");
  }
  Eigen::MatrixXd square(n, n);
  square << stacked, v.transpose();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(square);
  if (!lu.isInvertible()) throw RankError("constraint system is singular");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, r1);
  rhs.topRows(r1).setIdentity();
  Eigen::MatrixXd edges = lu.solve(rhs);
  return GeneratorCone(std::move(edges), v);
}

ConeComponent build_ordinal_component(std::span<const double> x, Shape kind, std::string predictor) {
  const OrderingSpec spec = make_ordering(x, kind);
  const ConstraintCone cone = ordinal_constraint_matrices(x, spec);
  const GeneratorCone gen = edges_from_constraints(cone);
  const auto n = static_cast<Eigen::Index>(x.size());

  ConeComponent c;
  c.predictor = std::move(predictor);
  c.label = std::string(shape_name(kind)) + "(" + c.predictor + ")";
  c.shape.shape = kind;
  c.x.assign(x.begin(), x.end());
  c.edge_sign = 1;
  c.edges = gen.edges();

  Eigen::MatrixXd with_constant(n, gen.linear_dim() + 1);
  with_constant << Eigen::VectorXd::Ones(n), gen.linear_basis();
  const Eigen::MatrixXd q = detail::orthonormal_columns(with_constant, 1e-8);
  c.linear_part.resize(n, q.cols());
  c.linear_part.col(0).setOnes();
  c.linear_part.rightCols(q.cols() - 1) = q.rightCols(q.cols() - 1);
  return c;
}

}  // namespace shapegam
