#include "shapegam/spline_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "shapegam/component.hpp"

namespace shapegam {

namespace {

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return s;
}

std::size_t count_distinct(const std::vector<double>& sorted) {
  if (sorted.empty()) return 0;
  std::size_t d = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) ++d;
  }
  return d;
}

std::vector<double> linspace(double lo, double hi, int k) {
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    out[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / (k - 1);
  }
  out.back() = hi;
  return out;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= s.size()) return s.back();
  return s[lo] + (h - static_cast<double>(lo)) * (s[lo + 1] - s[lo]);
}

void check_knots(const std::vector<double>& knots) {
  if (knots.size() < 2) throw InvalidInput("a knot sequence needs at least two knots");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) {
      throw InvalidInput("knots must be strictly increasing");
    }
  }
}

void check_coverage(std::span<const double> x, const KnotSequence& knots) {
  check_knots(knots.knots);
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput("predictor contains non-finite values");
    if (v < knots.front() || v > knots.back()) {
      throw InvalidInput("predictor value " + std::to_string(v) +
                         " lies outside the knot range [" + std::to_string(knots.front()) +
                         ", " + std::to_string(knots.back()) + "]");
    }
  }
}

// Clamped quadratic B-spline values at u (unit-interval knots `u_knots`).
// Returns all k+1 values.
Eigen::VectorXd quadratic_bsplines(const std::vector<double>& u_knots, double u) {
  const int k = static_cast<int>(u_knots.size());
  std::vector<double> tau;
  tau.reserve(static_cast<std::size_t>(k) + 4);
  tau.push_back(u_knots.front());
  tau.push_back(u_knots.front());
  for (double t : u_knots) tau.push_back(t);
  tau.push_back(u_knots.back());
  tau.push_back(u_knots.back());

  int span = 2;
  while (span < k && u >= tau[static_cast<std::size_t>(span + 1)]) ++span;

  constexpr int p = 2;
  double n[p + 1] = {1.0, 0.0, 0.0};
  double left[p + 1] = {0.0, 0.0, 0.0};
  double right[p + 1] = {0.0, 0.0, 0.0};
  for (int j = 1; j <= p; ++j) {
    left[j] = u - tau[static_cast<std::size_t>(span + 1 - j)];
    right[j] = tau[static_cast<std::size_t>(span + j)] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  Eigen::VectorXd all = Eigen::VectorXd::Zero(k + 1);
  for (int r = 0; r <= p; ++r) all[span - p + r] = n[r];
  return all;
}

// Twice-integrated hat function j on unit-interval knots.
double cspline_value(const std::vector<double>& uk, std::size_t j, double u, Anchor anchor) {
  struct Piece {
    double p, q, alpha, beta;
  };
  Piece pieces[2];
  int count = 0;
  if (j > 0) {
    const double a = uk[j - 1];
    const double h = uk[j] - a;
    pieces[count++] = {a, uk[j], -a / h, 1.0 / h};
  }
  if (j + 1 < uk.size()) {
    const double b = uk[j + 1];
    const double h = b - uk[j];
    pieces[count++] = {uk[j], b, b / h, -1.0 / h};
  }
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    const Piece& pc = pieces[i];
    if (anchor == Anchor::Left) {
      if (u <= pc.p) continue;
      const double hi = std::min(u, pc.q);
      auto f = [&](double s) {
        return u * pc.alpha * s + (u * pc.beta - pc.alpha) * s * s / 2.0 -
               pc.beta * s * s * s / 3.0;
      };
      total += f(hi) - f(pc.p);
    } else {
      if (u >= pc.q) continue;
      const double lo = std::max(u, pc.p);
      auto h = [&](double s) {
        return pc.alpha * s * s / 2.0 + pc.beta * s * s * s / 3.0 - u * pc.alpha * s -
               u * pc.beta * s * s / 2.0;
      };
      total += h(pc.q) - h(lo);
    }
  }
  return total;
}

ColumnForm signed_form(ColumnForm f, double sign) {
  f.sign *= sign;
  f.shift *= sign;
  f.slope *= sign;
  return f;
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

Eigen::VectorXd to_vector(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace

int default_knot_count(std::size_t n, BasisKind kind) {
  const double order = kind == BasisKind::CSplineCubic ? 1.0 / 9.0 : 1.0 / 7.0;
  const int k = static_cast<int>(std::lround(2.0 * std::pow(static_cast<double>(n), order))) + 2;
  return std::max(4, k);
}

KnotSequence default_knots(std::span<const double> x, std::optional<int> numknots,
                           KnotSpacing spacing, BasisKind kind) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput("predictor contains non-finite values");
  }
  const std::vector<double> s = sorted_copy(x);
  const std::size_t distinct = count_distinct(s);
  if (distinct < 3) {
    throw InvalidInput("a smooth term needs at least 3 distinct predictor values, got " +
                       std::to_string(distinct));
  }
  int k = 0;
  if (numknots) {
    k = *numknots;
    if (k < 3) throw InvalidInput("numknots must be at least 3, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > distinct) {
      throw InvalidInput("requested " + std::to_string(k) + " knots but the predictor has only " +
                         std::to_string(distinct) + " distinct values");
    }
  } else {
    k = std::min(default_knot_count(x.size(), kind), static_cast<int>(distinct));
  }

  KnotSequence out;
  out.spacing = spacing;
  if (spacing == KnotSpacing::Equal) {
    out.knots = linspace(s.front(), s.back(), k);
    return out;
  }
  std::vector<double> q;
  const double range = s.back() - s.front();
  for (int j = 0; j < k; ++j) {
    const double v = j == k - 1 ? s.back() : quantile_sorted(s, static_cast<double>(j) / (k - 1));
    if (q.empty() || v - q.back() > 1e-12 * range) q.push_back(v);
  }
  q.front() = s.front();
  q.back() = s.back();
  if (q.size() < 3) q = linspace(s.front(), s.back(), k);
  out.knots = std::move(q);
  return out;
}

Eigen::MatrixXd SplineFamily::evaluate(std::span<const double> x) const {
  check_knots(knots);
  const double lo = knots.front();
  const double width = knots.back() - lo;
  std::vector<double> uk(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) uk[i] = (knots[i] - lo) / width;
  uk.front() = 0.0;
  uk.back() = 1.0;

  const auto n = static_cast<Eigen::Index>(x.size());
  const auto k = static_cast<Eigen::Index>(knots.size());
  Eigen::MatrixXd out(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (x[static_cast<std::size_t>(i)] - lo) / width;
    switch (kind) {
      case BasisKind::ISplineQuadratic: {
        const Eigen::VectorXd b = quadratic_bsplines(uk, std::clamp(u, 0.0, 1.0));
        double tail = 0.0;
        for (Eigen::Index j = k; j >= 1; --j) {
          tail += b[j];
          out(i, j - 1) = tail;
        }
        break;
      }
      case BasisKind::CSplineCubic:
        for (Eigen::Index j = 0; j < k; ++j) {
          out(i, j) = cspline_value(uk, static_cast<std::size_t>(j), u, anchor);
        }
        break;
      case BasisKind::Linear:
        throw InvalidInput("linear bases are evaluated by the warped-plane module");
    }
  }
  return out;
}

double evaluate_form(const ColumnForm& form, double x, const Eigen::RowVectorXd& raw) {
  double base = 0.0;
  switch (form.base) {
    case ColumnForm::Base::Constant: base = 1.0; break;
    case ColumnForm::Base::Identity: base = x; break;
    case ColumnForm::Base::Spline: base = raw[form.index]; break;
  }
  return form.sign * base - form.shift - form.slope * x;
}

Eigen::MatrixXd BasisSet::evaluate(std::span<const double> x) const {
  const Eigen::MatrixXd raw = family.evaluate(x);
  Eigen::MatrixXd out(raw.rows(), static_cast<Eigen::Index>(forms.size()));
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const Eigen::RowVectorXd row = raw.row(i);
    for (std::size_t c = 0; c < forms.size(); ++c) {
      out(i, static_cast<Eigen::Index>(c)) = evaluate_form(forms[c], x[static_cast<std::size_t>(i)], row);
    }
  }
  return out;
}

BasisSet make_ispline_basis(std::span<const double> x, const KnotSequence& knots) {
  check_coverage(x, knots);
  BasisSet out;
  out.kind = BasisKind::ISplineQuadratic;
  out.centering = {Centering::Constant};
  out.family = SplineFamily{BasisKind::ISplineQuadratic, Anchor::Left, knots.knots};
  out.columns = out.family.evaluate(x);
  for (Eigen::Index j = 0; j < out.columns.cols(); ++j) {
    const double shift = out.columns.col(j).mean();
    out.columns.col(j).array() -= shift;
    out.forms.push_back({ColumnForm::Base::Spline, static_cast<int>(j), 1.0, shift, 0.0});
  }
  return out;
}

namespace {

BasisSet cspline_basis(std::span<const double> x, const KnotSequence& knots, Anchor anchor,
                       bool remove_identity) {
  check_coverage(x, knots);
  BasisSet out;
  out.kind = BasisKind::CSplineCubic;
  out.centering = remove_identity
                      ? std::vector<Centering>{Centering::Constant, Centering::Identity}
                      : std::vector<Centering>{Centering::Constant};
  out.family = SplineFamily{BasisKind::CSplineCubic, anchor, knots.knots};
  out.columns = out.family.evaluate(x);
  const Eigen::VectorXd xv = to_vector(x);
  const double xbar = xv.mean();
  const Eigen::VectorXd xc = xv.array() - xbar;
  const double sxx = xc.squaredNorm();
  if (remove_identity && !(sxx > 0.0)) throw InvalidInput("predictor is constant");
  for (Eigen::Index j = 0; j < out.columns.cols(); ++j) {
    double slope = 0.0;
    if (remove_identity) slope = xc.dot(out.columns.col(j)) / sxx;
    const double shift = out.columns.col(j).mean() - slope * xbar;
    out.columns.col(j) = (out.columns.col(j).array() - shift - slope * xv.array()).matrix();
    out.forms.push_back({ColumnForm::Base::Spline, static_cast<int>(j), 1.0, shift, slope});
  }
  return out;
}

}  // namespace

BasisSet make_cspline_basis(std::span<const double> x, const KnotSequence& knots) {
  return cspline_basis(x, knots, Anchor::Left, true);
}

ConeComponent build_shape_component(std::span<const double> x, const ShapeSpec& spec,
                                    std::string predictor) {
  if (!is_smooth(spec.shape)) {
    throw InvalidInput("shape '" + std::string(shape_name(spec.shape)) +
                       "' is not a smooth shape");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  ConeComponent c;
  c.predictor = std::move(predictor);
  c.label = std::string(shape_name(spec.shape)) + "(" + c.predictor + ")";
  c.shape = spec;
  c.x.assign(x.begin(), x.end());

  const Eigen::VectorXd xv = to_vector(x);
  const double xbar = mean_of(x);
  const Eigen::VectorXd xc = xv.array() - xbar;
  const ColumnForm constant_form{ColumnForm::Base::Constant, 0, 1.0, 0.0, 0.0};
  const ColumnForm identity_form{ColumnForm::Base::Identity, 0, 1.0, xbar, 0.0};

  const int mono = monotone_sign(spec.shape);
  const int convex = convexity_sign(spec.shape);
  const BasisKind kind =
      (convex == 0 && mono != 0) ? BasisKind::ISplineQuadratic : BasisKind::CSplineCubic;
  const KnotSequence knots = default_knots(x, spec.numknots, spec.spacing, kind);

  std::vector<Eigen::VectorXd> linear{Eigen::VectorXd::Ones(n)};
  c.linear_forms.push_back(constant_form);

  BasisSet basis;
  if (kind == BasisKind::ISplineQuadratic) {
    basis = make_ispline_basis(x, knots);
    c.edge_sign = mono;
    c.edges = basis.columns * static_cast<double>(mono);
    for (const auto& f : basis.forms) c.edge_forms.push_back(signed_form(f, mono));
  } else if (spec.shape == Shape::S) {
    basis = make_cspline_basis(x, knots);
    c.edge_sign = 0;
    c.edges.resize(n, 0);
    linear.push_back(xc);
    c.linear_forms.push_back(identity_form);
    for (Eigen::Index j = 0; j < basis.columns.cols(); ++j) {
      linear.push_back(basis.columns.col(j));
      c.linear_forms.push_back(basis.forms[static_cast<std::size_t>(j)]);
    }
  } else if (mono == 0) {
    basis = make_cspline_basis(x, knots);
    c.edge_sign = convex;
    c.edges = basis.columns * static_cast<double>(convex);
    for (const auto& f : basis.forms) c.edge_forms.push_back(signed_form(f, convex));
    linear.push_back(xc);
    c.linear_forms.push_back(identity_form);
  } else {
    // Monotone and convex/concave: the slope constraint only binds at one
    // end of the range, so anchor the C-splines there and put a signed
    // identity edge alongside them.
    const Anchor anchor = mono == convex ? Anchor::Left : Anchor::Right;
    basis = cspline_basis(x, knots, anchor, false);
    c.edge_sign = convex;
    c.identity_sign = mono;
    c.edges.resize(n, basis.columns.cols() + 1);
    c.edges.leftCols(basis.columns.cols()) = basis.columns * static_cast<double>(convex);
    c.edges.col(basis.columns.cols()) = xc * static_cast<double>(mono);
    for (const auto& f : basis.forms) c.edge_forms.push_back(signed_form(f, convex));
    c.edge_forms.push_back(signed_form(identity_form, mono));
  }
  c.spline = basis.family;

  c.linear_part.resize(n, static_cast<Eigen::Index>(linear.size()));
  for (std::size_t j = 0; j < linear.size(); ++j) {
    c.linear_part.col(static_cast<Eigen::Index>(j)) = linear[j];
  }
  return c;
}

}  // namespace shapegam
