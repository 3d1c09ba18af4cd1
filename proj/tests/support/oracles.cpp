#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

namespace shapegam::testing {

Eigen::VectorXd pava(const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  struct Block {
    double value, weight;
    Eigen::Index size;
  };
  std::vector<Block> blocks;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      a.size += b.size;
    }
  }
  Eigen::VectorXd out(y.size());
  Eigen::Index k = 0;
  for (const Block& b : blocks) {
    for (Eigen::Index i = 0; i < b.size; ++i) out[k++] = b.value;
  }
  return out;
}

Eigen::VectorXd pava_by_level(std::span<const double> x, const Eigen::VectorXd& y) {
  std::map<double, std::pair<double, double>> groups;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto& g = groups[x[i]];
    g.first += y[static_cast<Eigen::Index>(i)];
    g.second += 1.0;
  }
  Eigen::VectorXd means(static_cast<Eigen::Index>(groups.size()));
  Eigen::VectorXd weights(means.size());
  Eigen::Index k = 0;
  for (const auto& [level, g] : groups) {
    means[k] = g.first / g.second;
    weights[k] = g.second;
    ++k;
  }
  const Eigen::VectorXd fitted = pava(means, weights);
  std::map<double, double> value;
  k = 0;
  for (const auto& [level, g] : groups) value[level] = fitted[k++];
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) out[static_cast<Eigen::Index>(i)] = value[x[i]];
  return out;
}

Eigen::VectorXd qp_enumerate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const Eigen::MatrixXd& a) {
  const Eigen::Index r = a.rows();
  const Eigen::Index p = x.cols();
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_b = Eigen::VectorXd::Zero(p);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << r); ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (mask & (std::uint64_t{1} << i)) rows.push_back(i);
    }
    Eigen::MatrixXd n = Eigen::MatrixXd::Identity(p, p);
    if (!rows.empty()) {
      Eigen::MatrixXd as(static_cast<Eigen::Index>(rows.size()), p);
      for (std::size_t k = 0; k < rows.size(); ++k) as.row(static_cast<Eigen::Index>(k)) = a.row(rows[k]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(as);
      n = lu.kernel();
      if (lu.rank() == p) n = Eigen::MatrixXd::Zero(p, 1);
    }
    const Eigen::MatrixXd xn = x * n;
    const Eigen::VectorXd t = xn.completeOrthogonalDecomposition().solve(y);
    const Eigen::VectorXd b = n * t;
    if (((a * b).array() < -1e-10).any()) continue;
    const double obj = (y - x * b).squaredNorm();
    if (obj < best - 1e-14) {
      best = obj;
      best_b = b;
    }
  }
  return best_b;
}

Eigen::VectorXd newton_glm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, FamilyKind family) {
  auto mean = [&](double e) {
    return family == FamilyKind::Poisson ? std::exp(e) : 1.0 / (1.0 + std::exp(-e));
  };
  auto loglik = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = x * b;
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double bi = family == FamilyKind::Poisson ? std::exp(eta[i]) : std::log1p(std::exp(eta[i]));
      s += y[i] * eta[i] - bi;
    }
    return s;
  };
  Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd eta = x * b;
    Eigen::VectorXd mu(y.size()), v(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      mu[i] = mean(eta[i]);
      v[i] = family == FamilyKind::Poisson ? mu[i] : mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd grad = x.transpose() * (y - mu);
    const Eigen::MatrixXd hess = x.transpose() * v.asDiagonal() * x;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double scale = 1.0;
    const double before = loglik(b);
    while (scale > 1e-10 && !(loglik(b + scale * step) >= before)) scale *= 0.5;
    b += scale * step;
    if (step.norm() * scale < 1e-13 * (1.0 + b.norm())) break;
  }
  return b;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int panels = 2000) {
  if (b <= a) return 0.0;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

std::vector<double> unit_knots(const std::vector<double>& knots) {
  std::vector<double> u;
  for (double t : knots) u.push_back((t - knots.front()) / (knots.back() - knots.front()));
  return u;
}

// Piecewise-polynomial integral split at the knots so Simpson is exact.
double integrate_split(const std::function<double(double)>& f, const std::vector<double>& breaks,
                       double a, double b) {
  std::vector<double> pts{a};
  for (double t : breaks) {
    if (t > a && t < b) pts.push_back(t);
  }
  pts.push_back(b);
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) s += simpson(f, pts[i - 1], pts[i], 8);
  return s;
}

}  // namespace

double ispline_by_quadrature(const std::vector<double>& knots, int j, double x) {
  const std::vector<double> u = unit_knots(knots);
  std::vector<double> tau{0.0, 0.0};
  tau.insert(tau.end(), u.begin(), u.end());
  tau.push_back(1.0);
  tau.push_back(1.0);
  const double a = tau[static_cast<std::size_t>(j)];
  const double m = tau[static_cast<std::size_t>(j) + 1];
  const double c = tau[static_cast<std::size_t>(j) + 2];
  auto density = [&](double s) {
    double v = 0.0;
    if (s >= a && s <= m && m > a) v = (s - a) / (m - a);
    if (s >= m && s <= c && c > m) v = (c - s) / (c - m);
    return 2.0 * v / (c - a);
  };
  const double ux = (x - knots.front()) / (knots.back() - knots.front());
  return integrate_split(density, u, 0.0, std::clamp(ux, 0.0, 1.0));
}

double cspline_by_quadrature(const std::vector<double>& knots, int j, double x, Anchor anchor) {
  const std::vector<double> u = unit_knots(knots);
  const auto uj = static_cast<std::size_t>(j);
  auto hat = [&](double s) {
    if (uj > 0 && s >= u[uj - 1] && s <= u[uj]) return (s - u[uj - 1]) / (u[uj] - u[uj - 1]);
    if (uj + 1 < u.size() && s >= u[uj] && s <= u[uj + 1]) return (u[uj + 1] - s) / (u[uj + 1] - u[uj]);
    return 0.0;
  };
  const double ux = (x - knots.front()) / (knots.back() - knots.front());
  if (anchor == Anchor::Left) {
    return integrate_split([&](double s) { return (ux - s) * hat(s); }, u, 0.0, ux);
  }
  return integrate_split([&](double s) { return (s - ux) * hat(s); }, u, ux, 1.0);
}

double shape_violation(Shape shape, std::span<const double> x, const Eigen::VectorXd& values) {
  std::map<double, double> level_value;
  for (std::size_t i = 0; i < x.size(); ++i) level_value.emplace(x[i], values[static_cast<Eigen::Index>(i)]);
  std::vector<double> lv, v;
  for (const auto& [l, val] : level_value) {
    lv.push_back(l);
    v.push_back(val);
  }
  const std::size_t nl = lv.size();
  double worst = 0.0;
  auto record = [&](double margin) { worst = std::max(worst, -margin); };
  const int mono = monotone_sign(shape);
  const int convex = convexity_sign(shape);
  if (shape == Shape::Tree) {
    const auto zero = static_cast<std::size_t>(std::find(lv.begin(), lv.end(), 0.0) - lv.begin());
    for (std::size_t l = 0; l < nl; ++l) record(v[l] - v[zero]);
    return worst;
  }
  if (shape == Shape::Umbrella) {
    for (std::size_t l = 1; l < nl; ++l) record(lv[l] <= 0.0 ? v[l] - v[l - 1] : v[l - 1] - v[l]);
    return worst;
  }
  if (mono != 0) {
    for (std::size_t l = 1; l < nl; ++l) record(mono * (v[l] - v[l - 1]));
  }
  if (convex != 0) {
    for (std::size_t l = 1; l + 1 < nl; ++l) {
      const double s1 = (v[l] - v[l - 1]) / (lv[l] - lv[l - 1]);
      const double s2 = (v[l + 1] - v[l]) / (lv[l + 1] - lv[l]);
      // Slope change scaled by the local spacing so tight knots do not
      // amplify rounding.
      record(convex * (s2 - s1) * std::min(lv[l] - lv[l - 1], lv[l + 1] - lv[l]));
    }
  }
  return worst;
}

double tie_spread(std::span<const double> x, const Eigen::VectorXd& values) {
  std::map<double, std::pair<double, double>> range;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = values[static_cast<Eigen::Index>(i)];
    auto [it, fresh] = range.emplace(x[i], std::make_pair(v, v));
    if (!fresh) {
      it->second.first = std::min(it->second.first, v);
      it->second.second = std::max(it->second.second, v);
    }
  }
  double out = 0.0;
  for (const auto& [l, r] : range) out = std::max(out, r.second - r.first);
  return out;
}

double grid_argmin(const std::function<double(double)>& f, int points) {
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double t = static_cast<double>(i) / points;
    const double v = f(t);
    if (v < best) {
      best = v;
      arg = t;
    }
  }
  return arg;
}

}  // namespace shapegam::testing
