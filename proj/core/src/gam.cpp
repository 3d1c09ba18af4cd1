#include "shapegam/gam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "linalg.hpp"
#include "shapegam/inference.hpp"

namespace shapegam {

namespace {

constexpr double kDependentTol = 1e-9;
constexpr double kEdgeDropTol = 1e-8;
constexpr double kParallelTol = 1e-10;
constexpr double kMinVariance = 1e-10;
constexpr double kSeparationTol = 1e-8;
constexpr double kGolden = 0.6180339887498949;

Eigen::VectorXd residual_twice(const Eigen::VectorXd& v, const Eigen::MatrixXd& q) {
  if (q.cols() == 0) return v;
  Eigen::VectorXd r = v - q * (q.transpose() * v);
  return r - q * (q.transpose() * r);
}

void check_options(const FitOptions& options) {
  if (!(options.c >= 1.0 && options.c <= 2.0)) {
    throw InvalidInput("c must lie in [1, 2], got " + std::to_string(options.c));
  }
  if (options.max_iter < 1) throw InvalidInput("max_iter must be positive");
  if (!(options.tol > 0.0)) throw InvalidInput("tol must be positive");
}

void check_response(const Eigen::VectorXd& y, const CompositeCone& cone) {
  if (y.size() != cone.n()) {
    throw InvalidInput("response has " + std::to_string(y.size()) + " values but the model has " +
                       std::to_string(cone.n()) + " rows");
  }
  if (y.size() <= cone.d0) {
    throw InvalidInput("need more observations (" + std::to_string(y.size()) +
                       ") than linear-space dimensions (" + std::to_string(cone.d0) + ")");
  }
}

// Splits eta = raw_edges b + L a and fills the per-component pieces.
void decompose(FitResult& fit, const Eigen::VectorXd& b) {
  const CompositeCone& cone = *fit.cone;
  fit.edge_coefficients = b;
  Eigen::VectorXd rest = fit.eta_hat;
  if (cone.num_edges() > 0) rest -= cone.raw_edges * b;
  const Eigen::VectorXd a = detail::least_squares(cone.linear_basis, rest);
  fit.linear_coefficients = a;
  fit.intercept = a[0];
  fit.alpha_hat.resize(static_cast<Eigen::Index>(cone.z_cols.size()));
  for (std::size_t k = 0; k < cone.z_cols.size(); ++k) {
    fit.alpha_hat[static_cast<Eigen::Index>(k)] = a[cone.z_cols[k]];
  }

  fit.components.clear();
  for (std::size_t ci = 0; ci < cone.components.size(); ++ci) {
    const ConeComponent& comp = cone.components[ci];
    ComponentFit cf;
    cf.label = comp.label;
    cf.values = Eigen::VectorXd::Zero(cone.n());
    cf.edge_coefficients = Eigen::VectorXd::Zero(comp.edges.cols());
    cf.linear_coefficients = Eigen::VectorXd::Zero(comp.linear_part.cols());
    for (Eigen::Index j = 0; j < cone.num_edges(); ++j) {
      if (cone.edge_component[static_cast<std::size_t>(j)] != ci) continue;
      const Eigen::Index local = cone.edge_local[static_cast<std::size_t>(j)];
      cf.edge_coefficients[local] = b[j];
      cf.values += b[j] * comp.edges.col(local);
    }
    for (const auto& [col, local] : cone.component_linear[ci]) {
      cf.linear_coefficients[local] = a[col];
      cf.values += a[col] * comp.linear_part.col(local);
    }
    fit.components.push_back(std::move(cf));
  }
}

double weighted_null_deviance(const Family& family, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& w) {
  const double ybar = w.size() > 0 ? w.dot(y) / w.sum() : y.mean();
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(y.size(), ybar);
  if (family.kind() == FamilyKind::Gaussian && w.size() > 0) {
    return w.dot((y - mu).cwiseAbs2());
  }
  return family.deviance(y, mu);
}

void fill_sigma2(FitResult& fit, double ssr) {
  const double denom = static_cast<double>(fit.n()) - static_cast<double>(fit.d0) - fit.c * fit.edf;
  if (denom > 0.0) {
    fit.sigma2_hat = estimate_sigma2(ssr, fit.n(), fit.d0,
                                     static_cast<Eigen::Index>(fit.active_set.size()), fit.c);
  } else {
    fit.warnings.push_back(
        "variance estimate unavailable: n - d0 - c*EDF is not positive; use fewer knots or a "
        "smaller c");
  }
}

}  // namespace

CompositeCone assemble_cone(std::vector<ConeComponent> components, const Eigen::MatrixXd& z,
                            std::vector<std::string> z_names) {
  Eigen::Index n = -1;
  for (const auto& c : components) {
    const Eigen::Index rows = std::max(c.edges.rows(), c.linear_part.rows());
    if (n >= 0 && rows != n) throw InvalidInput("components differ in length");
    n = rows;
  }
  if (z.rows() > 0 || z.cols() > 0) {
    if (n >= 0 && z.rows() != n) throw InvalidInput("covariates and components differ in length");
    n = z.rows();
  }
  if (n <= 0) throw InvalidInput("a model needs at least one term");
  if (z_names.empty()) {
    for (Eigen::Index k = 0; k < z.cols(); ++k) z_names.push_back("z" + std::to_string(k + 1));
  }
  if (static_cast<Eigen::Index>(z_names.size()) != z.cols()) {
    throw InvalidInput("covariate names do not match the covariate columns");
  }
  if (!z.allFinite()) throw InvalidInput("covariates contain non-finite values");

  CompositeCone out;
  out.components = std::move(components);
  out.component_linear.resize(out.components.size());
  out.z_names = std::move(z_names);

  std::vector<Eigen::VectorXd> kept_cols;
  Eigen::MatrixXd q(n, 0);
  auto try_add = [&](const Eigen::VectorXd& v) {
    const double norm = v.norm();
    const Eigen::VectorXd r = residual_twice(v, q);
    if (norm == 0.0 || r.norm() <= kDependentTol * norm) return false;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = r / r.norm();
    kept_cols.push_back(v);
    return true;
  };

  try_add(Eigen::VectorXd::Ones(n));
  for (std::size_t ci = 0; ci < out.components.size(); ++ci) {
    const ConeComponent& c = out.components[ci];
    for (Eigen::Index j = 0; j < c.linear_part.cols(); ++j) {
      if (try_add(c.linear_part.col(j))) {
        out.component_linear[ci].emplace_back(static_cast<Eigen::Index>(kept_cols.size()) - 1, j);
      }
    }
  }
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    const std::string& name = out.z_names[static_cast<std::size_t>(k)];
    if (!try_add(z.col(k))) {
      throw RankError("covariate '" + name + "' is collinear with the other model terms", name);
    }
    out.z_cols.push_back(static_cast<Eigen::Index>(kept_cols.size()) - 1);
  }
  out.linear_basis.resize(n, static_cast<Eigen::Index>(kept_cols.size()));
  for (std::size_t j = 0; j < kept_cols.size(); ++j) {
    out.linear_basis.col(static_cast<Eigen::Index>(j)) = kept_cols[j];
  }
  out.d0 = out.linear_basis.cols();

  std::vector<Eigen::VectorXd> edges, raw, unit;
  for (std::size_t ci = 0; ci < out.components.size(); ++ci) {
    const ConeComponent& c = out.components[ci];
    for (Eigen::Index j = 0; j < c.edges.cols(); ++j) {
      const Eigen::VectorXd e = c.edges.col(j);
      const Eigen::VectorXd r = residual_twice(e, q);
      const std::string name = "edge " + std::to_string(j + 1) + " of " + c.label;
      if (e.norm() == 0.0 || r.norm() <= kEdgeDropTol * e.norm()) {
        out.warnings.push_back(name + " lies in the linear space and was dropped");
        continue;
      }
      const Eigen::VectorXd u = r / r.norm();
      const bool duplicate = std::any_of(unit.begin(), unit.end(), [&](const Eigen::VectorXd& o) {
        return o.dot(u) > 1.0 - kParallelTol;
      });
      if (duplicate) {
        out.warnings.push_back(name + " duplicates an earlier edge and was dropped");
        continue;
      }
      edges.push_back(r);
      raw.push_back(e);
      unit.push_back(u);
      out.edge_component.push_back(ci);
      out.edge_local.push_back(j);
    }
  }
  out.edges.resize(n, static_cast<Eigen::Index>(edges.size()));
  out.raw_edges.resize(n, static_cast<Eigen::Index>(edges.size()));
  for (std::size_t j = 0; j < edges.size(); ++j) {
    out.edges.col(static_cast<Eigen::Index>(j)) = edges[j];
    out.raw_edges.col(static_cast<Eigen::Index>(j)) = raw[j];
  }
  out.generator = GeneratorCone(out.edges, out.linear_basis);
  return out;
}

FitResult fit_gaussian(const Eigen::VectorXd& y, std::shared_ptr<const CompositeCone> cone,
                       const Eigen::VectorXd& weights, const FitOptions& options) {
  if (!cone) throw InvalidInput("missing cone");
  check_options(options);
  check_response(y, *cone);
  Family::gaussian().validate(y);

  const ConeProjectionResult proj =
      project_generator_cone(y, cone->generator, weights, options.solver);

  FitResult fit;
  fit.family = Family::gaussian();
  fit.cone = cone;
  fit.y = y;
  fit.eta_hat = proj.theta;
  fit.mu_hat = proj.theta;
  fit.active_set = proj.active_set;
  fit.d0 = cone->d0;
  fit.edf = static_cast<double>(fit.active_set.size() + static_cast<std::size_t>(fit.d0));
  fit.c = options.c;
  fit.weights = weights.size() > 0 ? weights : Eigen::VectorXd::Ones(y.size());
  fit.working_response = y;
  fit.irls_iterations = 1;
  fit.warnings = cone->warnings;
  decompose(fit, proj.edge_coefficients);

  const Eigen::VectorXd resid = y - fit.mu_hat;
  fit.residual_deviance = fit.weights.dot(resid.cwiseAbs2());
  fit.null_deviance = weighted_null_deviance(fit.family, y, fit.weights);
  fit.deviance_trace = {fit.residual_deviance};
  fill_sigma2(fit, fit.residual_deviance);
  return fit;
}

LineSearchResult line_search_segment(
    const Eigen::VectorXd& eta_k, const Eigen::VectorXd& eta_star,
    const std::function<double(const Eigen::VectorXd&)>& negloglik) {
  if (eta_k.size() != eta_star.size()) throw InvalidInput("segment end points differ in length");
  if (!eta_k.allFinite() || !eta_star.allFinite()) {
    throw InvalidInput("segment end points must be finite");
  }
  const double f0 = negloglik(eta_k);
  if (!std::isfinite(f0)) throw InvalidInput("objective is not finite at the segment start");

  LineSearchResult out;
  const Eigen::VectorXd dir = eta_star - eta_k;
  if (dir.squaredNorm() == 0.0) {
    out.eta = eta_k;
    return out;
  }
  auto f = [&](double t) {
    const double v = negloglik(eta_k + t * dir);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  bool any_finite = false;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  any_finite = std::isfinite(f1) || std::isfinite(f2);
  while (hi - lo > 1e-6) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
      any_finite = any_finite || std::isfinite(f1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
      any_finite = any_finite || std::isfinite(f2);
    }
  }
  const double t_gs = 0.5 * (lo + hi);
  const double f_gs = f(t_gs);
  const double f_one = f(1.0);
  any_finite = any_finite || std::isfinite(f_gs) || std::isfinite(f_one);

  if (!any_finite) {
    out.eta = eta_k;
    out.stalled = true;
    return out;
  }
  if (f_one <= f_gs && f_one <= f0) {
    out.t = 1.0;
  } else if (f_gs <= f0) {
    out.t = t_gs;
  } else {
    out.t = 0.0;
  }
  out.eta = out.t == 1.0 ? eta_star : Eigen::VectorXd(eta_k + out.t * dir);
  return out;
}

FitResult fit_irls(const Eigen::VectorXd& y, const Family& family,
                   std::shared_ptr<const CompositeCone> cone, const FitOptions& options) {
  if (family.kind() == FamilyKind::Gaussian) return fit_gaussian(y, std::move(cone), {}, options);
  if (!cone) throw InvalidInput("missing cone");
  check_options(options);
  check_response(y, *cone);
  family.validate(y);

  const Eigen::MatrixXd& l = cone->linear_basis;
  Eigen::VectorXd eta = l * detail::least_squares(l, family.link(family.starting_mean(y)));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(cone->num_edges());
  auto objective = [&](const Eigen::VectorXd& e) { return family.negloglik(y, e); };

  FitResult fit;
  fit.family = family;
  fit.cone = cone;
  fit.y = y;
  fit.warnings = cone->warnings;
  double dev = family.deviance(y, family.mean(eta));
  fit.deviance_trace.push_back(dev);

  bool converged = false;
  int iter = 0;
  std::vector<Eigen::Index> active;
  while (iter < options.max_iter) {
    ++iter;
    const Eigen::VectorXd mu = family.mean(eta);
    const Eigen::VectorXd w =
        mu.unaryExpr([&](double m) { return std::max(family.variance(m), kMinVariance); });
    const Eigen::VectorXd z = eta + (y - mu).cwiseQuotient(w);
    const ConeProjectionResult proj = project_generator_cone(z, cone->generator, w, options.solver);
    active = proj.active_set;

    const LineSearchResult step = line_search_segment(eta, proj.theta, objective);
    if (step.stalled) {
      fit.stalled = true;
      fit.warnings.push_back("line search stalled: objective infinite along the whole segment");
      converged = true;
      break;
    }
    const double next = family.deviance(y, family.mean(step.eta));
    if (next > dev) {
      // Rounding between the likelihood and the deviance; the step start is the segment minimum.
      fit.deviance_trace.push_back(dev);
      converged = true;
      break;
    }
    eta = step.eta;
    b = (1.0 - step.t) * b + step.t * proj.edge_coefficients;
    fit.deviance_trace.push_back(next);
    const double change = std::abs(dev - next) / (std::abs(dev) + 0.1);
    dev = next;
    if (change < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::string trace;
    const std::size_t from = fit.deviance_trace.size() > 5 ? fit.deviance_trace.size() - 5 : 0;
    for (std::size_t i = from; i < fit.deviance_trace.size(); ++i) {
      trace += (i > from ? ", " : "") + std::to_string(fit.deviance_trace[i]);
    }
    throw ConvergenceError("IRLS did not converge in " + std::to_string(options.max_iter) +
                               " iterations; last deviances: " + trace,
                           eta, dev, iter);
  }

  fit.eta_hat = eta;
  fit.mu_hat = family.mean(eta);
  fit.active_set = active;
  fit.d0 = cone->d0;
  fit.edf = static_cast<double>(active.size() + static_cast<std::size_t>(fit.d0));
  fit.c = options.c;
  fit.irls_iterations = iter;
  fit.residual_deviance = dev;
  fit.null_deviance = weighted_null_deviance(family, y, Eigen::VectorXd());
  fit.weights =
      fit.mu_hat.unaryExpr([&](double m) { return std::max(family.variance(m), kMinVariance); });
  fit.working_response = eta + (y - fit.mu_hat).cwiseQuotient(fit.weights);
  if (family.kind() == FamilyKind::Binomial) {
    fit.separation = (fit.mu_hat.array() < kSeparationTol).any() ||
                     (fit.mu_hat.array() > 1.0 - kSeparationTol).any();
    if (fit.separation) {
      fit.warnings.push_back("fitted probabilities numerically 0 or 1: possible separation");
    }
  }
  decompose(fit, b);
  return fit;
}

FitResult fit_model(const Eigen::VectorXd& y, const Family& family,
                    std::shared_ptr<const CompositeCone> cone, const FitOptions& options) {
  if (family.kind() == FamilyKind::Gaussian) return fit_gaussian(y, std::move(cone), {}, options);
  return fit_irls(y, family, std::move(cone), options);
}

Eigen::VectorXd component_curve(const FitResult& fit, std::size_t component,
                                std::span<const double> x) {
  const CompositeCone& cone = *fit.cone;
  if (component >= cone.components.size()) throw InvalidInput("component index out of range");
  const ConeComponent& comp = cone.components[component];
  const ComponentFit& cf = fit.components[component];
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));

  if (!comp.spline) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto it = std::find(comp.x.begin(), comp.x.end(), x[i]);
      if (it == comp.x.end()) {
        throw InvalidInput("value " + std::to_string(x[i]) + " is not a level of " + comp.predictor);
      }
      out[static_cast<Eigen::Index>(i)] = cf.values[it - comp.x.begin()];
    }
    return out;
  }

  const Eigen::MatrixXd raw = comp.spline->evaluate(x);
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const Eigen::RowVectorXd row = raw.row(i);
    const double xi = x[static_cast<std::size_t>(i)];
    double v = 0.0;
    for (std::size_t j = 0; j < comp.edge_forms.size(); ++j) {
      const double coef = cf.edge_coefficients[static_cast<Eigen::Index>(j)];
      if (coef != 0.0) v += coef * evaluate_form(comp.edge_forms[j], xi, row);
    }
    for (std::size_t j = 0; j < comp.linear_forms.size(); ++j) {
      const double coef = cf.linear_coefficients[static_cast<Eigen::Index>(j)];
      if (coef != 0.0) v += coef * evaluate_form(comp.linear_forms[j], xi, row);
    }
    out[i] = v;
  }
  return out;
}

}  // namespace shapegam
