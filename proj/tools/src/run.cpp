#include "run.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "shapegam/gam.hpp"
#include "shapegam/inference.hpp"
#include "shapegam/ordinal.hpp"
#include "shapegam/wps.hpp"

namespace shapegam::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct Factor {
  std::string variable;
  std::vector<std::string> levels;
  std::string mode;
  std::vector<std::string> dummy_names;
};

struct Covariates {
  Eigen::MatrixXd z;
  std::vector<std::string> names;
  std::vector<Factor> factors;
  /// Linear covariates: name and pinned value.
  std::vector<std::pair<std::string, double>> linear;
};

Factor make_factor(const std::string& variable, const std::vector<std::string>& cells) {
  Factor f;
  f.variable = variable;
  std::map<std::string, int> counts;
  for (const auto& c : cells) ++counts[c];
  for (const auto& [level, count] : counts) f.levels.push_back(level);
  const bool numeric = std::all_of(f.levels.begin(), f.levels.end(),
                                   [](const std::string& s) { return parse_number(s).has_value(); });
  if (numeric) {
    std::stable_sort(f.levels.begin(), f.levels.end(), [](const std::string& a, const std::string& b) {
      return *parse_number(a) < *parse_number(b);
    });
  }
  int best = -1;
  for (const auto& level : f.levels) {
    if (counts[level] > best) {
      best = counts[level];
      f.mode = level;
    }
  }
  for (std::size_t i = 1; i < f.levels.size(); ++i) {
    f.dummy_names.push_back("factor(" + variable + ")" + f.levels[i]);
  }
  return f;
}

Covariates build_covariates(const DataFrame& data, const ModelSpec& spec) {
  Covariates cov;
  std::vector<Eigen::VectorXd> cols;
  const auto n = static_cast<Eigen::Index>(data.rows());
  for (const Term& t : spec.terms) {
    if (t.kind == TermKind::Linear) {
      const std::vector<double> x = data.numeric_column(t.predictors[0]);
      cols.push_back(Eigen::Map<const Eigen::VectorXd>(x.data(), n));
      cov.names.push_back(t.predictors[0]);
      cov.linear.emplace_back(t.predictors[0], pinned_value(x));
    } else if (t.kind == TermKind::Factor) {
      const std::vector<std::string> cells = data.text_column(t.predictors[0]);
      Factor f = make_factor(t.predictors[0], cells);
      if (f.levels.size() < 2) {
        throw InvalidInput("factor '" + f.variable + "' has a single level");
      }
      for (std::size_t l = 1; l < f.levels.size(); ++l) {
        Eigen::VectorXd d(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          d[i] = cells[static_cast<std::size_t>(i)] == f.levels[l] ? 1.0 : 0.0;
        }
        cols.push_back(std::move(d));
        cov.names.push_back(f.dummy_names[l - 1]);
      }
      cov.factors.push_back(std::move(f));
    }
  }
  cov.z.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) cov.z.col(static_cast<Eigen::Index>(j)) = cols[j];
  return cov;
}

ojson vec_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson coef_json(const CoefTable& t) {
  ojson rows = ojson::array();
  for (const CoefRow& r : t.rows) {
    ojson j;
    j["name"] = r.name;
    j["estimate"] = r.estimate;
    j["std_error"] = r.std_error;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    rows.push_back(std::move(j));
  }
  ojson out;
  out["statistic"] = t.statistic;
  out["df"] = optional_json(t.df);
  out["dispersion"] = t.rows.empty() ? ojson(nullptr) : ojson(t.dispersion);
  out["rows"] = std::move(rows);
  return out;
}

ojson forms_json(const std::vector<ColumnForm>& forms) {
  ojson a = ojson::array();
  for (const ColumnForm& f : forms) {
    const char* base = f.base == ColumnForm::Base::Constant   ? "constant"
                       : f.base == ColumnForm::Base::Identity ? "identity"
                                                              : "spline";
    a.push_back({{"base", base}, {"index", f.index}, {"sign", f.sign}, {"shift", f.shift},
                 {"slope", f.slope}});
  }
  return a;
}

ojson factors_json(const Covariates& cov, const Eigen::VectorXd& estimates,
                   const std::vector<std::string>& names) {
  auto estimate_of = [&](const std::string& name) {
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == name) return estimates[static_cast<Eigen::Index>(k)];
    }
    return 0.0;
  };
  ojson out = ojson::array();
  for (const Factor& f : cov.factors) {
    ojson levels = ojson::array();
    for (std::size_t l = 0; l < f.levels.size(); ++l) {
      levels.push_back({{"level", f.levels[l]},
                        {"effect", l == 0 ? 0.0 : estimate_of(f.dummy_names[l - 1])}});
    }
    out.push_back({{"variable", f.variable}, {"mode", f.mode}, {"levels", std::move(levels)}});
  }
  return out;
}

ojson linear_json(const Covariates& cov, const Eigen::VectorXd& estimates,
                  const std::vector<std::string>& names) {
  ojson out = ojson::array();
  for (const auto& [name, pinned] : cov.linear) {
    double est = 0.0;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == name) est = estimates[static_cast<Eigen::Index>(k)];
    }
    out.push_back({{"name", name}, {"estimate", est}, {"pinned", pinned}});
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) s += ',';
    const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      s += '"';
      for (char c : cells[i]) {
        if (c == '"') s += '"';
        s += c;
      }
      s += '"';
    } else {
      s += cells[i];
    }
  }
  return s + "\n";
}

ShapeSpec shape_spec(const Term& t) {
  ShapeSpec s;
  s.shape = t.shape;
  if (!t.numknots.empty()) s.numknots = t.numknots[0];
  if (!t.space.empty()) s.spacing = t.space[0];
  return s;
}

FitOutput fit_cgam(const DataFrame& data, const ModelSpec& spec, const FitConfig& config) {
  const std::vector<double> yv = data.numeric_column(spec.response);
  const auto n = static_cast<Eigen::Index>(yv.size());
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), n);

  std::vector<ConeComponent> components;
  std::vector<double> pinned;
  for (const Term& t : spec.terms) {
    if (t.kind != TermKind::Shape) continue;
    const std::vector<double> x = data.numeric_column(t.predictors[0]);
    if (is_smooth(t.shape)) {
      components.push_back(build_shape_component(x, shape_spec(t), t.predictors[0]));
    } else {
      components.push_back(build_ordinal_component(x, t.shape, t.predictors[0]));
    }
    pinned.push_back(pinned_value(x));
  }
  Covariates cov = build_covariates(data, spec);
  if (components.empty() && cov.z.cols() == 0 && n == 0) {
    throw InvalidInput("the data has no rows");
  }
  if (components.empty() && cov.z.cols() == 0) {
    throw InvalidInput("the model needs at least one term");
  }
  auto cone = std::make_shared<const CompositeCone>(
      assemble_cone(std::move(components), cov.z, cov.names));

  FitOptions options;
  options.c = config.c;
  const FitResult fit = fit_model(y, config.family, cone, options);
  const CoefTable table = coef_table(fit);

  std::vector<std::string> warnings = fit.warnings;
  ojson cic = nullptr;
  if (config.nsim > 0) {
    CicOptions co;
    co.nsim = config.nsim;
    co.seed = config.seed;
    co.threads = config.threads;
    const CicResult r = simulate_cic(fit, co, options);
    cic = ojson{{"cic", r.cic},         {"e0_edf", r.e0_edf}, {"loglik", r.loglik},
                {"nsim", r.nsim},       {"failed", r.failed}, {"seed", r.seed}};
    if (r.failed > 0) {
      warnings.push_back(std::to_string(r.failed) + " null replicates failed and were dropped");
    }
  }

  FitOutput out;
  ojson comps = ojson::array();
  ojson model_comps = ojson::array();
  for (std::size_t ci = 0; ci < cone->components.size(); ++ci) {
    const ConeComponent& c = cone->components[ci];
    const ComponentFit& cf = fit.components[ci];
    std::size_t active = 0;
    for (Eigen::Index j : fit.active_set) {
      if (cone->edge_component[static_cast<std::size_t>(j)] == ci) ++active;
    }
    ojson cj;
    cj["label"] = c.label;
    cj["predictor"] = c.predictor;
    cj["shape"] = std::string(shape_name(c.shape.shape));
    cj["smooth"] = c.spline.has_value();
    cj["knots"] = c.spline ? ojson(c.spline->knots) : ojson(nullptr);
    cj["edges"] = c.edges.cols();
    cj["active_edges"] = active;
    comps.push_back(std::move(cj));

    ojson mj;
    mj["label"] = c.label;
    mj["predictor"] = c.predictor;
    mj["shape"] = std::string(shape_name(c.shape.shape));
    const auto [lo, hi] = std::minmax_element(c.x.begin(), c.x.end());
    mj["x_min"] = *lo;
    mj["x_max"] = *hi;
    mj["pinned"] = pinned[ci];
    if (c.spline) {
      mj["kind"] = "smooth";
      mj["basis"] = c.spline->kind == BasisKind::ISplineQuadratic ? "ispline" : "cspline";
      mj["anchor"] = c.spline->anchor == Anchor::Left ? "left" : "right";
      mj["knots"] = c.spline->knots;
      mj["edge_forms"] = forms_json(c.edge_forms);
      mj["edge_coefficients"] = vec_json(cf.edge_coefficients);
      mj["linear_forms"] = forms_json(c.linear_forms);
      mj["linear_coefficients"] = vec_json(cf.linear_coefficients);
    } else {
      mj["kind"] = "ordinal";
      std::vector<double> levels = c.x;
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      mj["levels"] = levels;
      mj["values"] = vec_json(component_curve(fit, ci, levels));
    }
    model_comps.push_back(std::move(mj));
  }

  ojson& s = out.summary;
  s["engine"] = "cgam";
  s["formula"] = serialize(spec);
  s["model"] = to_json(spec);
  s["family"] = std::string(fit.family.name());
  s["n"] = n;
  s["c"] = config.c;
  s["irls_iterations"] = fit.irls_iterations;
  s["edf"] = fit.edf;
  s["d0"] = fit.d0;
  s["active_set_size"] = fit.active_set.size();
  s["null_deviance"] = fit.null_deviance;
  s["residual_deviance"] = fit.residual_deviance;
  s["sigma2"] = optional_json(fit.sigma2_hat);
  s["coefficients"] = coef_json(table);
  s["components"] = std::move(comps);
  s["cic"] = std::move(cic);
  s["wps"] = nullptr;
  s["warnings"] = warnings;

  std::vector<std::string> header{"row", spec.response, "eta_hat", "mu_hat"};
  for (const ComponentFit& cf : fit.components) header.push_back(cf.label);
  std::string csv = csv_line(header);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::string> row{std::to_string(i + 1), format_number(y[i]),
                                 format_number(fit.eta_hat[i]), format_number(fit.mu_hat[i])};
    for (const ComponentFit& cf : fit.components) row.push_back(format_number(cf.values[i]));
    csv += csv_line(row);
  }
  out.fitted_csv = std::move(csv);

  ojson& m = out.model;
  m["engine"] = "cgam";
  m["family"] = std::string(fit.family.name());
  m["response"] = spec.response;
  m["intercept"] = fit.intercept;
  m["components"] = std::move(model_comps);
  m["covariates"] = linear_json(cov, fit.alpha_hat, cone->z_names);
  m["factors"] = factors_json(cov, fit.alpha_hat, cone->z_names);
  return out;
}

FitOutput fit_wps_model(const DataFrame& data, const ModelSpec& spec, const FitConfig& config) {
  if (config.family.kind() != FamilyKind::Gaussian) {
    throw InvalidInput("warped-plane fits support the gaussian family only");
  }
  const Term* wt = nullptr;
  for (const Term& t : spec.terms) {
    if (t.kind == TermKind::Wps) wt = &t;
  }
  const std::vector<double> yv = data.numeric_column(spec.response);
  const auto n = static_cast<Eigen::Index>(yv.size());
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), n);
  const std::vector<double> x1 = data.numeric_column(wt->predictors[0]);
  const std::vector<double> x2 = data.numeric_column(wt->predictors[1]);
  Covariates cov = build_covariates(data, spec);

  WpsOptions opt;
  if (!wt->numknots.empty()) {
    opt.numknots1 = wt->numknots[0];
    opt.numknots2 = wt->numknots.size() > 1 ? wt->numknots[1] : wt->numknots[0];
  }
  if (!wt->space.empty()) {
    opt.spacing1 = wt->space[0];
    opt.spacing2 = wt->space.size() > 1 ? wt->space[1] : wt->space[0];
  }
  opt.c = config.c;
  const std::vector<double> grid = config.lambda_grid.empty() ? std::vector<double>{0.0}
                                                              : config.lambda_grid;
  const WpsFit fit =
      select_lambda(y, x1, x2, cov.z, cov.names, wt->direction, opt, grid, config.threads);

  std::vector<std::string> warnings = fit.warnings;
  if (config.nsim > 0) {
    warnings.push_back("the information criterion is not computed for warped-plane fits");
  }
  const double ybar = y.mean();
  const Eigen::VectorXd surface = fit.design.basis * fit.beta_hat;

  FitOutput out;
  ojson& s = out.summary;
  s["engine"] = "wps";
  s["formula"] = serialize(spec);
  s["model"] = to_json(spec);
  s["family"] = "gaussian";
  s["n"] = n;
  s["c"] = config.c;
  s["irls_iterations"] = 1;
  s["edf"] = fit.edfc;
  s["d0"] = 1 + cov.z.cols();
  s["active_set_size"] = fit.active_rows.size();
  s["null_deviance"] = (y.array() - ybar).square().sum();
  s["residual_deviance"] = fit.sse;
  s["sigma2"] = optional_json(fit.sigma2_hat);
  s["coefficients"] = coef_json(fit.coefficients);
  s["components"] = ojson::array({ojson{{"label", term_label(*wt)},
                                        {"predictor", wt->predictors[0] + "," + wt->predictors[1]},
                                        {"shape", std::string(direction_name(wt->direction))},
                                        {"smooth", false},
                                        {"knots", ojson{{"x1", fit.design.knots1.knots},
                                                        {"x2", fit.design.knots2.knots}}},
                                        {"edges", fit.design.constraints.rows()},
                                        {"active_edges", fit.active_rows.size()}}});
  s["cic"] = nullptr;
  std::vector<double> sorted_grid = grid;
  std::sort(sorted_grid.begin(), sorted_grid.end());
  sorted_grid.erase(std::unique(sorted_grid.begin(), sorted_grid.end()), sorted_grid.end());
  s["wps"] = ojson{{"direction", std::string(direction_name(wt->direction))},
                   {"lambda", fit.lambda_used},
                   {"lambda_grid", sorted_grid},
                   {"gcv", fit.gcv},
                   {"edfc", fit.edfc},
                   {"sse", fit.sse},
                   {"k1", fit.design.k1()},
                   {"k2", fit.design.k2()}};
  s["warnings"] = warnings;

  std::string csv =
      csv_line({"row", spec.response, "eta_hat", "mu_hat", "surface", "unconstrained_mu"});
  for (Eigen::Index i = 0; i < n; ++i) {
    csv += csv_line({std::to_string(i + 1), format_number(y[i]), format_number(fit.mu_hat[i]),
                     format_number(fit.mu_hat[i]), format_number(surface[i]),
                     format_number(fit.unconstrained_mu[i])});
  }
  out.fitted_csv = std::move(csv);

  ojson& m = out.model;
  m["engine"] = "wps";
  m["family"] = "gaussian";
  m["response"] = spec.response;
  m["direction"] = std::string(direction_name(wt->direction));
  m["x1"] = wt->predictors[0];
  m["x2"] = wt->predictors[1];
  m["knots1"] = fit.design.knots1.knots;
  m["knots2"] = fit.design.knots2.knots;
  m["beta"] = vec_json(fit.beta_hat);
  m["covariates"] = linear_json(cov, fit.alpha_hat, cov.names);
  m["factors"] = factors_json(cov, fit.alpha_hat, cov.names);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw InvalidInput("failed writing '" + path.string() + "'");
}

}  // namespace

double pinned_value(std::vector<double> x) {
  if (x.empty()) throw InvalidInput("cannot pin an empty predictor");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const double median = n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
  const auto it = std::upper_bound(x.begin(), x.end(), median);
  return *(it - 1);
}

FitOutput fit_dataset(const DataFrame& data, const ModelSpec& spec, const FitConfig& config) {
  if (data.rows() == 0) throw InvalidInput("the data has no rows");
  if (config.nsim < 0) throw InvalidInput("nsim must be non-negative");
  return spec.is_wps() ? fit_wps_model(data, spec, config) : fit_cgam(data, spec, config);
}

int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnexpected;
  }
}

int run_fit(const FitConfig& config, std::ostream& err) {
  try {
    const ModelSpec spec = parse_model_spec(config.model);
    const DataFrame data = DataFrame::read_file(config.data_path);
    const FitOutput out = fit_dataset(data, spec, config);
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw InvalidInput("cannot create output directory '" + config.out_dir + "'");
    const std::filesystem::path dir(config.out_dir);
    write_file(dir / "summary.json", out.summary.dump(2) + "\n");
    write_file(dir / "fitted.csv", out.fitted_csv);
    write_file(dir / "model.json", out.model.dump(2) + "\n");
    for (const auto& w : out.summary["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
    return kExitOk;
  } catch (...) {
    return report_exception(err);
  }
}

}  // namespace shapegam::cli
