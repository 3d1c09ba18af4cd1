#include "surface.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "csv.hpp"
#include "run.hpp"
#include "shapegam/family.hpp"
#include "shapegam/spline_basis.hpp"
#include "shapegam/wps.hpp"

namespace shapegam::cli {

namespace {

using json = nlohmann::json;

std::vector<double> linspace(double lo, double hi, int k) {
  std::vector<double> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (k - 1);
  out.back() = hi;
  return out;
}

ColumnForm form_from(const json& j) {
  ColumnForm f;
  const std::string base = j.at("base");
  f.base = base == "constant"   ? ColumnForm::Base::Constant
           : base == "identity" ? ColumnForm::Base::Identity
                                : ColumnForm::Base::Spline;
  f.index = j.at("index");
  f.sign = j.at("sign");
  f.shift = j.at("shift");
  f.slope = j.at("slope");
  return f;
}

// Component value at x; ordinal components interpolate linearly between levels.
std::vector<double> component_values(const json& c, const std::vector<double>& x) {
  std::vector<double> out(x.size(), 0.0);
  if (c.at("kind") == "ordinal") {
    const std::vector<double> lv = c.at("levels");
    const std::vector<double> val = c.at("values");
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = std::clamp(x[i], lv.front(), lv.back());
      auto it = std::upper_bound(lv.begin(), lv.end(), v);
      if (it == lv.end()) {
        out[i] = val.back();
        continue;
      }
      const auto hi = static_cast<std::size_t>(it - lv.begin());
      if (hi == 0) {
        out[i] = val.front();
        continue;
      }
      const double w = (v - lv[hi - 1]) / (lv[hi] - lv[hi - 1]);
      out[i] = (1.0 - w) * val[hi - 1] + w * val[hi];
    }
    return out;
  }
  SplineFamily fam;
  fam.kind = c.at("basis") == "ispline" ? BasisKind::ISplineQuadratic : BasisKind::CSplineCubic;
  fam.anchor = c.at("anchor") == "left" ? Anchor::Left : Anchor::Right;
  fam.knots = c.at("knots").get<std::vector<double>>();
  const Eigen::MatrixXd raw = fam.evaluate(x);
  const json& ef = c.at("edge_forms");
  const json& lf = c.at("linear_forms");
  const std::vector<double> eb = c.at("edge_coefficients");
  const std::vector<double> lb = c.at("linear_coefficients");
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::RowVectorXd row = raw.row(static_cast<Eigen::Index>(i));
    double v = 0.0;
    for (std::size_t j = 0; j < eb.size(); ++j) {
      if (eb[j] != 0.0) v += eb[j] * evaluate_form(form_from(ef[j]), x[i], row);
    }
    for (std::size_t j = 0; j < lb.size(); ++j) {
      if (lb[j] != 0.0) v += lb[j] * evaluate_form(form_from(lf[j]), x[i], row);
    }
    out[i] = v;
  }
  return out;
}

// Offsets contributed by covariates for each requested factor level.
std::vector<std::pair<std::string, double>> level_offsets(const json& model,
                                                          const std::optional<std::string>& categ) {
  double base = 0.0;
  for (const auto& c : model.at("covariates")) {
    base += c.at("estimate").get<double>() * c.at("pinned").get<double>();
  }
  const json* by = nullptr;
  for (const auto& f : model.at("factors")) {
    if (categ && f.at("variable") == *categ) {
      by = &f;
      continue;
    }
    for (const auto& l : f.at("levels")) {
      if (l.at("level") == f.at("mode")) base += l.at("effect").get<double>();
    }
  }
  if (categ && !by) throw InvalidInput("'" + *categ + "' is not a factor in the model");
  std::vector<std::pair<std::string, double>> out;
  if (!by) {
    out.emplace_back("", base);
    return out;
  }
  for (const auto& l : by->at("levels")) {
    out.emplace_back(l.at("level").get<std::string>(), base + l.at("effect").get<double>());
  }
  return out;
}

}  // namespace

std::string export_surface_grid(const nlohmann::json& model, const GridConfig& config) {
  if (config.resolution < 2) throw InvalidInput("resolution must be at least 2");
  if (config.scale != "mean" && config.scale != "eta") {
    throw InvalidInput("scale must be 'mean' or 'eta'");
  }
  if (config.x1 == config.x2) throw InvalidInput("x1 and x2 must differ");
  const auto family = parse_family(model.at("family").get<std::string>());
  if (!family) throw InvalidInput("model document has an unknown family");
  const int r = config.resolution;
  std::vector<double> g1, g2;
  std::vector<double> surface(static_cast<std::size_t>(r * r), 0.0);

  if (model.at("engine") == "wps") {
    const std::string m1 = model.at("x1"), m2 = model.at("x2");
    const bool swapped = config.x1 == m2 && config.x2 == m1;
    if (!swapped && !(config.x1 == m1 && config.x2 == m2)) {
      throw InvalidInput("the surface is over '" + m1 + "' and '" + m2 + "'");
    }
    KnotSequence k1, k2;
    k1.knots = model.at("knots1").get<std::vector<double>>();
    k2.knots = model.at("knots2").get<std::vector<double>>();
    const std::vector<double> beta = model.at("beta");
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    const std::vector<double> a1 = linspace(k1.front(), k1.back(), r);
    const std::vector<double> a2 = linspace(k2.front(), k2.back(), r);
    g1 = swapped ? a2 : a1;
    g2 = swapped ? a1 : a2;
    std::vector<double> p1, p2;
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        const double v1 = g1[static_cast<std::size_t>(i)], v2 = g2[static_cast<std::size_t>(j)];
        p1.push_back(swapped ? v2 : v1);
        p2.push_back(swapped ? v1 : v2);
      }
    }
    const Eigen::VectorXd s = wps_basis(p1, p2, k1, k2) * b;
    for (Eigen::Index i = 0; i < s.size(); ++i) surface[static_cast<std::size_t>(i)] = s[i];
  } else {
    const json& comps = model.at("components");
    const json* c1 = nullptr;
    const json* c2 = nullptr;
    for (const auto& c : comps) {
      if (c.at("predictor") == config.x1) c1 = &c;
      if (c.at("predictor") == config.x2) c2 = &c;
    }
    if (comps.size() < 2) {
      throw InvalidInput("a surface needs at least two nonparametric predictors in the model");
    }
    if (!c1) throw InvalidInput("predictor '" + config.x1 + "' is not a shape term of the model");
    if (!c2) throw InvalidInput("predictor '" + config.x2 + "' is not a shape term of the model");
    g1 = linspace(c1->at("x_min"), c1->at("x_max"), r);
    g2 = linspace(c2->at("x_min"), c2->at("x_max"), r);
    const std::vector<double> f1 = component_values(*c1, g1);
    const std::vector<double> f2 = component_values(*c2, g2);
    double rest = model.at("intercept").get<double>();
    for (const auto& c : comps) {
      if (&c == c1 || &c == c2) continue;
      rest += component_values(c, {c.at("pinned").get<double>()})[0];
    }
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        surface[static_cast<std::size_t>(i * r + j)] =
            rest + f1[static_cast<std::size_t>(i)] + f2[static_cast<std::size_t>(j)];
      }
    }
  }

  std::string csv = "x1,x2,level,value\n";
  for (const auto& [level, offset] : level_offsets(model, config.categ)) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        const double eta = surface[static_cast<std::size_t>(i * r + j)] + offset;
        const double v = config.scale == "mean" ? family->mean(eta) : eta;
        std::string label = level;
        if (label.find_first_of(",\"") != std::string::npos) {
          std::string q = "\"";
          for (char ch : label) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          label = q + "\"";
        }
        csv += format_number(g1[static_cast<std::size_t>(i)]) + "," +
               format_number(g2[static_cast<std::size_t>(j)]) + "," + label + "," +
               format_number(v) + "\n";
      }
    }
  }
  return csv;
}

int run_grid(const GridConfig& config, std::ostream& err) {
  try {
    const std::filesystem::path dir(config.fit_dir);
    std::ifstream in(dir / "model.json");
    if (!in) throw InvalidInput("no model.json in '" + config.fit_dir + "'; run fit first");
    json model;
    try {
      in >> model;
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("model.json is not valid JSON: ") + e.what());
    }
    std::string csv;
    try {
      csv = export_surface_grid(model, config);
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("model.json is malformed: ") + e.what());
    }
    const std::filesystem::path out = config.out.empty() ? dir / "grid.csv" : std::filesystem::path(config.out);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + out.string() + "'");
    f << csv;
    return kExitOk;
  } catch (...) {
    return report_exception(err);
  }
}

}  // namespace shapegam::cli
