#pragma once

#include <optional>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

namespace shapegam::cli {

struct GridConfig {
  std::string fit_dir;
  std::string x1;
  std::string x2;
  int resolution = 25;
  /// "mean" or "eta".
  std::string scale = "mean";
  std::optional<std::string> categ;
  /// Defaults to <fit_dir>/grid.csv.
  std::string out;
};

/// Long-format grid CSV (x1, x2, level, value) from a saved model document.
std::string export_surface_grid(const nlohmann::json& model, const GridConfig& config);

int run_grid(const GridConfig& config, std::ostream& err);

}  // namespace shapegam::cli
