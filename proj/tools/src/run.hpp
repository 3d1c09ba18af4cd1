#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "formula.hpp"
#include "shapegam/family.hpp"

namespace shapegam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConvergence = 3;

struct FitConfig {
  std::string data_path;
  std::string model;
  std::string out_dir;
  Family family = Family::gaussian();
  int nsim = 0;
  std::uint64_t seed = 0;
  double c = 1.2;
  std::vector<double> lambda_grid;
  int threads = 1;
};

/// Everything `fit` writes, before it touches the file system.
struct FitOutput {
  nlohmann::ordered_json summary;
  std::string fitted_csv;
  /// Curve and surface evaluators consumed by `grid`.
  nlohmann::ordered_json model;
};

FitOutput fit_dataset(const DataFrame& data, const ModelSpec& spec, const FitConfig& config);

/// Runs `fit` end to end and returns the process exit status. Diagnostics
/// go to `err`.
int run_fit(const FitConfig& config, std::ostream& err);

/// Maps the in-flight exception to an exit status and prints it.
int report_exception(std::ostream& err);

/// Largest observed value that does not exceed the median.
double pinned_value(std::vector<double> x);

}  // namespace shapegam::cli
