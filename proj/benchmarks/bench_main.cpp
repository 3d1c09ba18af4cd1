#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>

#include "shapegam/gam.hpp"
#include "shapegam/ordinal.hpp"
#include "shapegam/wps.hpp"

namespace {

using namespace shapegam;

std::vector<double> sorted_uniform(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = u(gen);
  std::sort(x.begin(), x.end());
  return x;
}

void BM_GeneratorProjection(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto m = static_cast<Eigen::Index>(state.range(1));
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  const Eigen::MatrixXd edges = Eigen::MatrixXd::NullaryExpr(n, m, [&] { return z(gen); });
  const GeneratorCone cone(edges, Eigen::MatrixXd::Ones(n, 1));
  const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(n, [&] { return z(gen); });
  for (auto _ : state) benchmark::DoNotOptimize(project_generator_cone(y, cone));
}
BENCHMARK(BM_GeneratorProjection)->Args({50, 10})->Args({200, 20})->Args({500, 40});

void BM_IsotonicFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(2);
  std::normal_distribution<double> z;
  const std::vector<double> x = sorted_uniform(gen, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = x[static_cast<std::size_t>(i)] + z(gen);
  const auto cone = std::make_shared<const CompositeCone>(
      assemble_cone({build_ordinal_component(x, Shape::Incr)}, Eigen::MatrixXd(n, 0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_gaussian(y, cone));
}
BENCHMARK(BM_IsotonicFit)->Arg(50)->Arg(200);

void BM_PoissonAdditiveFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(3);
  const std::vector<double> x1 = sorted_uniform(gen, n);
  std::vector<double> x2 = sorted_uniform(gen, n);
  std::shuffle(x2.begin(), x2.end(), gen);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double mu = std::exp(x1[static_cast<std::size_t>(i)] - x2[static_cast<std::size_t>(i)] * x2[static_cast<std::size_t>(i)]);
    y[i] = std::poisson_distribution<int>(mu)(gen);
  }
  std::vector<ConeComponent> comps{build_shape_component(x1, {Shape::SIncr, std::nullopt, KnotSpacing::Equal}, "x1"),
                                   build_shape_component(x2, {Shape::SDecrConc, std::nullopt, KnotSpacing::Equal}, "x2")};
  const auto cone = std::make_shared<const CompositeCone>(assemble_cone(std::move(comps), Eigen::MatrixXd(n, 0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_irls(y, Family::poisson(), cone));
}
BENCHMARK(BM_PoissonAdditiveFit)->Arg(200)->Arg(1000);

void BM_WarpedPlaneFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 0.3);
  std::vector<double> x1(static_cast<std::size_t>(n)), x2(static_cast<std::size_t>(n));
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x1[static_cast<std::size_t>(i)] = u(gen);
    x2[static_cast<std::size_t>(i)] = u(gen);
    y[i] = x1[static_cast<std::size_t>(i)] * x2[static_cast<std::size_t>(i)] + z(gen);
  }
  WpsOptions opt;
  opt.lambda = static_cast<double>(state.range(1)) / 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_wps(y, x1, x2, Eigen::MatrixXd(), {}, WpsDirection::II, opt));
  }
}
BENCHMARK(BM_WarpedPlaneFit)->Args({200, 0})->Args({200, 5})->Args({1000, 5});

}  // namespace

BENCHMARK_MAIN();
