#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "shapegam/ordinal.hpp"

namespace {

using namespace shapegam;
using shapegam::testing::Rng;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd rows(Eigen::Index r, Eigen::Index c, std::initializer_list<double> v) {
  MatrixXd m(r, c);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = *it++;
  }
  return m;
}

std::vector<double> random_levels(Rng& rng, int n, int nlevels, bool centered) {
  std::vector<double> x;
  for (int i = 0; i < n; ++i) {
    const int l = i < nlevels ? i : rng.integer(0, nlevels - 1);
    x.push_back(centered ? l - nlevels / 2 : l);
  }
  std::shuffle(x.begin(), x.end(), rng.engine());
  return x;
}

TEST(OrdinalConstraints, IncreasingDistinct) {
  const std::vector<double> x{1, 2, 3};
  const ConstraintCone c = ordinal_constraint_matrices(x, make_ordering(x, Shape::Incr));
  EXPECT_EQ(c.inequality(), rows(2, 3, {-1, 1, 0, 0, -1, 1}));
  EXPECT_EQ(c.equality().rows(), 0);
}

TEST(OrdinalConstraints, TreeAgainstPlacebo) {
  const std::vector<double> x{0, 1, 2};
  const ConstraintCone c = ordinal_constraint_matrices(x, make_ordering(x, Shape::Tree));
  EXPECT_EQ(c.inequality(), rows(2, 3, {-1, 1, 0, -1, 0, 1}));
}

TEST(OrdinalConstraints, UmbrellaRisesThenFalls) {
  const std::vector<double> x{-1, 0, 1};
  const ConstraintCone c = ordinal_constraint_matrices(x, make_ordering(x, Shape::Umbrella));
  EXPECT_EQ(c.inequality(), rows(2, 3, {-1, 1, 0, 0, 1, -1}));
}

TEST(OrdinalConstraints, TiesBecomeEqualities) {
  const std::vector<double> x{2, 1, 2, 1};
  const ConstraintCone c = ordinal_constraint_matrices(x, make_ordering(x, Shape::Incr));
  EXPECT_EQ(c.inequality().rows(), 1);
  EXPECT_EQ(c.equality().rows(), 2);
  const VectorXd tied = (VectorXd(4) << 5, 3, 5, 3).finished();
  EXPECT_LT((c.equality() * tied).norm(), 1e-15);
  EXPECT_GT((c.inequality() * tied)[0], 0.0);
}

TEST(OrdinalConstraints, UmbrellaWithModeAtEndIsMonotone) {
  const std::vector<double> x{0, 1, 2, 3};
  const ConstraintCone c = ordinal_constraint_matrices(x, make_ordering(x, Shape::Umbrella));
  EXPECT_EQ(c.inequality(), rows(3, 4, {1, -1, 0, 0, 0, 1, -1, 0, 0, 0, 1, -1}));
}

TEST(OrdinalConstraints, RejectsBadInput) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(make_ordering(x, Shape::SIncr), InvalidInput);
  EXPECT_THROW(ordinal_constraint_matrices(x, make_ordering(x, Shape::Tree)), InvalidInput);
  const std::vector<double> two{1, 2, 1};
  EXPECT_THROW(build_ordinal_component(two, Shape::Conv), InvalidInput);
  const std::vector<double> bad{1, NAN, 2};
  EXPECT_THROW(make_ordering(bad, Shape::Incr), InvalidInput);
}

TEST(EdgesFromConstraints, Orthant) {
  const GeneratorCone g = edges_from_constraints(ConstraintCone(MatrixXd::Identity(2, 2), MatrixXd(0, 2)));
  EXPECT_EQ(g.linear_dim(), 0);
  ASSERT_EQ(g.num_edges(), 2);
  EXPECT_LT((g.edges() - MatrixXd::Identity(2, 2)).norm(), 1e-14);
}

TEST(EdgesFromConstraints, IncreasingOnThreePoints) {
  const std::vector<double> x{1, 2, 3};
  const GeneratorCone g = edges_from_constraints(ordinal_constraint_matrices(x, make_ordering(x, Shape::Incr)));
  ASSERT_EQ(g.linear_dim(), 1);
  EXPECT_NEAR(std::abs(g.linear_basis().col(0).normalized().sum()), std::sqrt(3.0), 1e-12);
  const VectorXd e1 = (VectorXd(3) << -2, 1, 1).finished();
  const VectorXd e2 = (VectorXd(3) << -1, -1, 2).finished();
  EXPECT_NEAR(g.edges().col(0).normalized().dot(e1.normalized()), 1.0, 1e-12);
  EXPECT_NEAR(g.edges().col(1).normalized().dot(e2.normalized()), 1.0, 1e-12);
}

TEST(EdgesFromConstraints, EqualityOnlyIsSubspace) {
  const MatrixXd b = rows(1, 3, {1, -1, 0});
  const GeneratorCone g = edges_from_constraints(ConstraintCone(MatrixXd(0, 3), b));
  EXPECT_EQ(g.num_edges(), 0);
  EXPECT_EQ(g.linear_dim(), 2);
  EXPECT_LT((b * g.linear_basis()).norm(), 1e-12);
}

TEST(EdgesFromConstraints, EdgesAreFeasible) {
  Rng rng(31);
  for (Shape s : {Shape::Incr, Shape::Decr, Shape::Conv, Shape::Conc, Shape::IncrConv,
                  Shape::IncrConc, Shape::DecrConv, Shape::DecrConc, Shape::Tree, Shape::Umbrella}) {
    const std::vector<double> x = random_levels(rng, 25, 6, s == Shape::Tree || s == Shape::Umbrella);
    const ConstraintCone c = ordinal_constraint_matrices(x, make_ordering(x, s));
    const GeneratorCone g = edges_from_constraints(c);
    const MatrixXd ae = c.inequality() * g.edges();
    EXPECT_GE(ae.minCoeff(), -1e-12) << shape_name(s);
    if (c.equality().rows() > 0) EXPECT_LT((c.equality() * g.edges()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(EdgesFromConstraints, RoundTripProjection) {
  Rng rng(32);
  for (int rep = 0; rep < 40; ++rep) {
    const Shape s = std::array{Shape::Incr, Shape::Conv, Shape::DecrConc, Shape::Tree,
                               Shape::Umbrella}[static_cast<std::size_t>(rep % 5)];
    const std::vector<double> x = random_levels(rng, 10, 4, s == Shape::Tree || s == Shape::Umbrella);
    const ConstraintCone c = ordinal_constraint_matrices(x, make_ordering(x, s));
    const VectorXd y = rng.normal_vector(10);
    const VectorXd a = project_constraint_cone(y, c).theta;
    const VectorXd b = project_generator_cone(y, edges_from_constraints(c)).theta;
    EXPECT_LT((a - b).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(OrdinalComponent, IncreasingFitEqualsPava) {
  Rng rng(33);
  for (int rep = 0; rep < 30; ++rep) {
    const std::vector<double> x = random_levels(rng, 60, rng.integer(2, 15), false);
    VectorXd y(60);
    for (int i = 0; i < 60; ++i) y[i] = 0.3 * x[static_cast<std::size_t>(i)] + rng.normal();
    const ConeComponent comp = build_ordinal_component(x, Shape::Incr);
    const VectorXd fit = project_generator_cone(y, GeneratorCone(comp.edges, comp.linear_part)).theta;
    EXPECT_LT((fit - shapegam::testing::pava_by_level(x, y)).lpNorm<Eigen::Infinity>(), 1e-10);
  }
}

TEST(OrdinalComponent, UmbrellaMembersPeakAtMode) {
  Rng rng(34);
  const std::vector<double> x{-2, -1, 0, 1, 2, 3};
  const ConeComponent comp = build_ordinal_component(x, Shape::Umbrella);
  for (int rep = 0; rep < 200; ++rep) {
    VectorXd phi = comp.linear_part * rng.normal_vector(comp.linear_part.cols());
    for (Eigen::Index j = 0; j < comp.edges.cols(); ++j) phi += rng.uniform(0, 2) * comp.edges.col(j);
    for (int i = 1; i <= 2; ++i) EXPECT_GE(phi[i] - phi[i - 1], -1e-12);
    for (int i = 3; i <= 5; ++i) EXPECT_LE(phi[i] - phi[i - 1], 1e-12);
  }
}

TEST(OrdinalComponent, LinearPartStartsWithConstant) {
  const std::vector<double> x{1, 2, 2, 3, 4};
  for (Shape s : {Shape::Incr, Shape::Conv, Shape::IncrConv}) {
    const ConeComponent c = build_ordinal_component(x, s);
    EXPECT_EQ(c.linear_part.col(0), VectorXd::Ones(5));
    EXPECT_LT((c.linear_part.transpose() * c.edges).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_EQ(build_ordinal_component(x, Shape::Conv).linear_part.cols(), 2);
}

}  // namespace
