// Self-checks of the dense reference LP solver used by the solver tests.

#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "lp_oracle.hpp"

namespace mtd::testing {
namespace {

TEST(DenseOracle, TextbookInstances) {
  Eigen::VectorXd c(1), lo = Eigen::VectorXd::Zero(1), hi = Eigen::VectorXd::Constant(1, INFINITY);
  c << 1.0;
  Eigen::MatrixXd a(1, 1);
  a << 1.0;
  Eigen::VectorXd b(1);
  b << 1.0;
  auto r = solve_dense_lp(c, a, b, lo, hi);
  ASSERT_EQ(r.status, OracleStatus::kOptimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-12);

  // maximize 3x + 5y with x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6).
  Eigen::VectorXd c2(2);
  c2 << -3.0, -5.0;
  Eigen::MatrixXd a2(3, 2);
  a2 << -1, 0, 0, -2, -3, -2;
  Eigen::VectorXd b2(3);
  b2 << -4, -12, -18;
  r = solve_dense_lp(c2, a2, b2, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, INFINITY));
  ASSERT_EQ(r.status, OracleStatus::kOptimal);
  EXPECT_NEAR(r.objective, -36.0, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 6.0, 1e-12);

  Eigen::MatrixXd a3(2, 1);
  a3 << 1.0, -1.0;
  Eigen::VectorXd b3(2);
  b3 << 2.0, -1.0;
  EXPECT_EQ(solve_dense_lp(c, a3, b3, lo, hi).status, OracleStatus::kInfeasible);

  Eigen::VectorXd neg(1);
  neg << -1.0;
  EXPECT_EQ(solve_dense_lp(neg, a, b, lo, hi).status, OracleStatus::kUnbounded);
  hi[0] = 7.5;
  r = solve_dense_lp(neg, a, b, lo, hi);
  ASSERT_EQ(r.status, OracleStatus::kOptimal);
  EXPECT_NEAR(r.objective, -7.5, 1e-12);
}

TEST(DenseOracle, MatchesVertexEnumeration) {
  Rng rng(77);
  int optimal = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = uniform_int(rng, 1, 4);
    const int m = uniform_int(rng, 1, 5);
    Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(n, [&](Index) { return uniform(rng, -1, 1); });
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(m, n, [&](Index, Index) { return uniform(rng, -1, 1); });
    Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(m, [&](Index) { return uniform(rng, -1, 0.5); });
    Eigen::VectorXd lo = Eigen::VectorXd::NullaryExpr(n, [&](Index) { return uniform(rng, -1, 0); });
    Eigen::VectorXd hi = Eigen::VectorXd::NullaryExpr(n, [&](Index) { return uniform(rng, 0.5, 3); });
    const OracleResult r = solve_dense_lp(c, a, b, lo, hi);
    const double brute = brute_force_vertex_minimum(c, a, b, lo, hi);
    if (std::isinf(brute)) {
      EXPECT_EQ(r.status, OracleStatus::kInfeasible);
      continue;
    }
    ASSERT_EQ(r.status, OracleStatus::kOptimal);
    EXPECT_NEAR(r.objective, brute, 1e-9);
    EXPECT_GE(r.worst_reduced_cost, -1e-9);
    EXPECT_GE(r.worst_basic_value, -1e-9);
    ++optimal;
  }
  EXPECT_GT(optimal, 100);
}

}  // namespace
}  // namespace mtd::testing
