#pragma once

#include <Eigen/Dense>

#include "mtd/formulation.hpp"

namespace mtd::testing {

enum class OracleStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct OracleResult {
  OracleStatus status = OracleStatus::kIterationLimit;
  double objective = 0.0;
  Eigen::VectorXd x;
  int pivots = 0;
  // Most negative reduced cost and basic value after refinement on the final basis.
  double worst_reduced_cost = 0.0;
  double worst_basic_value = 0.0;
};

// Dense two-phase tableau simplex for
//   minimize c'x  subject to  A x >= b,  lower <= x <= upper
// with finite lower bounds. The final basis is re-solved with an LU factorization of the
// original columns so the reported optimum does not carry tableau drift.
OracleResult solve_dense_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            int max_pivots = 200000);

// Minimum of c'x over every basic feasible point, found by solving each choice of n active
// constraints among the rows and finite bounds. Exponential; for a handful of variables only.
// Returns +infinity when there is no vertex.
double brute_force_vertex_minimum(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

// Dense oracle applied to a block-partitioned LP.
OracleResult solve_dense_lp(const BlockLP& lp, int max_pivots = 200000);

}  // namespace mtd::testing
