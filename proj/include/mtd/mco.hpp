#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mtd/evaluation.hpp"
#include "mtd/formulation.hpp"
#include "mtd/hull.hpp"
#include "mtd/ipm.hpp"
#include "mtd/plan.hpp"
#include "mtd/planning_case.hpp"

namespace mtd {

// Equidistant lattice {k / n : sum k = n} on the unit simplex, in lexicographically decreasing
// order of the integer compositions, starting at (1, 0, ..., 0).
struct WeightGrid {
  int order = 0;
  std::vector<WeightVector> weights;
};

WeightGrid weight_grid(int num_objectives, int order);

// Index of the lattice point closest to equal weights.
std::size_t balanced_index(const WeightGrid& grid);

struct ParetoEntry {
  std::size_t grid_index = 0;
  WeightVector weights;
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::string message;
  int iterations = 0;
  double objective = 0.0;  // LP optimum c'x
  double gap = 0.0;
  double seconds = 0.0;
  Plan plan;
  PlanEvaluation evaluation;

  bool converged() const { return status == SolveStatus::kConverged; }
};

struct ParetoSet {
  std::vector<ParetoEntry> entries;  // grid order
  std::size_t balanced = 0;

  std::size_t converged_count() const;
};

using ProgressCallback = std::function<void(const ParetoEntry&)>;

// One weighted-sum solve per grid point on `workers` threads; results are merged in grid order.
// Failed solves are recorded; throws a solver error when every solve fails.
ParetoSet generate_pareto_set(const PlanningCase& planning_case, const WeightGrid& grid,
                              const SolverSettings& settings, int workers = 1,
                              const ProgressCallback& progress = {});

// Solves a single weighted-sum instance and evaluates the plan.
ParetoEntry solve_weighted(const PlanningCase& planning_case, const WeightVector& weights,
                           const SolverSettings& settings, BlockLP* lp_out = nullptr);

// Indices of points not dominated by another point. j dominates i when j is better by more than
// eps in every coordinate, oriented by the aims.
std::vector<std::size_t> nondominated_subset(const std::vector<std::vector<double>>& points,
                                             const std::vector<Aim>& aims, double eps = 0.0);

// Same, restricted to the plans that converged and do not violate a target bound by more than 1 %.
std::vector<std::size_t> nondominated_without_violations(const ParetoSet& set,
                                                         const std::vector<Aim>& aims, double eps = 0.0);

// Largest violation of the weighted-sum support inequality
//   w_i . f_i <= w_i . f_j   for all converged i, j
// where f are the plans' objective vectors (minimized coordinates).
struct SupportCheck {
  double worst = 0.0;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
  std::size_t pairs = 0;
};

SupportCheck weighted_sum_support_check(const ParetoSet& set);

struct ShiftReport {
  Hull3 quality_hull;
  Hull3 objective_hull;
  // Per plan, quality - objective value in each coordinate.
  std::vector<std::vector<double>> displacement;
  std::vector<double> mean_displacement;
  // Root-mean-square norm of the displacements after removing the mean, and per coordinate.
  double residual_spread = 0.0;
  std::vector<double> residual_spread_per_axis;
  // Conservative direction check: objective - quality >= -tol for minimized coordinates and
  // quality - objective >= -tol for maximized ones.
  bool sign_check_passed = true;
  double worst_sign_violation = 0.0;
  std::vector<std::string> notes;
};

ShiftReport hull_and_shift_report(const std::vector<std::vector<double>>& quality_points,
                                  const std::vector<std::vector<double>>& objective_points,
                                  const std::vector<Aim>& aims, double tol);

}  // namespace mtd
