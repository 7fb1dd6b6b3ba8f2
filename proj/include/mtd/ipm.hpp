#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mtd/formulation.hpp"
#include "mtd/kkt.hpp"
#include "mtd/types.hpp"

namespace mtd {

enum class SolveStatus { kConverged, kIterationLimit, kInfeasible, kNumericalFailure };

std::string_view to_string(SolveStatus status);

// Passed to the observer once per Newton solve (predictor and corrector).
struct NewtonSnapshot {
  int iteration = 0;
  bool corrector = false;
  const KKTSystem* system = nullptr;
  const Vector* rhs = nullptr;
  const Vector* step = nullptr;
};

struct SolverSettings {
  // Termination when the duality gap of the weighted objective is at most this many Gy.
  double dose_tolerance = 0.01;
  // Relative primal and dual residual tolerance.
  double feasibility_tolerance = 1e-9;
  int max_iterations = 200;
  double step_fraction = 0.995;
  // sigma = (mu_aff / mu)^centering_exponent
  double centering_exponent = 3.0;
  double regularization = 1e-10;
  SchurOptions schur;
  std::function<void(const NewtonSnapshot&)> observer;
};

struct IterationLog {
  int iteration = 0;
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;    // relative
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;              // Gy-weighted
  double mu = 0.0;
  double sigma = 0.0;
  double primal_step = 0.0;
  double dual_step = 0.0;
  double min_pair = 0.0;          // smallest primal or dual component of any complementarity pair
  bool fallback = false;          // regularized factorization used
};

struct SolveResult {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::string message;
  Vector x;       // primal, full column space
  Vector y;       // row duals (>= 0)
  Vector z;       // lower-bound duals
  Vector v;       // upper-bound duals (zero for unbounded columns)
  Vector slack;   // A x - b
  double objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::vector<IterationLog> log;
  Index schur_order = 0;
  bool dense_schur = true;

  bool converged() const { return status == SolveStatus::kConverged; }
};

// Infeasible-start primal-dual predictor-corrector method on
//   minimize c'x  subject to  A x >= b,  lower <= x <= upper.
// Each Newton system is solved through SchurSolver.
SolveResult solve(const BlockLP& lp, const SolverSettings& settings = {});

// Primal objective minus dual objective b'y + lower'z - upper'v, in the objective's Gy scale.
double duality_gap_in_dose(const BlockLP& lp, const Vector& x, const Vector& y, const Vector& z,
                           const Vector& v);

void write_iteration_log(const std::vector<IterationLog>& log, std::ostream& out);

}  // namespace mtd
