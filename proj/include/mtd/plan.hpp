#pragma once

#include <vector>

#include "mtd/criteria.hpp"
#include "mtd/dmlc.hpp"
#include "mtd/formulation.hpp"
#include "mtd/phantom.hpp"
#include "mtd/types.hpp"

namespace mtd {

// Treatment plan recovered from an LP solution.
struct Plan {
  Trajectories trajectories;
  Vector dose;
  // Auxiliary values as returned by the solver, one per criterion. alpha is NaN for criteria
  // without a tail variable.
  std::vector<double> xi;
  std::vector<double> alpha;
  // Smallest feasible auxiliary value for the plan's dose: max(l_hat, D+) for minimized criteria,
  // min(u_hat, D-) for maximized ones. Unlike xi these do not float for zero-weight criteria.
  std::vector<double> tight_xi;
  // Per objective, sum of sign * tight_xi over its criteria; every coordinate is minimized.
  std::vector<double> objective_vector;
};

Plan extract_plan(const BlockLP& lp, const Vector& x, const Phantom& phantom,
                  const MachineModel& machine, const DoseInfluence& influence,
                  const std::vector<Criterion>& criteria);

}  // namespace mtd
