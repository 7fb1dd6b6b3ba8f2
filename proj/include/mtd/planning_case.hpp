#pragma once

#include <string>
#include <vector>

#include "mtd/criteria.hpp"
#include "mtd/evaluation.hpp"
#include "mtd/ipm.hpp"
#include "mtd/phantom.hpp"

namespace mtd {

// Everything needed to build weighted-sum instances and evaluate their plans.
struct PlanningCase {
  std::string name;
  Phantom phantom;
  MachineModel machine;
  KernelParams kernel;
  DoseInfluence influence;
  std::vector<Criterion> criteria;
  std::vector<QualityIndexSpec> quality_indices;
  SolverSettings solver;
  double dvh_step_gy = 0.1;
  int grid_order = 5;
  int workers = 1;

  int num_objectives() const { return count_objectives(criteria); }
};

}  // namespace mtd
