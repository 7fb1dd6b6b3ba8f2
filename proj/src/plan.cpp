#include "mtd/plan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtd/error.hpp"
#include "mtd/evaluation.hpp"

namespace mtd {

Plan extract_plan(const BlockLP& lp, const Vector& x, const Phantom& phantom,
                  const MachineModel& machine, const DoseInfluence& influence,
                  const std::vector<Criterion>& criteria) {
  if (x.size() != lp.num_cols()) throw_data("solution length does not match the LP columns");
  if (lp.criterion_columns.size() != criteria.size()) {
    throw_data("criteria do not match the LP the solution belongs to");
  }
  Plan plan;
  const Index traj_cols = 2 * machine.num_bixels() + machine.num_beams;
  plan.trajectories = unstack_trajectories(x.head(traj_cols), machine);
  plan.dose = dose_from_trajectories(influence, plan.trajectories, machine);

  const int num_objectives = count_objectives(criteria);
  plan.objective_vector.assign(static_cast<std::size_t>(num_objectives), 0.0);
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    const CriterionColumns& cols = lp.criterion_columns[k];
    plan.xi.push_back(x[cols.xi]);
    plan.alpha.push_back(cols.alpha >= 0 ? x[cols.alpha] : std::numeric_limits<double>::quiet_NaN());
    const double statistic = criterion_surrogate(phantom, plan.dose, c);
    const double tight = is_upper_type(c.type)
                             ? std::max(statistic, c.utopian_lower.value_or(-kInfinity))
                             : std::min(statistic, c.utopian_upper.value_or(kInfinity));
    plan.tight_xi.push_back(tight);
    if (c.objective) plan.objective_vector[*c.objective] += c.objective_sign() * tight;
  }
  return plan;
}

}  // namespace mtd
