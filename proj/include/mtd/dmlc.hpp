#pragma once

#include <string>
#include <vector>

#include "mtd/phantom.hpp"
#include "mtd/types.hpp"

namespace mtd {

// Sliding-window leaf trajectories as bixel departure times, indexed (beam, leaf pair, bixel)
// through MachineModel::bixel_column. Every leaf sweeps left to right.
struct Trajectories {
  std::vector<double> left;     // trailing leaf departure times l, s
  std::vector<double> right;    // leading leaf departure times r, s
  std::vector<double> beam_on;  // T_b per beam, s

  static Trajectories zeros(const MachineModel& machine);
};

struct FluenceMap {
  std::vector<double> weights;  // one beamlet weight per bixel column
};

enum class DeliverabilityRowKind {
  kLeadingOrder,   // r_j + dt <= r_{j+1}
  kTrailingOrder,  // l_j + dt <= l_{j+1}
  kMinGap,         // r_{j+1} <= l_j + (1 - rho) dt
  kMinGapFirst,    // r_1 <= l_1 - rho dt
  kBeamOnTime,     // l_J + dt <= T_b
  kTotalTime,      // sum_b T_b <= T_max
  kNonnegative,    // time >= 0 (reported by the validator only)
};

std::string_view to_string(DeliverabilityRowKind kind);

struct DeliverabilityRow {
  DeliverabilityRowKind kind = DeliverabilityRowKind::kLeadingOrder;
  int beam = -1;
  int leaf = -1;
  int bixel = -1;  // j of the j / j+1 pair, or the bixel of a single-bixel row
};

// A x <= b over x = (l, r, T) laid out as [l (B N J) | r (B N J) | T (B)].
// Rows, per beam b and leaf pair n: J-1 leading-order rows, J-1 trailing-order rows, J-1
// min-gap rows, the first-bixel min-gap row and the beam-on row; then one total-time row.
struct DeliverabilityConstraints {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<DeliverabilityRow> rows;
};

Index deliverability_row_count(const MachineModel& machine);
DeliverabilityConstraints build_deliverability_constraints(const MachineModel& machine);

// Stacks a trajectory into the (l, r, T) layout used by the constraint matrix.
Vector stack_trajectories(const Trajectories& traj, const MachineModel& machine);
Trajectories unstack_trajectories(const Vector& x, const MachineModel& machine);

struct TrajectoryViolation {
  DeliverabilityRow row;
  double amount = 0.0;  // by how much the row is violated, s
};

std::vector<TrajectoryViolation> validate_trajectories(const Trajectories& traj,
                                                       const MachineModel& machine,
                                                       double tol = 1e-9);

// Beamlet weights delta (e + tau (T_b - e)) with e = l - r. With validate set, infeasible
// trajectories are rejected with a data error.
FluenceMap fluence_from_trajectories(const Trajectories& traj, const MachineModel& machine,
                                     bool validate = false, double tol = 1e-9);

Vector dose_from_fluence(const DoseInfluence& influence, const FluenceMap& fluence);
Vector dose_from_trajectories(const DoseInfluence& influence, const Trajectories& traj,
                              const MachineModel& machine);

// Lower bound on each beam's delivery time implied by unidirectional sweeps.
struct SweepBound {
  std::vector<double> per_beam;
  double total = 0.0;
};

SweepBound sweep_time_lower_bound(const FluenceMap& fluence, const MachineModel& machine);

}  // namespace mtd
