#include "mtd/dmlc.hpp"

#include <algorithm>
#include <cmath>

#include "mtd/error.hpp"

namespace mtd {

Trajectories Trajectories::zeros(const MachineModel& machine) {
  const auto bixels = static_cast<std::size_t>(machine.num_bixels());
  return {std::vector<double>(bixels, 0.0), std::vector<double>(bixels, 0.0),
          std::vector<double>(static_cast<std::size_t>(machine.num_beams), 0.0)};
}

std::string_view to_string(DeliverabilityRowKind kind) {
  switch (kind) {
    case DeliverabilityRowKind::kLeadingOrder:
      return "leading-order";
    case DeliverabilityRowKind::kTrailingOrder:
      return "trailing-order";
    case DeliverabilityRowKind::kMinGap:
      return "min-gap";
    case DeliverabilityRowKind::kMinGapFirst:
      return "min-gap-first";
    case DeliverabilityRowKind::kBeamOnTime:
      return "beam-on-time";
    case DeliverabilityRowKind::kTotalTime:
      return "total-time";
    case DeliverabilityRowKind::kNonnegative:
      return "nonnegative";
  }
  return "unknown";
}

Index deliverability_row_count(const MachineModel& machine) {
  const Index pairs = Index{machine.num_beams} * machine.leaf_pairs;
  return pairs * (3 * (machine.bixels_per_row - 1) + 2) + 1;
}

DeliverabilityConstraints build_deliverability_constraints(const MachineModel& machine) {
  machine.validate();
  const int J = machine.bixels_per_row;
  const Index nb = machine.num_bixels();
  const Index left0 = 0;
  const Index right0 = nb;
  const Index beam_on0 = 2 * nb;
  const double dt = machine.traverse_time_s;
  const double rho = machine.min_gap_fraction;

  DeliverabilityConstraints dc;
  std::vector<Triplet> triplets;
  std::vector<double> rhs;
  auto add_row = [&](DeliverabilityRow info, double bound) {
    dc.rows.push_back(info);
    rhs.push_back(bound);
    return static_cast<Index>(dc.rows.size() - 1);
  };

  for (int b = 0; b < machine.num_beams; ++b) {
    for (int n = 0; n < machine.leaf_pairs; ++n) {
      const Index base = machine.bixel_column(b, n, 0);
      for (int j = 0; j + 1 < J; ++j) {
        const Index row = add_row({DeliverabilityRowKind::kLeadingOrder, b, n, j}, -dt);
        triplets.emplace_back(row, right0 + base + j, 1.0);
        triplets.emplace_back(row, right0 + base + j + 1, -1.0);
      }
      for (int j = 0; j + 1 < J; ++j) {
        const Index row = add_row({DeliverabilityRowKind::kTrailingOrder, b, n, j}, -dt);
        triplets.emplace_back(row, left0 + base + j, 1.0);
        triplets.emplace_back(row, left0 + base + j + 1, -1.0);
      }
      for (int j = 0; j + 1 < J; ++j) {
        const Index row = add_row({DeliverabilityRowKind::kMinGap, b, n, j}, (1.0 - rho) * dt);
        triplets.emplace_back(row, right0 + base + j + 1, 1.0);
        triplets.emplace_back(row, left0 + base + j, -1.0);
      }
      {
        const Index row = add_row({DeliverabilityRowKind::kMinGapFirst, b, n, 0}, -rho * dt);
        triplets.emplace_back(row, right0 + base, 1.0);
        triplets.emplace_back(row, left0 + base, -1.0);
      }
      {
        const Index row = add_row({DeliverabilityRowKind::kBeamOnTime, b, n, J - 1}, -dt);
        triplets.emplace_back(row, left0 + base + J - 1, 1.0);
        triplets.emplace_back(row, beam_on0 + b, -1.0);
      }
    }
  }
  const Index total = add_row({DeliverabilityRowKind::kTotalTime, -1, -1, -1}, machine.max_time_s);
  for (int b = 0; b < machine.num_beams; ++b) triplets.emplace_back(total, beam_on0 + b, 1.0);

  dc.matrix.resize(static_cast<Index>(dc.rows.size()), 2 * nb + machine.num_beams);
  dc.matrix.setFromTriplets(triplets.begin(), triplets.end());
  dc.rhs = Eigen::Map<const Vector>(rhs.data(), static_cast<Index>(rhs.size()));
  return dc;
}

namespace {

void check_sizes(const Trajectories& traj, const MachineModel& machine) {
  const auto nb = static_cast<std::size_t>(machine.num_bixels());
  if (traj.left.size() != nb || traj.right.size() != nb ||
      traj.beam_on.size() != static_cast<std::size_t>(machine.num_beams)) {
    throw_data("trajectory dimensions do not match the machine");
  }
}

}  // namespace

Vector stack_trajectories(const Trajectories& traj, const MachineModel& machine) {
  check_sizes(traj, machine);
  const Index nb = machine.num_bixels();
  Vector x(2 * nb + machine.num_beams);
  for (Index i = 0; i < nb; ++i) {
    x[i] = traj.left[i];
    x[nb + i] = traj.right[i];
  }
  for (int b = 0; b < machine.num_beams; ++b) x[2 * nb + b] = traj.beam_on[b];
  return x;
}

Trajectories unstack_trajectories(const Vector& x, const MachineModel& machine) {
  const Index nb = machine.num_bixels();
  if (x.size() != 2 * nb + machine.num_beams) throw_data("stacked trajectory has the wrong length");
  Trajectories traj = Trajectories::zeros(machine);
  for (Index i = 0; i < nb; ++i) {
    traj.left[i] = x[i];
    traj.right[i] = x[nb + i];
  }
  for (int b = 0; b < machine.num_beams; ++b) traj.beam_on[b] = x[2 * nb + b];
  return traj;
}

std::vector<TrajectoryViolation> validate_trajectories(const Trajectories& traj,
                                                       const MachineModel& machine, double tol) {
  const DeliverabilityConstraints dc = build_deliverability_constraints(machine);
  const Vector x = stack_trajectories(traj, machine);
  const Vector slack = dc.rhs - dc.matrix * x;

  std::vector<TrajectoryViolation> out;
  for (Index i = 0; i < slack.size(); ++i) {
    if (slack[i] < -tol) out.push_back({dc.rows[i], -slack[i]});
  }
  const int J = machine.bixels_per_row;
  for (int b = 0; b < machine.num_beams; ++b) {
    for (int n = 0; n < machine.leaf_pairs; ++n) {
      for (int j = 0; j < J; ++j) {
        const Index col = machine.bixel_column(b, n, j);
        const double worst = std::min(traj.left[col], traj.right[col]);
        if (worst < -tol) out.push_back({{DeliverabilityRowKind::kNonnegative, b, n, j}, -worst});
      }
    }
    if (traj.beam_on[b] < -tol) {
      out.push_back({{DeliverabilityRowKind::kNonnegative, b, -1, -1}, -traj.beam_on[b]});
    }
  }
  return out;
}

FluenceMap fluence_from_trajectories(const Trajectories& traj, const MachineModel& machine,
                                     bool validate, double tol) {
  check_sizes(traj, machine);
  if (validate) {
    const auto violations = validate_trajectories(traj, machine, tol);
    if (!violations.empty()) {
      throw_data("infeasible trajectory: " + std::to_string(violations.size()) +
                 " violated rows, first is " + std::string(to_string(violations.front().row.kind)));
    }
  }
  const double delta = machine.dose_rate;
  const double tau = machine.transmission;
  FluenceMap fluence;
  fluence.weights.resize(traj.left.size());
  const Index per_beam = Index{machine.leaf_pairs} * machine.bixels_per_row;
  for (std::size_t i = 0; i < traj.left.size(); ++i) {
    const double exposure = traj.left[i] - traj.right[i];
    const double beam_on = traj.beam_on[static_cast<Index>(i) / per_beam];
    fluence.weights[i] = delta * (exposure + tau * (beam_on - exposure));
  }
  return fluence;
}

Vector dose_from_fluence(const DoseInfluence& influence, const FluenceMap& fluence) {
  if (static_cast<Index>(fluence.weights.size()) != influence.matrix.cols()) {
    throw_data("fluence length does not match the dose influence matrix");
  }
  const Eigen::Map<const Vector> w(fluence.weights.data(), static_cast<Index>(fluence.weights.size()));
  return influence.matrix * w;
}

Vector dose_from_trajectories(const DoseInfluence& influence, const Trajectories& traj,
                              const MachineModel& machine) {
  if (influence.matrix.cols() != machine.num_bixels()) {
    throw_data("dose influence matrix does not match the machine");
  }
  return dose_from_fluence(influence, fluence_from_trajectories(traj, machine));
}

SweepBound sweep_time_lower_bound(const FluenceMap& fluence, const MachineModel& machine) {
  machine.validate();
  if (static_cast<Index>(fluence.weights.size()) != machine.num_bixels()) {
    throw_data("fluence length does not match the machine");
  }
  // From l_j - l_{j-1} >= dt + max(0, e_j - e_{j-1}) and T_b >= l_J + dt, with exposure
  // e = (phi / delta - tau T_b) / (1 - tau):
  //   T_b >= (1 - tau) J dt + (sum of positive increments of phi, from phi_0 = 0) / delta.
  const double delta = machine.dose_rate;
  const double tau = machine.transmission;
  const int J = machine.bixels_per_row;
  SweepBound bound;
  bound.per_beam.assign(machine.num_beams, 0.0);
  for (int b = 0; b < machine.num_beams; ++b) {
    double worst = 0.0;
    for (int n = 0; n < machine.leaf_pairs; ++n) {
      double previous = 0.0;
      double rise = 0.0;
      for (int j = 0; j < J; ++j) {
        const double phi = fluence.weights[machine.bixel_column(b, n, j)];
        if (phi < 0.0) throw_data("fluence must be nonnegative");
        rise += std::max(0.0, phi - previous);
        previous = phi;
      }
      worst = std::max(worst, rise);
    }
    bound.per_beam[b] = (1.0 - tau) * J * machine.traverse_time_s + worst / delta;
    bound.total += bound.per_beam[b];
  }
  return bound;
}

}  // namespace mtd
