#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mtd/evaluation.hpp"

namespace mtd::testing {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

DoseSample random_dose_sample(Rng& rng, int max_size) {
  DoseSample s;
  const int n = uniform_int(rng, 1, max_size);
  for (int i = 0; i < n; ++i) {
    if (i > 0 && uniform(rng, 0, 1) < 0.2) {
      s.dose.push_back(s.dose[uniform_int(rng, 0, i - 1)]);
    } else {
      s.dose.push_back(uniform(rng, 0.0, 80.0));
    }
    s.weights.push_back(uniform(rng, 0.1, 2.0));
  }
  return s;
}

MachineModel random_machine(Rng& rng, int max_bixels) {
  MachineModel m;
  do {
    m.num_beams = uniform_int(rng, 1, 2);
    m.leaf_pairs = uniform_int(rng, 1, 2);
    m.bixels_per_row = uniform_int(rng, 1, 5);
  } while (m.num_bixels() > max_bixels);
  m.traverse_time_s = uniform(rng, 0.2, 1.0);
  m.min_gap_fraction = uniform(rng, 0.1, 0.9);
  m.transmission = uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : uniform(rng, 0.0, 0.05);
  m.dose_rate = uniform(rng, 0.5, 2.0);
  m.beam_angles_deg = equally_spaced_angles(m.num_beams);
  m.max_time_s = 1e6;
  return m;
}

Trajectories random_feasible_trajectories(Rng& rng, const MachineModel& machine) {
  Trajectories traj = Trajectories::zeros(machine);
  const double dt = machine.traverse_time_s;
  const double rho = machine.min_gap_fraction;
  const int J = machine.bixels_per_row;
  for (int b = 0; b < machine.num_beams; ++b) {
    double last = 0.0;
    for (int n = 0; n < machine.leaf_pairs; ++n) {
      double r = uniform(rng, 0.0, 1.0);
      double l = r + rho * dt + uniform(rng, 0.0, 3.0);
      for (int j = 0; j < J; ++j) {
        const Index col = machine.bixel_column(b, n, j);
        if (j > 0) {
          const double r_lo = traj.right[col - 1] + dt;
          const double r_hi = traj.left[col - 1] + (1.0 - rho) * dt;
          r = uniform(rng, 0.0, 1.0) < 0.2 ? r_lo : uniform(rng, r_lo, r_hi);
          const double l_lo = std::max(traj.left[col - 1] + dt, r + rho * dt);
          l = uniform(rng, 0.0, 1.0) < 0.2 ? l_lo : l_lo + uniform(rng, 0.0, 3.0);
        }
        traj.right[col] = r;
        traj.left[col] = l;
      }
      last = std::max(last, traj.left[machine.bixel_column(b, n, J - 1)]);
    }
    traj.beam_on[b] = last + dt + (uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : uniform(rng, 0.0, 1.0));
  }
  return traj;
}

DoseInfluence random_influence(Rng& rng, Index voxels, const MachineModel& machine, double density) {
  DoseInfluence p;
  p.num_beams = machine.num_beams;
  p.leaf_pairs = machine.leaf_pairs;
  p.bixels_per_row = machine.bixels_per_row;
  const Index nb = machine.num_bixels();
  std::vector<Triplet> triplets;
  for (Index i = 0; i < voxels; ++i) {
    const Index forced = uniform_int(rng, 0, static_cast<int>(nb - 1));
    for (Index j = 0; j < nb; ++j) {
      if (j == forced || uniform(rng, 0.0, 1.0) < density) triplets.emplace_back(i, j, uniform(rng, 0.05, 1.0));
    }
  }
  p.matrix.resize(voxels, nb);
  p.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return p;
}

Phantom random_phantom(Rng& rng, Index voxels) {
  std::vector<Index> order(static_cast<std::size_t>(voxels));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const Index ptv = std::max<Index>(2, voxels / 3);
  const Index oar = std::max<Index>(2, (voxels - ptv) / 2);
  auto make = [&](std::string name, RoiKind kind, Index begin, Index end) {
    Roi roi;
    roi.name = std::move(name);
    roi.kind = kind;
    roi.voxels.assign(order.begin() + begin, order.begin() + end);
    std::sort(roi.voxels.begin(), roi.voxels.end());
    std::vector<double> raw;
    for (std::size_t i = 0; i < roi.voxels.size(); ++i) raw.push_back(uniform(rng, 0.3, 1.0));
    roi.volume_mm3 = std::accumulate(raw.begin(), raw.end(), 0.0);
    roi.weights = normalize_weights(raw);
    return roi;
  };
  std::vector<Roi> rois;
  rois.push_back(make("PTV", RoiKind::kTarget, 0, ptv));
  rois.push_back(make("OAR", RoiKind::kOrganAtRisk, ptv, ptv + oar));
  if (ptv + oar < voxels) rois.push_back(make("Ring", RoiKind::kRing, ptv + oar, voxels));
  return Phantom(GridDims{static_cast<int>(voxels), 1, 1}, {1.0, 1.0, 1.0}, std::move(rois));
}

namespace {

Criterion random_criterion(Rng& rng, const Phantom& phantom, const Vector& dose, std::optional<int> objective) {
  static const CriterionType kTypes[] = {CriterionType::kDavMin, CriterionType::kDavMax, CriterionType::kMax,
                                         CriterionType::kMin,    CriterionType::kAvgMin, CriterionType::kAvgMax};
  Criterion c;
  c.type = kTypes[uniform_int(rng, 0, 5)];
  const auto& rois = phantom.rois();
  c.roi = rois[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(rois.size()) - 1))].name;
  c.label = c.roi + " " + std::string(to_string(c.type));
  c.objective = objective;
  if (is_dose_at_volume(c.type)) c.volume_fraction = uniform(rng, 0.05, 0.95);
  const double s0 = criterion_surrogate(phantom, dose, c);
  const bool want_bound = !objective || uniform(rng, 0.0, 1.0) < 0.6;
  const bool want_utopian = objective && uniform(rng, 0.0, 1.0) < 0.4;
  if (is_upper_type(c.type)) {
    if (want_bound) c.upper = s0 * uniform(rng, 1.0, 1.3) + 0.01;
    if (want_utopian) c.utopian_lower = s0 * uniform(rng, 0.3, 1.0);
  } else {
    if (want_bound) c.lower = s0 * uniform(rng, 0.6, 1.0) - 0.01;
    if (want_utopian) c.utopian_upper = s0 * uniform(rng, 1.0, 1.5);
  }
  if (c.lower && *c.lower < 0.0) c.lower = 0.0;
  return c;
}

}  // namespace

PlanningCase random_case(Rng& rng, const RandomCaseOptions& options) {
  PlanningCase pc;
  pc.name = "random";
  pc.machine = random_machine(rng, options.max_bixels);
  const Index voxels = uniform_int(rng, 8, options.max_voxels);
  pc.phantom = random_phantom(rng, voxels);
  pc.influence = random_influence(rng, voxels, pc.machine);
  const Trajectories traj = random_feasible_trajectories(rng, pc.machine);
  const double total = std::accumulate(traj.beam_on.begin(), traj.beam_on.end(), 0.0);
  pc.machine.max_time_s = total * uniform(rng, 1.0, 1.5) + 1e-9;
  const Vector dose = dose_from_trajectories(pc.influence, traj, pc.machine);

  const int objectives = uniform_int(rng, 1, options.max_objectives);
  for (int k = 0; k < objectives; ++k) {
    const int count = uniform_int(rng, 1, 2);
    for (int i = 0; i < count; ++i) pc.criteria.push_back(random_criterion(rng, pc.phantom, dose, k));
  }
  const int constraints = uniform_int(rng, 0, options.max_constraints);
  for (int i = 0; i < constraints; ++i) pc.criteria.push_back(random_criterion(rng, pc.phantom, dose, std::nullopt));
  for (int k = 0; k < objectives; ++k) {
    QualityIndexSpec q;
    q.label = "q" + std::to_string(k);
    q.roi = pc.phantom.rois()[static_cast<std::size_t>(k) % pc.phantom.rois().size()].name;
    q.kind = QualityKind::kAverage;
    pc.quality_indices.push_back(q);
  }
  return pc;
}

WeightVector random_weights(Rng& rng, int count) {
  std::vector<double> w(static_cast<std::size_t>(count));
  for (double& v : w) v = uniform(rng, 0.0, 1.0) < 0.2 ? 0.0 : uniform(rng, 0.0, 1.0);
  if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
  return WeightVector::normalized(std::move(w));
}

BlockLP random_block_lp(Rng& rng, Index n1, Index n2, Index m1, Index m21) {
  const Index m2 = m21 + n2;
  std::vector<Triplet> triplets;
  auto fill = [&](Index r0, Index rows, Index c0, Index cols, double density) {
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) {
        if (uniform(rng, 0.0, 1.0) < density) triplets.emplace_back(r0 + r, c0 + c, uniform(rng, -1.0, 1.0));
      }
    }
  };
  fill(0, m1, 0, n1, 0.5);
  fill(0, m1, n1, n2, 0.3);
  fill(m1, m2, 0, n1, 0.4);
  for (Index k = 0; k < n2; ++k) triplets.emplace_back(m1 + m21 + k, n1 + k, 1.0);
  SparseMatrix a(m1 + m2, n1 + n2);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Vector cost = Vector::NullaryExpr(n1 + n2, [&](Index) { return uniform(rng, -1.0, 1.0); });
  Vector rhs = Vector::NullaryExpr(m1 + m2, [&](Index) { return uniform(rng, -1.0, 1.0); });
  Vector lower = Vector::Zero(n1 + n2);
  Vector upper = Vector::Constant(n1 + n2, kInfinity);
  for (Index j = 0; j < n1 + n2; ++j) {
    if (uniform(rng, 0.0, 1.0) < 0.3) upper[j] = uniform(rng, 1.0, 5.0);
  }
  return BlockLP::from_matrix(a, n1, m1, m21, cost, rhs, lower, upper);
}

KKTSystem random_kkt_system(Rng& rng, const BlockLP& lp, double spread) {
  auto diag = [&](Index n) {
    return Vector::NullaryExpr(n, [&](Index) { return std::pow(10.0, uniform(rng, -spread, spread)); });
  };
  KKTSystem sys;
  sys.lp = &lp;
  sys.d1 = diag(lp.n1);
  sys.d2 = diag(lp.n2);
  sys.d3 = diag(lp.m1);
  sys.d4 = diag(lp.m2());
  return sys;
}

Matrix dense_constraints(const BlockLP& lp) { return Matrix(lp.full_matrix()); }

Matrix dense_kkt_matrix(const KKTSystem& sys) {
  const BlockLP& lp = *sys.lp;
  const Index n = lp.num_cols();
  const Index m = lp.num_rows();
  const Matrix a = dense_constraints(lp);
  Matrix k = Matrix::Zero(n + m, n + m);
  k.topLeftCorner(n, n).diagonal().head(lp.n1) = -sys.d1;
  k.topLeftCorner(n, n).diagonal().tail(lp.n2) = -sys.d2;
  k.bottomRightCorner(m, m).diagonal().head(lp.m1) = sys.d3;
  k.bottomRightCorner(m, m).diagonal().tail(lp.m2()) = sys.d4;
  k.bottomLeftCorner(m, n) = a;
  k.topRightCorner(n, m) = a.transpose();
  return k;
}

}  // namespace mtd::testing
