#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "generators.hpp"
#include "lp_oracle.hpp"
#include "mtd/error.hpp"
#include "mtd/evaluation.hpp"
#include "mtd/formulation.hpp"
#include "mtd/ipm.hpp"

namespace mtd {
namespace {

using testing::Rng;

Criterion make(std::string roi, CriterionType type, double v = 0.0) {
  Criterion c;
  c.roi = roi;
  c.label = roi + " " + std::string(to_string(type));
  c.type = type;
  c.volume_fraction = v;
  return c;
}

// Two voxels, one bixel with unit entries.
struct Toy {
  Phantom phantom;
  MachineModel machine;
  DoseInfluence influence;
};

Toy two_voxel_toy() {
  Toy t;
  Roi all{"all", RoiKind::kTarget, {0, 1}, {0.5, 0.5}, 2.0};
  Roi second{"second", RoiKind::kOrganAtRisk, {1}, {1.0}, 1.0};
  t.phantom = Phantom(GridDims{2, 1, 1}, {1, 1, 1}, {all, second});
  t.machine.num_beams = 1;
  t.machine.leaf_pairs = 1;
  t.machine.bixels_per_row = 1;
  t.machine.beam_angles_deg = {0.0};
  t.machine.max_time_s = 20.0;
  t.influence.num_beams = t.influence.leaf_pairs = t.influence.bixels_per_row = 1;
  t.influence.matrix.resize(2, 1);
  t.influence.matrix.insert(0, 0) = 1.0;
  t.influence.matrix.insert(1, 0) = 0.5;
  return t;
}

TEST(Formulation, TwoVoxelDavInstanceStructure) {
  const Toy t = two_voxel_toy();
  Criterion c = make("all", CriterionType::kDavMin, 0.5);
  c.objective = 0;
  const BlockLP lp = build_weighted_instance(t.phantom, t.machine, t.influence, {c}, WeightVector({1.0}));
  EXPECT_EQ(lp.n2, 2);
  EXPECT_EQ(lp.m21, 0);
  const PartitionReport report = partition_report(lp);
  EXPECT_EQ(report.m22, 2);
  EXPECT_EQ(Matrix(lp.a22), Matrix::Identity(2, 2));
  // (l, r, T) + xi + alpha in x1; deliverability rows + one tail row in y1.
  EXPECT_EQ(lp.n1, 3 + 2);
  EXPECT_EQ(lp.m1, deliverability_row_count(t.machine) + 1);
  EXPECT_EQ(report.top_left_order(), lp.n1 + lp.m1);
  EXPECT_EQ(lp.columns[lp.n1].kind, VariableKind::kEta);
  EXPECT_EQ(lp.rows[lp.m1].kind, RowKind::kUpperTailExcess);
}

TEST(Formulation, MaxOnlyAndDavOnlyPartitions) {
  const Toy t = two_voxel_toy();
  Criterion mx = make("all", CriterionType::kMax);
  mx.objective = 0;
  const BlockLP max_lp = build_weighted_instance(t.phantom, t.machine, t.influence, {mx}, WeightVector({1.0}));
  EXPECT_EQ(max_lp.n2, 0);
  EXPECT_EQ(max_lp.m21, 2);
  EXPECT_EQ(max_lp.a22.rows(), 2);
  EXPECT_EQ(max_lp.a22.nonZeros(), 0);
  EXPECT_NO_THROW(partition_report(max_lp));

  Criterion lo = make("all", CriterionType::kDavMax, 0.9);
  lo.objective = 0;
  Criterion hi = make("second", CriterionType::kDavMin, 0.3);
  hi.objective = 0;
  const BlockLP dav_lp =
      build_weighted_instance(t.phantom, t.machine, t.influence, {lo, hi}, WeightVector({1.0}));
  EXPECT_EQ(dav_lp.m21, 0);
  EXPECT_EQ(Matrix(dav_lp.a22), Matrix::Identity(3, 3));
}

TEST(Formulation, MeanDoseMinimumIsTheMinimumGapExposure) {
  const Toy t = two_voxel_toy();
  Criterion c = make("all", CriterionType::kAvgMin);
  c.objective = 0;
  const BlockLP lp = build_weighted_instance(t.phantom, t.machine, t.influence, {c}, WeightVector({1.0}));
  // Leaves stay at least rho * dt apart, so every bixel sees delta * rho * dt with tau = 0.
  const double exposure = t.machine.dose_rate * t.machine.min_gap_fraction * t.machine.traverse_time_s;
  const double expected = exposure * (0.5 * 1.0 + 0.5 * 0.5);
  const auto oracle = testing::solve_dense_lp(lp);
  ASSERT_EQ(oracle.status, testing::OracleStatus::kOptimal);
  EXPECT_NEAR(oracle.objective, expected, 1e-12);
  const SolveResult r = solve(lp);
  ASSERT_TRUE(r.converged()) << r.message;
  EXPECT_NEAR(r.objective, expected, 1e-2);
  const Trajectories traj = unstack_trajectories(r.x.head(3), t.machine);
  EXPECT_NEAR(fluence_from_trajectories(traj, t.machine).weights[0], exposure, 1e-2);
}

TEST(Formulation, RejectsInconsistentCriteria) {
  const Toy t = two_voxel_toy();
  Criterion unknown = make("nowhere", CriterionType::kMax);
  unknown.objective = 0;
  EXPECT_THROW(build_weighted_instance(t.phantom, t.machine, t.influence, {unknown}, WeightVector({1.0})), Error);
  Criterion no_v = make("all", CriterionType::kDavMin, 0.0);
  no_v.objective = 0;
  EXPECT_THROW(build_weighted_instance(t.phantom, t.machine, t.influence, {no_v}, WeightVector({1.0})), Error);
  Criterion crossed = make("all", CriterionType::kDavMin, 0.5);
  crossed.objective = 0;
  crossed.utopian_lower = 50.0;
  crossed.upper = 40.0;
  EXPECT_FALSE(check_criterion(crossed).empty());
  EXPECT_THROW(build_weighted_instance(t.phantom, t.machine, t.influence, {crossed}, WeightVector({1.0})), Error);
  Criterion ok = make("all", CriterionType::kMax);
  ok.objective = 0;
  EXPECT_THROW(build_weighted_instance(t.phantom, t.machine, t.influence, {ok}, WeightVector({0.5, 0.5})), Error);
  EXPECT_THROW(WeightVector({0.5, 0.6}), Error);
  EXPECT_THROW(WeightVector({-0.5, 1.5}), Error);
}

TEST(Formulation, ScalarizedObjectiveIsSignedWeightedXi) {
  const Toy t = two_voxel_toy();
  Criterion a = make("all", CriterionType::kMax);
  a.objective = 0;
  Criterion b = make("all", CriterionType::kMin);
  b.objective = 1;
  Criterion c = make("second", CriterionType::kAvgMin);
  c.objective = 2;
  const BlockLP unit = build_weighted_instance(t.phantom, t.machine, t.influence, {a, b, c}, WeightVector({1, 0, 0}));
  Vector x = Vector::Zero(unit.num_cols());
  for (std::size_t k = 0; k < 3; ++k) x[unit.criterion_columns[k].xi] = 10.0 * (k + 1);
  EXPECT_DOUBLE_EQ(scalarized_objective_value(unit, x), 10.0);
  const BlockLP mixed =
      build_weighted_instance(t.phantom, t.machine, t.influence, {a, b, c}, WeightVector({0.5, 0.25, 0.25}));
  EXPECT_DOUBLE_EQ(scalarized_objective_value(mixed, x), 0.5 * 10.0 - 0.25 * 20.0 + 0.25 * 30.0);
}

TEST(Formulation, EveryColumnCatalogued) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const PlanningCase pc = testing::random_case(rng);
    const BlockLP lp = build_weighted_instance(pc.phantom, pc.machine, pc.influence, pc.criteria,
                                               testing::random_weights(rng, pc.num_objectives()));
    ASSERT_EQ(static_cast<Index>(lp.columns.size()), lp.num_cols());
    ASSERT_EQ(static_cast<Index>(lp.rows.size()), lp.num_rows());
    std::vector<int> hits(static_cast<std::size_t>(lp.num_cols()), 0);
    for (const CriterionColumns& cc : lp.criterion_columns) {
      ++hits[cc.xi];
      if (cc.alpha >= 0) ++hits[cc.alpha];
      for (Index e = cc.eta_begin; e >= 0 && e < cc.eta_end; ++e) ++hits[e];
    }
    for (Index j = 0; j < 2 * pc.machine.num_bixels() + pc.machine.num_beams; ++j) ++hits[j];
    for (int h : hits) EXPECT_EQ(h, 1);
    for (Index j = lp.n1; j < lp.num_cols(); ++j) EXPECT_EQ(lp.columns[j].kind, VariableKind::kEta);
    for (Index j = 0; j < lp.n1; ++j) EXPECT_NE(lp.columns[j].kind, VariableKind::kEta);
    for (Index r = 0; r < lp.m1; ++r) EXPECT_LT(lp.rows[r].voxel, 0);
    for (Index r = lp.m1; r < lp.num_rows(); ++r) EXPECT_GE(lp.rows[r].voxel, 0);
    EXPECT_NO_THROW(partition_report(lp));
  }
}

TEST(Formulation, BrokenA22IsRejected) {
  Rng rng(22);
  BlockLP lp = testing::random_block_lp(rng, 3, 2, 2, 1);
  EXPECT_NO_THROW(partition_report(lp));
  lp.a22.coeffRef(0, 1) = 0.5;
  EXPECT_THROW(partition_report(lp), Error);
  BlockLP other = testing::random_block_lp(rng, 3, 2, 2, 1);
  other.a22.coeffRef(2, 1) = 2.0;
  EXPECT_THROW(partition_report(other), Error);
}

TEST(Formulation, TripletRoundTrip) {
  Rng rng(23);
  const PlanningCase pc = testing::random_case(rng);
  const BlockLP lp = build_weighted_instance(pc.phantom, pc.machine, pc.influence, pc.criteria,
                                             testing::random_weights(rng, pc.num_objectives()));
  std::stringstream buffer;
  write_lp_triplets(lp, buffer);
  const BlockLP back = read_lp_triplets(buffer);
  EXPECT_EQ(back.n1, lp.n1);
  EXPECT_EQ(back.n2, lp.n2);
  EXPECT_EQ(back.m1, lp.m1);
  EXPECT_EQ(back.m21, lp.m21);
  EXPECT_EQ(Matrix(back.full_matrix()), Matrix(lp.full_matrix()));
  EXPECT_EQ(back.cost, lp.cost);
  EXPECT_EQ(back.rhs, lp.rhs);
  EXPECT_EQ(back.lower, lp.lower);
  EXPECT_EQ(back.upper, lp.upper);
}

// ---- properties -----------------------------------------------------------------------------

TEST(FormulationProperties, AuxiliaryVariablesBoundTheirStatistics) {
  Rng rng(24);
  for (int trial = 0; trial < 15; ++trial) {
    const PlanningCase pc = testing::random_case(rng);
    const BlockLP lp = build_weighted_instance(pc.phantom, pc.machine, pc.influence, pc.criteria,
                                               testing::random_weights(rng, pc.num_objectives()));
    const auto oracle = testing::solve_dense_lp(lp);
    ASSERT_EQ(oracle.status, testing::OracleStatus::kOptimal);
    const Trajectories traj =
        unstack_trajectories(oracle.x.head(2 * pc.machine.num_bixels() + pc.machine.num_beams), pc.machine);
    const Vector dose = dose_from_trajectories(pc.influence, traj, pc.machine);
    for (std::size_t k = 0; k < pc.criteria.size(); ++k) {
      const Criterion& c = pc.criteria[k];
      const double xi = oracle.x[lp.criterion_columns[k].xi];
      const double s = criterion_surrogate(pc.phantom, dose, c);
      const double d = criterion_statistic(pc.phantom, dose, c);
      if (is_upper_type(c.type)) {
        EXPECT_LE(s, xi + 1e-7);
        EXPECT_LE(d, s + 1e-9);
        if (c.upper) {
          EXPECT_LE(d, *c.upper + 1e-7);
        }
      } else {
        EXPECT_GE(s, xi - 1e-7);
        EXPECT_GE(d, s - 1e-9);
        if (c.lower) {
          EXPECT_GE(d, *c.lower - 1e-7);
        }
      }
    }
  }
}

TEST(FormulationProperties, OptimumInvariantUnderBlockPermutations) {
  Rng rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    const PlanningCase pc = testing::random_case(rng);
    const BlockLP lp = build_weighted_instance(pc.phantom, pc.machine, pc.influence, pc.criteria,
                                               testing::random_weights(rng, pc.num_objectives()));
    // Permute x1 columns, y1 rows, y21 rows, and eta columns together with their excess rows.
    std::vector<Index> col(static_cast<std::size_t>(lp.num_cols())), row(static_cast<std::size_t>(lp.num_rows()));
    std::iota(col.begin(), col.end(), Index{0});
    std::iota(row.begin(), row.end(), Index{0});
    std::shuffle(col.begin(), col.begin() + lp.n1, rng);
    std::shuffle(row.begin(), row.begin() + lp.m1, rng);
    std::shuffle(row.begin() + lp.m1, row.begin() + lp.m1 + lp.m21, rng);
    std::vector<Index> eta(static_cast<std::size_t>(lp.n2));
    std::iota(eta.begin(), eta.end(), Index{0});
    std::shuffle(eta.begin(), eta.end(), rng);
    for (Index k = 0; k < lp.n2; ++k) {
      col[lp.n1 + k] = lp.n1 + eta[k];
      row[lp.m1 + lp.m21 + k] = lp.m1 + lp.m21 + eta[k];
    }
    const Matrix a(lp.full_matrix());
    Matrix pa(a.rows(), a.cols());
    Vector cost(lp.num_cols()), lower(lp.num_cols()), upper(lp.num_cols()), rhs(lp.num_rows());
    for (Index i = 0; i < a.rows(); ++i) {
      for (Index j = 0; j < a.cols(); ++j) pa(i, j) = a(row[i], col[j]);
      rhs[i] = lp.rhs[row[i]];
    }
    for (Index j = 0; j < a.cols(); ++j) {
      cost[j] = lp.cost[col[j]];
      lower[j] = lp.lower[col[j]];
      upper[j] = lp.upper[col[j]];
    }
    const BlockLP permuted = BlockLP::from_matrix(pa.sparseView(), lp.n1, lp.m1, lp.m21, cost, rhs, lower, upper);
    const SolveResult a_res = solve(lp);
    const SolveResult b_res = solve(permuted);
    ASSERT_TRUE(a_res.converged()) << a_res.message;
    ASSERT_TRUE(b_res.converged()) << b_res.message;
    EXPECT_NEAR(a_res.objective, b_res.objective, 0.02);
    const auto oracle = testing::solve_dense_lp(permuted);
    ASSERT_EQ(oracle.status, testing::OracleStatus::kOptimal);
    EXPECT_NEAR(oracle.objective, testing::solve_dense_lp(lp).objective, 1e-8);
  }
}

TEST(FormulationProperties, UtopianLevelsAndBoundsAreMonotone) {
  Rng rng(26);
  for (int trial = 0; trial < 15; ++trial) {
    PlanningCase pc = testing::random_case(rng);
    const WeightVector w = testing::random_weights(rng, pc.num_objectives());
    auto optimum = [&](const std::vector<Criterion>& criteria) {
      const BlockLP lp = build_weighted_instance(pc.phantom, pc.machine, pc.influence, criteria, w);
      const auto r = testing::solve_dense_lp(lp);
      EXPECT_EQ(r.status, testing::OracleStatus::kOptimal);
      return r.objective;
    };
    const double base = optimum(pc.criteria);
    std::vector<Criterion> free = pc.criteria;
    for (Criterion& c : free) {
      c.utopian_lower.reset();
      c.utopian_upper.reset();
    }
    EXPECT_LE(optimum(free), base + 1e-8);
    // Tightened hard bounds cannot improve the objective.
    std::vector<Criterion> bounded = pc.criteria;
    for (Criterion& c : bounded) {
      if (is_upper_type(c.type) && c.upper) c.upper = *c.upper * 0.999;
      if (!is_upper_type(c.type) && c.lower) c.lower = *c.lower * 1.0001;
    }
    const BlockLP lp_b = build_weighted_instance(pc.phantom, pc.machine, pc.influence, bounded, w);
    const auto rb = testing::solve_dense_lp(lp_b);
    if (rb.status == testing::OracleStatus::kOptimal) {
      EXPECT_GE(rb.objective, base - 1e-8);
    }
  }
}

TEST(FormulationProperties, MatchesVertexEnumerationOnTinyInstance) {
  Toy t = two_voxel_toy();
  t.machine.transmission = 0.1;
  Criterion hot = make("all", CriterionType::kDavMin, 0.5);
  hot.objective = 0;
  Criterion floor = make("second", CriterionType::kMin);
  floor.lower = 1.0;
  const BlockLP lp = build_weighted_instance(t.phantom, t.machine, t.influence, {hot, floor}, WeightVector({1.0}));
  ASSERT_LE(lp.num_cols(), 8);
  const Matrix a(lp.full_matrix());
  const double brute = testing::brute_force_vertex_minimum(lp.cost, a, lp.rhs, lp.lower, lp.upper);
  ASSERT_TRUE(std::isfinite(brute));
  const auto oracle = testing::solve_dense_lp(lp);
  ASSERT_EQ(oracle.status, testing::OracleStatus::kOptimal);
  EXPECT_NEAR(oracle.objective, brute, 1e-9);
  const SolveResult r = solve(lp);
  ASSERT_TRUE(r.converged()) << r.message;
  EXPECT_NEAR(r.objective, brute, 1e-6 + r.gap);
  EXPECT_GT(brute, 0.0);
}

}  // namespace
}  // namespace mtd
