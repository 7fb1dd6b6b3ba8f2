#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "generators.hpp"
#include "mtd/case_file.hpp"
#include "mtd/error.hpp"
#include "mtd/mco.hpp"

namespace mtd {
namespace {

using testing::Rng;
using testing::uniform;

std::size_t binomial(int n, int k) {
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

TEST(WeightGrid, SizesOrderAndSums) {
  const WeightGrid g1 = weight_grid(3, 1);
  ASSERT_EQ(g1.weights.size(), 3u);
  EXPECT_EQ(g1.weights[0].values(), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(g1.weights[1].values(), (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(g1.weights[2].values(), (std::vector<double>{0, 0, 1}));
  for (int k = 1; k <= 4; ++k) {
    for (int n = 1; n <= 8; ++n) {
      const WeightGrid g = weight_grid(k, n);
      ASSERT_EQ(g.weights.size(), binomial(n + k - 1, k - 1));
      for (std::size_t i = 0; i < g.weights.size(); ++i) {
        const auto& w = g.weights[i].values();
        EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-15);
        if (i > 0) {
          EXPECT_TRUE(g.weights[i - 1].values() > w);
        }
      }
    }
  }
  EXPECT_EQ(weight_grid(3, 7).weights.size(), 36u);
  EXPECT_THROW(weight_grid(3, 0), Error);
  EXPECT_THROW(weight_grid(0, 2), Error);
}

TEST(WeightGrid, BalancedIndex) {
  const WeightGrid g = weight_grid(3, 3);
  EXPECT_EQ(g.weights[balanced_index(g)].values(), (std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}));
  const WeightGrid g2 = weight_grid(2, 4);
  EXPECT_EQ(g2.weights[balanced_index(g2)].values(), (std::vector<double>{0.5, 0.5}));
}

std::vector<std::size_t> brute_nondominated(const std::vector<std::vector<double>>& pts, const std::vector<Aim>& aims,
                                            double eps) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      bool all = true;
      for (std::size_t c = 0; c < aims.size(); ++c) {
        const double gain = aims[c] == Aim::kMinimize ? pts[i][c] - pts[j][c] : pts[j][c] - pts[i][c];
        all = all && gain > eps;
      }
      dominated = dominated || all;
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

TEST(Nondominated, Examples) {
  const std::vector<Aim> mm = {Aim::kMinimize, Aim::kMinimize};
  EXPECT_EQ(nondominated_subset({{1, 1}, {2, 2}, {0, 3}}, mm), (std::vector<std::size_t>{0, 2}));
  // Ties in one coordinate are not dominated under the strict relation.
  EXPECT_EQ(nondominated_subset({{1, 1}, {1, 2}}, mm), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(nondominated_subset({{1, 1}, {1.05, 1.05}}, mm, 0.1), (std::vector<std::size_t>{0, 1}));
  const std::vector<Aim> mx = {Aim::kMinimize, Aim::kMaximize};
  EXPECT_EQ(nondominated_subset({{1, 5}, {2, 4}}, mx), (std::vector<std::size_t>{0}));
  EXPECT_THROW(nondominated_subset({{1, 2, 3}}, mm), Error);
}

TEST(NondominatedProperties, MatchesBruteForceAndIsStable) {
  Rng rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = testing::uniform_int(rng, 1, 4);
    const int n = testing::uniform_int(rng, 0, 25);
    std::vector<Aim> aims;
    for (int c = 0; c < dim; ++c) aims.push_back(uniform(rng, 0, 1) < 0.5 ? Aim::kMinimize : Aim::kMaximize);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts) {
      for (double& x : p) x = std::round(uniform(rng, 0, 5));  // integer grid creates ties
    }
    const double eps = uniform(rng, 0, 1) < 0.5 ? 0.0 : 0.5;
    const auto keep = nondominated_subset(pts, aims, eps);
    EXPECT_EQ(keep, brute_nondominated(pts, aims, eps));
    if (n > 0) {
      EXPECT_FALSE(keep.empty());
    }

    // Idempotent on the kept subset.
    std::vector<std::vector<double>> sub;
    for (std::size_t i : keep) sub.push_back(pts[i]);
    EXPECT_EQ(nondominated_subset(sub, aims, eps).size(), sub.size());

    // Order invariant: reversing the input maps the kept set accordingly.
    std::vector<std::vector<double>> rev(pts.rbegin(), pts.rend());
    std::vector<std::size_t> mapped;
    for (std::size_t i : nondominated_subset(rev, aims, eps)) mapped.push_back(n - 1 - i);
    std::sort(mapped.begin(), mapped.end());
    EXPECT_EQ(mapped, keep);
  }
}

TEST(ShiftReport, IdenticalAndTranslatedClouds) {
  Rng rng(62);
  std::vector<std::vector<double>> cloud;
  for (int i = 0; i < 12; ++i) cloud.push_back({uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)});
  const std::vector<Aim> aims(3, Aim::kMinimize);
  const ShiftReport same = hull_and_shift_report(cloud, cloud, aims, 1e-9);
  EXPECT_EQ(same.residual_spread, 0.0);
  for (double m : same.mean_displacement) EXPECT_EQ(m, 0.0);
  EXPECT_TRUE(same.sign_check_passed);
  EXPECT_NEAR(same.quality_hull.volume, same.objective_hull.volume, 1e-15);

  const std::vector<double> shift = {-0.5, -1.0, -0.25};
  auto moved = cloud;
  for (auto& p : moved) {
    for (int c = 0; c < 3; ++c) p[c] += shift[c];
  }
  const ShiftReport t = hull_and_shift_report(moved, cloud, aims, 1e-9);
  EXPECT_LE(t.residual_spread, 1e-12);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(t.mean_displacement[c], shift[c], 1e-12);
  EXPECT_TRUE(t.sign_check_passed);  // quality below objective in minimized coordinates
  EXPECT_NEAR(t.quality_hull.volume, t.objective_hull.volume, 1e-12);

  const ShiftReport bad = hull_and_shift_report(cloud, moved, aims, 1e-9);
  EXPECT_FALSE(bad.sign_check_passed);
  EXPECT_NEAR(bad.worst_sign_violation, 1.0, 1e-12);

  const ShiftReport two = hull_and_shift_report({{1, 2}}, {{1, 2}}, {Aim::kMinimize, Aim::kMinimize}, 0.0);
  EXPECT_FALSE(two.notes.empty());
  EXPECT_THROW(hull_and_shift_report({{1, 2}}, {}, {Aim::kMinimize, Aim::kMinimize}, 0.0), Error);
}

class ToyPareto : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    pc_ = new PlanningCase(build_planning_case(load_case_file(MTD_SOURCE_DIR "/cases/toy.json")));
    set_ = new ParetoSet(generate_pareto_set(*pc_, weight_grid(3, 2), pc_->solver, 1));
  }
  static void TearDownTestSuite() {
    delete set_;
    delete pc_;
  }
  static PlanningCase* pc_;
  static ParetoSet* set_;
};

PlanningCase* ToyPareto::pc_ = nullptr;
ParetoSet* ToyPareto::set_ = nullptr;

TEST_F(ToyPareto, EntriesInGridOrderAndConverged) {
  const WeightGrid grid = weight_grid(3, 2);
  ASSERT_EQ(set_->entries.size(), grid.weights.size());
  for (std::size_t i = 0; i < grid.weights.size(); ++i) {
    EXPECT_EQ(set_->entries[i].grid_index, i);
    EXPECT_EQ(set_->entries[i].weights.values(), grid.weights[i].values());
    EXPECT_TRUE(set_->entries[i].converged()) << set_->entries[i].message;
    EXPECT_LE(set_->entries[i].gap, pc_->solver.dose_tolerance);
  }
  EXPECT_EQ(set_->converged_count(), grid.weights.size());
}

TEST_F(ToyPareto, PureWeightPlanIsBestInItsCoordinate) {
  const double tol = pc_->solver.dose_tolerance;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const ParetoEntry* pure = nullptr;
    for (const ParetoEntry& e : set_->entries) {
      if (e.weights[axis] == 1.0) pure = &e;
    }
    ASSERT_NE(pure, nullptr);
    for (const ParetoEntry& e : set_->entries) {
      EXPECT_LE(pure->plan.objective_vector[axis], e.plan.objective_vector[axis] + 2 * tol);
    }
  }
}

TEST_F(ToyPareto, WeightedSumSupportAndNondominance) {
  const SupportCheck check = weighted_sum_support_check(*set_);
  EXPECT_EQ(check.pairs, set_->entries.size() * (set_->entries.size() - 1));
  EXPECT_LE(check.worst, 2 * pc_->solver.dose_tolerance);

  std::vector<std::vector<double>> f;
  for (const ParetoEntry& e : set_->entries) f.push_back(e.plan.objective_vector);
  const auto keep = nondominated_subset(f, std::vector<Aim>(3, Aim::kMinimize), 2 * pc_->solver.dose_tolerance);
  EXPECT_EQ(keep.size(), f.size());

  std::vector<Aim> aims;
  for (const auto& q : pc_->quality_indices) aims.push_back(q.aim);
  for (std::size_t i : nondominated_without_violations(*set_, aims)) {
    EXPECT_TRUE(set_->entries[i].converged());
    EXPECT_FALSE(set_->entries[i].evaluation.any_target_flagged());
  }
}

TEST_F(ToyPareto, RepeatedWeightsAndWorkersAreDeterministic) {
  WeightGrid repeated;
  repeated.order = 2;
  repeated.weights = {WeightVector({0.5, 0.5, 0.0}), WeightVector({0.5, 0.5, 0.0})};
  const ParetoSet twice = generate_pareto_set(*pc_, repeated, pc_->solver, 2);
  ASSERT_EQ(twice.entries.size(), 2u);
  EXPECT_EQ(twice.entries[0].plan.dose, twice.entries[1].plan.dose);
  EXPECT_EQ(twice.entries[0].plan.xi, twice.entries[1].plan.xi);
  EXPECT_EQ(twice.entries[0].plan.dose, set_->entries[1].plan.dose);

  const ParetoSet parallel = generate_pareto_set(*pc_, weight_grid(3, 2), pc_->solver, 2);
  for (std::size_t i = 0; i < parallel.entries.size(); ++i) {
    EXPECT_EQ(parallel.entries[i].plan.dose, set_->entries[i].plan.dose);
    EXPECT_EQ(parallel.entries[i].evaluation.quality, set_->entries[i].evaluation.quality);
  }
}

}  // namespace
}  // namespace mtd
