#include "mtd/mco.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mtd/error.hpp"

namespace mtd {

WeightGrid weight_grid(int num_objectives, int order) {
  if (order <= 0) throw_config("weight grid order must be positive");
  if (num_objectives <= 0) throw_config("weight grid needs at least one objective");
  WeightGrid grid;
  grid.order = order;
  std::vector<int> parts(static_cast<std::size_t>(num_objectives), 0);
  const auto emit = [&] {
    std::vector<double> w(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) w[k] = static_cast<double>(parts[k]) / order;
    grid.weights.emplace_back(std::move(w));
  };
  // Compositions of `order` into num_objectives parts, first part descending.
  std::function<void(std::size_t, int)> recurse = [&](std::size_t k, int remaining) {
    if (k + 1 == parts.size()) {
      parts[k] = remaining;
      emit();
      return;
    }
    for (int value = remaining; value >= 0; --value) {
      parts[k] = value;
      recurse(k + 1, remaining - value);
    }
  };
  recurse(0, order);
  return grid;
}

std::size_t balanced_index(const WeightGrid& grid) {
  std::size_t best = 0;
  double best_distance = kInfinity;
  for (std::size_t i = 0; i < grid.weights.size(); ++i) {
    const WeightVector& w = grid.weights[i];
    const double target = 1.0 / static_cast<double>(w.size());
    double distance = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) distance += (w[k] - target) * (w[k] - target);
    if (distance < best_distance - 1e-15) {
      best_distance = distance;
      best = i;
    }
  }
  return best;
}

std::size_t ParetoSet::converged_count() const {
  std::size_t count = 0;
  for (const ParetoEntry& e : entries) count += e.converged() ? 1 : 0;
  return count;
}

ParetoEntry solve_weighted(const PlanningCase& pc, const WeightVector& weights, const SolverSettings& settings,
                           BlockLP* lp_out) {
  const auto start = std::chrono::steady_clock::now();
  ParetoEntry entry;
  entry.weights = weights;
  BlockLP lp = build_weighted_instance(pc.phantom, pc.machine, pc.influence, pc.criteria, weights);
  const SolveResult result = solve(lp, settings);
  entry.status = result.status;
  entry.message = result.message;
  entry.iterations = result.iterations;
  entry.objective = result.objective;
  entry.gap = result.gap;
  if (result.x.size() == lp.num_cols()) {
    entry.plan = extract_plan(lp, result.x, pc.phantom, pc.machine, pc.influence, pc.criteria);
    entry.evaluation = evaluate_plan(pc.phantom, entry.plan.dose, pc.quality_indices, pc.criteria);
  }
  entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (lp_out) *lp_out = std::move(lp);
  return entry;
}

ParetoSet generate_pareto_set(const PlanningCase& pc, const WeightGrid& grid, const SolverSettings& settings,
                              int workers, const ProgressCallback& progress) {
  ParetoSet set;
  set.entries.resize(grid.weights.size());
  set.balanced = balanced_index(grid);
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr failure;

  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.weights.size()) return;
      try {
        ParetoEntry entry = solve_weighted(pc, grid.weights[i], settings);
        entry.grid_index = i;
        std::lock_guard<std::mutex> lock(mutex);
        set.entries[i] = std::move(entry);
        if (progress) progress(set.entries[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!failure) failure = std::current_exception();
        next.store(grid.weights.size());
        return;
      }
    }
  };
  const int threads = std::max(1, std::min(workers, static_cast<int>(grid.weights.size())));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (set.converged_count() == 0 && !set.entries.empty()) {
    throw Error(ErrorKind::kSolver, "every weighted-sum instance failed (first: " +
                                        std::string(to_string(set.entries.front().status)) + ")");
  }
  return set;
}

namespace {

bool dominates(const std::vector<double>& a, const std::vector<double>& b, const std::vector<Aim>& aims,
               double eps) {
  for (std::size_t c = 0; c < a.size(); ++c) {
    const bool better = aims[c] == Aim::kMinimize ? a[c] < b[c] - eps : a[c] > b[c] + eps;
    if (!better) return false;
  }
  return !a.empty();
}

}  // namespace

std::vector<std::size_t> nondominated_subset(const std::vector<std::vector<double>>& points,
                                             const std::vector<Aim>& aims, double eps) {
  for (const auto& p : points) {
    if (p.size() != aims.size()) throw_data("point dimension does not match the aims");
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      dominated = j != i && dominates(points[j], points[i], aims, eps);
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

std::vector<std::size_t> nondominated_without_violations(const ParetoSet& set, const std::vector<Aim>& aims,
                                                         double eps) {
  std::vector<std::size_t> candidates;
  std::vector<std::vector<double>> points;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const ParetoEntry& e = set.entries[i];
    if (!e.converged() || e.evaluation.any_target_flagged()) continue;
    candidates.push_back(i);
    points.push_back(e.evaluation.quality);
  }
  std::vector<std::size_t> out;
  for (std::size_t local : nondominated_subset(points, aims, eps)) out.push_back(candidates[local]);
  return out;
}

SupportCheck weighted_sum_support_check(const ParetoSet& set) {
  SupportCheck check;
  check.worst = -kInfinity;
  auto weighted = [](const WeightVector& w, const std::vector<double>& f) {
    double total = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) total += w[k] * f[k];
    return total;
  };
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const ParetoEntry& a = set.entries[i];
    if (!a.converged()) continue;
    const double own = weighted(a.weights, a.plan.objective_vector);
    for (std::size_t j = 0; j < set.entries.size(); ++j) {
      const ParetoEntry& b = set.entries[j];
      if (i == j || !b.converged()) continue;
      const double excess = own - weighted(a.weights, b.plan.objective_vector);
      ++check.pairs;
      if (excess > check.worst) {
        check.worst = excess;
        check.worst_i = i;
        check.worst_j = j;
      }
    }
  }
  if (check.pairs == 0) check.worst = 0.0;
  return check;
}

ShiftReport hull_and_shift_report(const std::vector<std::vector<double>>& quality_points,
                                  const std::vector<std::vector<double>>& objective_points,
                                  const std::vector<Aim>& aims, double tol) {
  if (quality_points.size() != objective_points.size()) {
    throw_data("quality and objective clouds differ in size");
  }
  const std::size_t dim = aims.size();
  for (std::size_t i = 0; i < quality_points.size(); ++i) {
    if (quality_points[i].size() != dim || objective_points[i].size() != dim) {
      throw_data("point dimension does not match the aims");
    }
  }
  ShiftReport report;
  const std::size_t count = quality_points.size();
  report.mean_displacement.assign(dim, 0.0);
  report.residual_spread_per_axis.assign(dim, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> d(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      d[c] = quality_points[i][c] - objective_points[i][c];
      report.mean_displacement[c] += d[c] / static_cast<double>(count);
      const double oriented = aims[c] == Aim::kMinimize ? -d[c] : d[c];
      if (oriented < -tol) report.sign_check_passed = false;
      report.worst_sign_violation = std::max(report.worst_sign_violation, -oriented);
    }
    report.displacement.push_back(std::move(d));
  }
  double total = 0.0;
  for (const auto& d : report.displacement) {
    for (std::size_t c = 0; c < dim; ++c) {
      const double r = d[c] - report.mean_displacement[c];
      report.residual_spread_per_axis[c] += r * r;
      total += r * r;
    }
  }
  if (count > 0) {
    report.residual_spread = std::sqrt(total / static_cast<double>(count));
    for (double& s : report.residual_spread_per_axis) s = std::sqrt(s / static_cast<double>(count));
  }

  if (dim == 3) {
    auto to_points = [](const std::vector<std::vector<double>>& cloud) {
      std::vector<Point3> out;
      for (const auto& p : cloud) out.push_back({p[0], p[1], p[2]});
      return out;
    };
    report.quality_hull = convex_hull_3d(to_points(quality_points));
    report.objective_hull = convex_hull_3d(to_points(objective_points));
    if (report.quality_hull.planar) report.notes.push_back("quality cloud is coplanar; planar hull used");
    if (report.objective_hull.planar) report.notes.push_back("objective cloud is coplanar; planar hull used");
  } else {
    report.notes.push_back("hulls computed for three coordinates only; skipped for dimension " +
                           std::to_string(dim));
  }
  return report;
}

}  // namespace mtd
