#include "mtd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtd/error.hpp"

namespace mtd {

namespace {

constexpr double kFractionSlack = 1e-12;

double total_weight(std::span<const double> dose, std::span<const double> weights) {
  if (dose.size() != weights.size()) throw_data("dose and weight lists differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw_data("negative voxel weight");
    total += w;
  }
  if (dose.empty() || !(total > 0.0)) throw_data("empty weight support");
  return total;
}

std::vector<std::size_t> order_by_dose(std::span<const double> dose, bool descending) {
  std::vector<std::size_t> order(dose.size());
  std::iota(order.begin(), order.end(), 0);
  if (descending) {
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dose[a] > dose[b]; });
  } else {
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dose[a] < dose[b]; });
  }
  return order;
}

// Weighted mean of the first `fraction` of total weight along `order`.
double tail_mean(std::span<const double> dose, std::span<const double> weights,
                 const std::vector<std::size_t>& order, double target) {
  double remaining = target;
  double sum = 0.0;
  for (std::size_t i : order) {
    if (weights[i] == 0.0) continue;
    const double take = std::min(weights[i], remaining);
    sum += take * dose[i];
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  return sum / target;
}

}  // namespace

RoiDose gather_roi_dose(const Vector& dose, const Roi& roi) {
  RoiDose out;
  out.dose.reserve(roi.voxels.size());
  for (Index v : roi.voxels) {
    if (v >= dose.size()) throw_data("dose vector is shorter than the ROI voxel indices");
    out.dose.push_back(dose[v]);
  }
  out.weights = roi.weights;
  return out;
}

double dose_at_volume(std::span<const double> dose, std::span<const double> weights, double v) {
  const double total = total_weight(dose, weights);
  if (v <= 0.0) return max_dose(dose, weights);
  if (v >= 1.0) return min_dose(dose, weights);
  const auto order = order_by_dose(dose, true);
  const double target = v * total - kFractionSlack * total;
  double cumulative = 0.0;
  for (std::size_t i : order) {
    if (weights[i] == 0.0) continue;
    cumulative += weights[i];
    if (cumulative >= target) return dose[i];
  }
  return min_dose(dose, weights);
}

double upper_mean_tail_dose(std::span<const double> dose, std::span<const double> weights, double v) {
  const double total = total_weight(dose, weights);
  if (!(v > 0.0 && v <= 1.0)) throw_config("upper mean-tail-dose requires v in (0,1]");
  return tail_mean(dose, weights, order_by_dose(dose, true), v * total);
}

double lower_mean_tail_dose(std::span<const double> dose, std::span<const double> weights, double v) {
  const double total = total_weight(dose, weights);
  if (!(v >= 0.0 && v < 1.0)) throw_config("lower mean-tail-dose requires v in [0,1)");
  return tail_mean(dose, weights, order_by_dose(dose, false), (1.0 - v) * total);
}

double mean_dose(std::span<const double> dose, std::span<const double> weights) {
  const double total = total_weight(dose, weights);
  double sum = 0.0;
  for (std::size_t i = 0; i < dose.size(); ++i) sum += weights[i] * dose[i];
  return sum / total;
}

double max_dose(std::span<const double> dose, std::span<const double> weights) {
  total_weight(dose, weights);
  double best = -kInfinity;
  for (std::size_t i = 0; i < dose.size(); ++i) {
    if (weights[i] > 0.0) best = std::max(best, dose[i]);
  }
  return best;
}

double min_dose(std::span<const double> dose, std::span<const double> weights) {
  total_weight(dose, weights);
  double best = kInfinity;
  for (std::size_t i = 0; i < dose.size(); ++i) {
    if (weights[i] > 0.0) best = std::min(best, dose[i]);
  }
  return best;
}

double homogeneity_index(std::span<const double> dose, std::span<const double> weights, double low,
                         double high) {
  if (!(low >= 0.0 && high <= 1.0 && low < high)) {
    throw_config("homogeneity index requires 0 <= low < high <= 1");
  }
  return dose_at_volume(dose, weights, low) - dose_at_volume(dose, weights, high);
}

std::vector<DvhPoint> dvh_curve(std::span<const double> dose, std::span<const double> weights,
                                std::span<const double> dose_grid) {
  const double total = total_weight(dose, weights);
  for (std::size_t g = 1; g < dose_grid.size(); ++g) {
    if (dose_grid[g] < dose_grid[g - 1]) throw_config("DVH dose grid must be non-decreasing");
  }
  // Suffix sums of weight over doses sorted ascending give the fraction at or above each level.
  const auto order = order_by_dose(dose, false);
  std::vector<double> sorted(order.size()), suffix(order.size() + 1, 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = dose[order[i]];
  for (std::size_t i = order.size(); i-- > 0;) suffix[i] = suffix[i + 1] + weights[order[i]];

  std::vector<DvhPoint> curve;
  curve.reserve(dose_grid.size());
  for (double level : dose_grid) {
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), level) - sorted.begin();
    curve.push_back({level, std::min(1.0, suffix[first] / total)});
  }
  return curve;
}

std::vector<double> uniform_dose_grid(double max_dose, double step) {
  if (!(step > 0.0)) throw_config("DVH grid step must be positive");
  const auto count = static_cast<std::size_t>(std::floor(std::max(max_dose, 0.0) / step)) + 2;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = step * static_cast<double>(i);
  return grid;
}

double cc_to_fraction(const Roi& roi, double cc) {
  if (!(roi.volume_mm3 > 0.0)) throw_config("ROI '" + roi.name + "' has no volume");
  return cc * 1000.0 / roi.volume_mm3;
}

double quality_index(const Phantom& phantom, const Vector& dose, const QualityIndexSpec& spec) {
  const RoiDose rd = gather_roi_dose(dose, phantom.roi(spec.roi));
  switch (spec.kind) {
    case QualityKind::kDoseAtVolume:
      return dose_at_volume(rd.dose, rd.weights, spec.volume_fraction);
    case QualityKind::kAverage:
      return mean_dose(rd.dose, rd.weights);
    case QualityKind::kHomogeneity:
      return homogeneity_index(rd.dose, rd.weights, spec.hi_low, spec.hi_high);
  }
  throw_internal("unhandled quality index kind");
}

double criterion_statistic(const Phantom& phantom, const Vector& dose, const Criterion& c) {
  const RoiDose rd = gather_roi_dose(dose, phantom.roi(c.roi));
  switch (c.type) {
    case CriterionType::kDavMin:
    case CriterionType::kDavMax:
      return dose_at_volume(rd.dose, rd.weights, c.volume_fraction);
    case CriterionType::kMax:
      return max_dose(rd.dose, rd.weights);
    case CriterionType::kMin:
      return min_dose(rd.dose, rd.weights);
    case CriterionType::kAvgMin:
    case CriterionType::kAvgMax:
      return mean_dose(rd.dose, rd.weights);
  }
  throw_internal("unhandled criterion type");
}

double criterion_surrogate(const Phantom& phantom, const Vector& dose, const Criterion& c) {
  if (c.type == CriterionType::kDavMin || c.type == CriterionType::kDavMax) {
    const RoiDose rd = gather_roi_dose(dose, phantom.roi(c.roi));
    return c.type == CriterionType::kDavMin
               ? upper_mean_tail_dose(rd.dose, rd.weights, c.volume_fraction)
               : lower_mean_tail_dose(rd.dose, rd.weights, c.volume_fraction);
  }
  return criterion_statistic(phantom, dose, c);
}

double relative_violation(double achieved, double bound, bool is_upper_bound) {
  const double excess = is_upper_bound ? achieved - bound : bound - achieved;
  if (excess <= 0.0) return 0.0;
  const double scale = std::abs(bound);
  return scale > 1e-12 ? excess / scale : excess;
}

bool PlanEvaluation::any_target_flagged() const {
  return std::any_of(violations.begin(), violations.end(),
                     [](const ViolationEntry& v) { return v.on_target && v.flag_over_1pct; });
}

PlanEvaluation evaluate_plan(const Phantom& phantom, const Vector& dose,
                             const std::vector<QualityIndexSpec>& indices,
                             const std::vector<Criterion>& criteria) {
  PlanEvaluation eval;
  eval.quality.reserve(indices.size());
  for (const QualityIndexSpec& spec : indices) eval.quality.push_back(quality_index(phantom, dose, spec));
  for (const Criterion& c : criteria) {
    const auto bound = c.hard_bound();
    if (!bound) continue;
    ViolationEntry entry;
    entry.label = c.label;
    entry.roi = c.roi;
    entry.is_upper_bound = is_upper_type(c.type);
    entry.achieved = criterion_statistic(phantom, dose, c);
    entry.surrogate = criterion_surrogate(phantom, dose, c);
    entry.bound = *bound;
    entry.relative_violation = relative_violation(entry.achieved, entry.bound, entry.is_upper_bound);
    entry.flag_over_1pct = entry.relative_violation > 0.01;
    entry.on_target = phantom.roi(c.roi).kind == RoiKind::kTarget;
    eval.violations.push_back(std::move(entry));
  }
  return eval;
}

}  // namespace mtd
