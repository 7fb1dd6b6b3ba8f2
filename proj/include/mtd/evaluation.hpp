#pragma once

#include <span>
#include <string>
#include <vector>

#include "mtd/criteria.hpp"
#include "mtd/phantom.hpp"
#include "mtd/types.hpp"

namespace mtd {

// Dose values and relative volumes of the voxels of one ROI. Volume fractions below are taken
// relative to the total weight, so the weights need not be normalized.
struct RoiDose {
  std::vector<double> dose;
  std::vector<double> weights;
};

RoiDose gather_roi_dose(const Vector& dose, const Roi& roi);

// Largest x such that the weight of voxels with dose >= x is at least v. v <= 0 gives the
// maximum dose and v >= 1 the minimum dose.
double dose_at_volume(std::span<const double> dose, std::span<const double> weights, double v);

// Mean dose of the hottest v-fraction, splitting the boundary voxel; v in (0,1].
double upper_mean_tail_dose(std::span<const double> dose, std::span<const double> weights, double v);

// Mean dose of the coldest (1-v)-fraction, splitting the boundary voxel; v in [0,1).
double lower_mean_tail_dose(std::span<const double> dose, std::span<const double> weights, double v);

double mean_dose(std::span<const double> dose, std::span<const double> weights);
double max_dose(std::span<const double> dose, std::span<const double> weights);
double min_dose(std::span<const double> dose, std::span<const double> weights);

// D(low) - D(high) for volume fractions low < high.
double homogeneity_index(std::span<const double> dose, std::span<const double> weights, double low,
                         double high);

struct DvhPoint {
  double dose = 0.0;
  double volume = 0.0;  // fraction of the ROI receiving at least `dose`
};

std::vector<DvhPoint> dvh_curve(std::span<const double> dose, std::span<const double> weights,
                                std::span<const double> dose_grid);

// 0, step, 2 step, ... up to the first grid point above max_dose.
std::vector<double> uniform_dose_grid(double max_dose, double step = 0.1);

// Volume fraction for a criterion given in cc (1 cc = 1000 mm^3).
double cc_to_fraction(const Roi& roi, double cc);

// ---- Plan-quality evaluation ---------------------------------------------------------------

enum class QualityKind { kDoseAtVolume, kAverage, kHomogeneity };
enum class Aim { kMinimize, kMaximize };

struct QualityIndexSpec {
  std::string label;
  std::string roi;
  QualityKind kind = QualityKind::kAverage;
  double volume_fraction = 0.5;  // dose-at-volume
  double hi_low = 0.01;          // homogeneity: low-percentage fraction
  double hi_high = 0.99;         // homogeneity: high-percentage fraction
  Aim aim = Aim::kMinimize;
};

double quality_index(const Phantom& phantom, const Vector& dose, const QualityIndexSpec& spec);

// Clinical statistic named by the criterion (dose-at-volume, max, min or average dose).
double criterion_statistic(const Phantom& phantom, const Vector& dose, const Criterion& criterion);
// Statistic the optimization bounds: mean-tail-dose for dose-at-volume types, otherwise the same
// as criterion_statistic.
double criterion_surrogate(const Phantom& phantom, const Vector& dose, const Criterion& criterion);

struct ViolationEntry {
  std::string label;
  std::string roi;
  bool is_upper_bound = true;
  double achieved = 0.0;   // clinical statistic, Gy
  double surrogate = 0.0;  // mean-tail-dose statistic, Gy
  double bound = 0.0;      // Gy
  double relative_violation = 0.0;
  bool flag_over_1pct = false;
  bool on_target = false;
};

// Relative amount by which `achieved` misses `bound`; zero when satisfied.
double relative_violation(double achieved, double bound, bool is_upper_bound);

struct PlanEvaluation {
  std::vector<double> quality;
  std::vector<ViolationEntry> violations;

  bool any_target_flagged() const;
};

PlanEvaluation evaluate_plan(const Phantom& phantom, const Vector& dose,
                             const std::vector<QualityIndexSpec>& indices,
                             const std::vector<Criterion>& criteria);

}  // namespace mtd
