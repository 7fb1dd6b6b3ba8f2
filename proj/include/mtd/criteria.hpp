#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtd {

// Criterion types named by what is optimized: "dav-min" minimizes a dose-at-volume through the
// upper mean-tail-dose, "dav-max" maximizes one through the lower mean-tail-dose.
enum class CriterionType { kDavMin, kDavMax, kMax, kMin, kAvgMin, kAvgMax };

std::string_view to_string(CriterionType type);
CriterionType criterion_type_from_string(std::string_view text);

// True for the types whose auxiliary variable bounds a statistic from above.
bool is_upper_type(CriterionType type);
bool is_dose_at_volume(CriterionType type);

struct Criterion {
  std::string label;
  std::string roi;
  CriterionType type = CriterionType::kDavMin;
  // Volume fraction v_k for dose-at-volume types.
  double volume_fraction = 0.0;
  std::optional<double> lower;           // l_k, maximizing types only
  std::optional<double> upper;           // u_k, minimizing types only
  std::optional<double> utopian_lower;   // l-hat_k, minimizing types only
  std::optional<double> utopian_upper;   // u-hat_k, maximizing types only
  // Objective this criterion contributes to; criteria sharing an index are summed with their
  // signs (this is how a homogeneity objective pairs a dav-min and a dav-max criterion).
  std::optional<int> objective;

  bool in_objective() const { return objective.has_value(); }
  std::optional<double> hard_bound() const { return is_upper_type(type) ? upper : lower; }
  // +1 for minimized auxiliary variables, -1 for maximized ones.
  double objective_sign() const { return is_upper_type(type) ? 1.0 : -1.0; }
};

// Returns one message per inconsistency; empty when the criterion is well formed.
std::vector<std::string> check_criterion(const Criterion& criterion);

// Number of objectives, i.e. one past the largest objective index. Throws when indices are not
// contiguous from zero.
int count_objectives(const std::vector<Criterion>& criteria);

}  // namespace mtd
