#include "mtd/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mtd/error.hpp"

namespace mtd {

std::string_view to_string(CriterionType type) {
  switch (type) {
    case CriterionType::kDavMin:
      return "dav-min";
    case CriterionType::kDavMax:
      return "dav-max";
    case CriterionType::kMax:
      return "max";
    case CriterionType::kMin:
      return "min";
    case CriterionType::kAvgMin:
      return "avg-min";
    case CriterionType::kAvgMax:
      return "avg-max";
  }
  return "unknown";
}

CriterionType criterion_type_from_string(std::string_view text) {
  if (text == "dav-min") return CriterionType::kDavMin;
  if (text == "dav-max") return CriterionType::kDavMax;
  if (text == "max") return CriterionType::kMax;
  if (text == "min") return CriterionType::kMin;
  if (text == "avg-min") return CriterionType::kAvgMin;
  if (text == "avg-max") return CriterionType::kAvgMax;
  throw_config("unknown criterion type '" + std::string(text) + "'");
}

bool is_upper_type(CriterionType type) {
  return type == CriterionType::kDavMin || type == CriterionType::kMax ||
         type == CriterionType::kAvgMin;
}

bool is_dose_at_volume(CriterionType type) {
  return type == CriterionType::kDavMin || type == CriterionType::kDavMax;
}

std::vector<std::string> check_criterion(const Criterion& c) {
  std::vector<std::string> problems;
  const std::string who = c.label.empty() ? c.roi : c.label;
  if (c.roi.empty()) problems.push_back(who + ": missing ROI");
  if (is_dose_at_volume(c.type)) {
    if (!(c.volume_fraction > 0.0 && c.volume_fraction < 1.0)) {
      problems.push_back(who + ": volume fraction must lie in (0,1)");
    }
  }
  auto finite = [&](const std::optional<double>& b, const char* name) {
    if (b && !std::isfinite(*b)) problems.push_back(who + ": bound " + name + " is not finite");
  };
  finite(c.lower, "l");
  finite(c.upper, "u");
  finite(c.utopian_lower, "l_hat");
  finite(c.utopian_upper, "u_hat");
  if (is_upper_type(c.type)) {
    if (c.lower) problems.push_back(who + ": minimized criterion cannot carry a hard lower bound l");
    if (c.utopian_upper) problems.push_back(who + ": minimized criterion cannot carry u_hat");
    if (c.upper && c.utopian_lower && *c.utopian_lower > *c.upper) {
      problems.push_back(who + ": utopian level l_hat exceeds hard bound u");
    }
  } else {
    if (c.upper) problems.push_back(who + ": maximized criterion cannot carry a hard upper bound u");
    if (c.utopian_lower) problems.push_back(who + ": maximized criterion cannot carry l_hat");
    if (c.lower && c.utopian_upper && *c.lower > *c.utopian_upper) {
      problems.push_back(who + ": hard bound l exceeds utopian level u_hat");
    }
  }
  if (!c.in_objective() && !c.hard_bound()) {
    problems.push_back(who + ": criterion has neither an objective nor a hard bound");
  }
  if (c.objective && *c.objective < 0) problems.push_back(who + ": objective index must be >= 0");
  return problems;
}

int count_objectives(const std::vector<Criterion>& criteria) {
  std::set<int> used;
  for (const Criterion& c : criteria) {
    if (c.objective) used.insert(*c.objective);
  }
  if (used.empty()) return 0;
  const int count = *used.rbegin() + 1;
  if (static_cast<int>(used.size()) != count || *used.begin() != 0) {
    throw_config("objective indices must be contiguous starting at 0");
  }
  return count;
}

}  // namespace mtd
