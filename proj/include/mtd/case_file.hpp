#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtd/planning_case.hpp"

namespace mtd {

// Criterion as written in the case file; the volume may be given in cc and is resolved once
// the phantom exists.
struct CriterionEntry {
  Criterion criterion;
  std::optional<double> volume_cc;
};

// Parsed, not yet voxelized, case file. See docs/case_schema.md.
struct CaseDefinition {
  std::string name;
  PhantomSpec phantom;
  MachineModel machine;
  KernelParams kernel;
  std::vector<CriterionEntry> criteria;
  std::vector<std::string> objective_names;
  std::vector<QualityIndexSpec> quality_indices;
  SolverSettings solver;
  double dvh_step_gy = 0.1;
  int grid_order = 5;
  int workers = 1;
};

// Parses and schema-checks a case. Problems raise a config error whose message lists every
// offending field path, e.g. "criteria[3].v".
CaseDefinition parse_case(const std::string& json_text, const std::string& source_name = "case");
CaseDefinition load_case_file(const std::filesystem::path& path);

// Voxelizes the phantom, resolves cc volumes and computes (or loads from cache_dir) the dose
// influence matrix. An empty cache_dir disables caching.
PlanningCase build_planning_case(const CaseDefinition& definition, const std::filesystem::path& cache_dir = {});

struct Diagnostic {
  enum class Level { kWarning, kError } level = Level::kWarning;
  std::string message;
};

// Consistency checks beyond the schema: targets present, criterion bound placement, objective
// count, quality index ROIs and the sweep-time bound against T_max for the fluence that
// delivering every target's lower bound would need.
std::vector<Diagnostic> validate_planning_case(const PlanningCase& planning_case);

}  // namespace mtd
