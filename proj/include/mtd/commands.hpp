#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mtd/case_file.hpp"
#include "mtd/evaluation.hpp"
#include "mtd/mco.hpp"
#include "mtd/plan.hpp"

namespace mtd {

enum class Command { kValidate, kSolve, kPareto, kEvaluate, kReport };

std::string_view to_string(Command command);
Command command_from_string(std::string_view text);

struct RunConfig {
  Command command = Command::kValidate;
  std::filesystem::path case_path;
  std::filesystem::path out_dir = "out";
  std::filesystem::path plan_path;  // evaluate: plan file; report: Pareto run directory
  std::optional<std::vector<double>> weights;
  std::optional<double> tol_gy;
  std::optional<int> grid_order;
  std::optional<int> workers;
  std::uint64_t seed = 0;
  std::filesystem::path cache_dir;  // empty disables the dose-influence cache
  // Pareto runs go to out_dir/<case>_<timestamp> unless set.
  std::optional<std::string> run_name;
  // solve: also write the weighted-sum LP in triplet format.
  std::filesystem::path export_lp;
};

// Parses "a,b,c" into numbers; throws a config error on malformed input.
std::vector<double> parse_weight_list(std::string_view text);

// Runs one command. Diagnostics go to `err`, progress and summaries to `out`. Returns the exit
// code: 0 ok, 1 solver failure, 2 configuration error, 3 data error, 4 internal error.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_pareto(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);

// Loaded case with the command-line overrides applied.
struct LoadedCase {
  CaseDefinition definition;
  PlanningCase planning_case;
};

LoadedCase load_case(const RunConfig& config);

// ---- Artifact writers and readers ----------------------------------------------------------

void write_trajectories_csv(std::ostream& out, const Trajectories& traj, const MachineModel& machine);
Trajectories read_trajectories_csv(std::istream& in, const std::string& source,
                                   const MachineModel& machine);

// One row per beam and leaf pair with one column per bixel.
void write_fluence_csv(std::ostream& out, const FluenceMap& fluence, const MachineModel& machine);

void write_dose_csv(std::ostream& out, const Vector& dose);
Vector read_dose_csv(std::istream& in, const std::string& source, Index num_voxels);

// Long format: roi, dose_gy, volume_fraction.
void write_dvh_csv(std::ostream& out, const Phantom& phantom, const Vector& dose, double step_gy);

void write_quality_csv(std::ostream& out, const std::vector<QualityIndexSpec>& indices,
                       const std::vector<double>& values);
void write_violations_csv(std::ostream& out, const std::vector<ViolationEntry>& violations);
void write_auxiliary_csv(std::ostream& out, const std::vector<Criterion>& criteria, const Plan& plan);

// Reads a stored plan into a dose vector. Accepts a dose binary (.mtdd), a dose CSV
// (voxel,dose_gy), a trajectories CSV, or a directory holding dose.mtdd.
Vector load_plan_dose(const std::filesystem::path& path, const PlanningCase& planning_case);

void write_pareto_csv(std::ostream& out, const PlanningCase& planning_case, const ParetoSet& set,
                      const std::vector<std::size_t>& nondominated,
                      const std::vector<std::size_t>& nondominated_clean);
void write_shift_csv(std::ostream& out, const ParetoSet& set, const ShiftReport& report);

}  // namespace mtd
