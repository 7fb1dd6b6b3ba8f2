#include "mtd/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mtd/error.hpp"
#include "mtd/io.hpp"
#include "mtd/svg.hpp"

namespace mtd {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_config("cannot write '" + path.string() + "': output directory not writable");
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw_config("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
}

std::string_view kind_name(QualityKind kind) {
  switch (kind) {
    case QualityKind::kDoseAtVolume: return "dose-at-volume";
    case QualityKind::kAverage: return "average";
    case QualityKind::kHomogeneity: return "homogeneity";
  }
  return "?";
}

std::string_view aim_name(Aim aim) { return aim == Aim::kMinimize ? "minimize" : "maximize"; }

std::vector<Aim> quality_aims(const PlanningCase& pc) {
  std::vector<Aim> aims;
  for (const QualityIndexSpec& q : pc.quality_indices) aims.push_back(q.aim);
  return aims;
}

// Objective vector oriented like the quality indices: maximized coordinates flip back to the
// maximized auxiliary value.
std::vector<double> oriented_objective(const ParetoEntry& e, const std::vector<Aim>& aims) {
  std::vector<double> out = e.plan.objective_vector;
  for (std::size_t k = 0; k < out.size() && k < aims.size(); ++k) {
    if (aims[k] == Aim::kMaximize) out[k] = -out[k];
  }
  return out;
}

std::string plan_dir_name(std::size_t index) {
  std::ostringstream s;
  s << "plan_" << std::setw(3) << std::setfill('0') << index;
  return s.str();
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

WeightVector resolve_weights(const RunConfig& config, int num_objectives) {
  if (!config.weights) {
    return WeightVector::normalized(std::vector<double>(static_cast<std::size_t>(num_objectives), 1.0));
  }
  if (config.weights->size() != static_cast<std::size_t>(num_objectives)) {
    throw_config("--weights: expected " + std::to_string(num_objectives) + " values, got " +
                 std::to_string(config.weights->size()));
  }
  return WeightVector::normalized(*config.weights);
}

std::string join_weights(const WeightVector& w) {
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) s += (k ? "," : "") + format_double(w[k]);
  return s;
}

void write_evaluation_text(std::ostream& out, const PlanningCase& pc, const PlanEvaluation& eval) {
  out << "quality indices\n";
  for (std::size_t i = 0; i < pc.quality_indices.size(); ++i) {
    const QualityIndexSpec& q = pc.quality_indices[i];
    out << "  " << q.label << " (" << q.roi << ", " << kind_name(q.kind) << ", " << aim_name(q.aim)
        << "): " << format_double(eval.quality[i]) << " Gy\n";
  }
  out << "bound checks\n";
  if (eval.violations.empty()) out << "  none configured\n";
  for (const ViolationEntry& v : eval.violations) {
    out << "  " << v.label << " (" << v.roi << ") " << (v.is_upper_bound ? "<= " : ">= ")
        << format_double(v.bound) << " Gy: achieved " << format_double(v.achieved) << ", surrogate "
        << format_double(v.surrogate) << ", relative violation " << format_double(v.relative_violation)
        << (v.flag_over_1pct ? "  [> 1 %]" : "") << '\n';
  }
}

void write_plan_artifacts(const fs::path& dir, const PlanningCase& pc, const Plan& plan,
                          const PlanEvaluation& eval) {
  {
    auto f = open_output(dir / "trajectories.csv");
    write_trajectories_csv(f, plan.trajectories, pc.machine);
  }
  {
    auto f = open_output(dir / "fluence.csv");
    write_fluence_csv(f, fluence_from_trajectories(plan.trajectories, pc.machine), pc.machine);
  }
  write_dose_volume(dir / "dose.mtdd", pc.phantom.dims(), pc.phantom.voxel_size(), plan.dose);
  {
    auto f = open_output(dir / "dose.csv");
    write_dose_csv(f, plan.dose);
  }
  {
    auto f = open_output(dir / "dvh.csv");
    write_dvh_csv(f, pc.phantom, plan.dose, pc.dvh_step_gy);
  }
  {
    auto f = open_output(dir / "quality.csv");
    write_quality_csv(f, pc.quality_indices, eval.quality);
  }
  {
    auto f = open_output(dir / "violations.csv");
    write_violations_csv(f, eval.violations);
  }
  {
    auto f = open_output(dir / "auxiliary.csv");
    write_auxiliary_csv(f, pc.criteria, plan);
  }
}

std::vector<DvhBand> dvh_bands(const PlanningCase& pc, const std::vector<const Vector*>& doses,
                               const Vector* highlight) {
  std::vector<DvhBand> bands;
  for (const Roi& roi : pc.phantom.rois()) {
    double top = 0.0;
    std::vector<RoiDose> gathered;
    for (const Vector* d : doses) {
      gathered.push_back(gather_roi_dose(*d, roi));
      top = std::max(top, max_dose(gathered.back().dose, gathered.back().weights));
    }
    DvhBand band;
    band.roi = roi.name;
    band.dose = uniform_dose_grid(top, pc.dvh_step_gy);
    band.lower.assign(band.dose.size(), 1.0);
    band.upper.assign(band.dose.size(), 0.0);
    for (const RoiDose& g : gathered) {
      const auto curve = dvh_curve(g.dose, g.weights, band.dose);
      for (std::size_t k = 0; k < curve.size(); ++k) {
        band.lower[k] = std::min(band.lower[k], curve[k].volume);
        band.upper[k] = std::max(band.upper[k], curve[k].volume);
      }
    }
    if (highlight) {
      const RoiDose g = gather_roi_dose(*highlight, roi);
      for (const DvhPoint& p : dvh_curve(g.dose, g.weights, band.dose)) band.highlight.push_back(p.volume);
    }
    bands.push_back(std::move(band));
  }
  return bands;
}

std::array<std::string, 3> scatter_labels(const PlanningCase& pc) {
  std::array<std::string, 3> labels;
  for (std::size_t k = 0; k < 3; ++k) labels[k] = pc.quality_indices[k].label + " [Gy]";
  return labels;
}

void write_text_file(const fs::path& path, const std::string& text) {
  auto f = open_output(path);
  f << text;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::kValidate: return "validate";
    case Command::kSolve: return "solve";
    case Command::kPareto: return "pareto";
    case Command::kEvaluate: return "evaluate";
    case Command::kReport: return "report";
  }
  return "?";
}

Command command_from_string(std::string_view text) {
  for (Command c : {Command::kValidate, Command::kSolve, Command::kPareto, Command::kEvaluate, Command::kReport}) {
    if (to_string(c) == text) return c;
  }
  throw_config("unknown command '" + std::string(text) + "'");
}

std::vector<double> parse_weight_list(std::string_view text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string_view part = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    try {
      values.push_back(parse_double(part));
    } catch (const Error&) {
      throw_config("--weights: '" + std::string(part) + "' is not a number");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

LoadedCase load_case(const RunConfig& config) {
  if (config.case_path.empty()) throw_config("--case is required");
  LoadedCase lc;
  lc.definition = load_case_file(config.case_path);
  if (config.tol_gy) {
    if (!(std::isfinite(*config.tol_gy) && *config.tol_gy > 0.0)) throw_config("--tol-gy must be positive");
    lc.definition.solver.dose_tolerance = *config.tol_gy;
  }
  if (config.grid_order) {
    if (*config.grid_order <= 0) throw_config("--grid-order must be positive");
    lc.definition.grid_order = *config.grid_order;
  }
  if (config.workers) {
    if (*config.workers <= 0) throw_config("--workers must be positive");
    lc.definition.workers = *config.workers;
  }
  lc.planning_case = build_planning_case(lc.definition, config.cache_dir);
  return lc;
}

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::kValidate: return cmd_validate(config, out, err);
      case Command::kSolve: return cmd_solve(config, out, err);
      case Command::kPareto: return cmd_pareto(config, out, err);
      case Command::kEvaluate: return cmd_evaluate(config, out, err);
      case Command::kReport: return cmd_report(config, out, err);
    }
    throw_internal("unhandled command");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kConfig);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kInternal);
  }
}

// ---- validate ----------------------------------------------------------------------------

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const LoadedCase lc = load_case(config);
  const PlanningCase& pc = lc.planning_case;
  out << "case '" << pc.name << "': " << pc.phantom.num_voxels() << " voxels, " << pc.phantom.rois().size()
      << " ROIs, " << pc.machine.num_bixels() << " bixels, " << pc.criteria.size() << " criteria, "
      << pc.num_objectives() << " objectives\n";
  int errors = 0;
  for (const Diagnostic& d : validate_planning_case(pc)) {
    if (d.level == Diagnostic::Level::kError) {
      ++errors;
      err << "error: " << d.message << '\n';
    } else {
      err << "warning: " << d.message << '\n';
    }
  }
  if (errors > 0) {
    err << errors << " error(s)\n";
    return static_cast<int>(ErrorKind::kConfig);
  }
  out << "ok\n";
  return 0;
}

// ---- solve -------------------------------------------------------------------------------

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const LoadedCase lc = load_case(config);
  const PlanningCase& pc = lc.planning_case;
  const WeightVector weights = resolve_weights(config, pc.num_objectives());
  ensure_directory(config.out_dir);

  const BlockLP lp = build_weighted_instance(pc.phantom, pc.machine, pc.influence, pc.criteria, weights);
  const PartitionReport partition = partition_report(lp);
  if (!config.export_lp.empty()) {
    auto f = open_output(config.export_lp);
    write_lp_triplets(lp, f);
  }
  const auto start = std::chrono::steady_clock::now();
  const SolveResult result = solve(lp, pc.solver);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  {
    auto f = open_output(config.out_dir / "solver_log.csv");
    write_iteration_log(result.log, f);
  }

  std::ostringstream report;
  report << "case: " << pc.name << '\n'
         << "weights: " << join_weights(weights) << '\n'
         << "seed: " << config.seed << '\n'
         << "columns: " << partition.n1 << " + " << partition.n2 << " voxelwise\n"
         << "rows: " << partition.m1 << " + " << partition.m21 + partition.m22 << " voxelwise\n"
         << "schur order: " << result.schur_order << (result.dense_schur ? " (dense)" : " (sparse)") << '\n'
         << "status: " << to_string(result.status) << '\n'
         << "iterations: " << result.iterations << '\n'
         << "objective: " << format_double(result.objective) << '\n'
         << "duality gap: " << format_double(result.gap) << " Gy\n";
  if (!result.message.empty()) report << "message: " << result.message << '\n';

  if (result.x.size() == lp.num_cols()) {
    const Plan plan = extract_plan(lp, result.x, pc.phantom, pc.machine, pc.influence, pc.criteria);
    const PlanEvaluation eval = evaluate_plan(pc.phantom, plan.dose, pc.quality_indices, pc.criteria);
    write_plan_artifacts(config.out_dir, pc, plan, eval);
    report << "auxiliary variables\n";
    for (std::size_t k = 0; k < pc.criteria.size(); ++k) {
      report << "  " << pc.criteria[k].label << " (" << to_string(pc.criteria[k].type)
             << "): xi = " << format_double(plan.xi[k]) << ", tight = " << format_double(plan.tight_xi[k]);
      if (!std::isnan(plan.alpha[k])) report << ", alpha = " << format_double(plan.alpha[k]);
      report << '\n';
    }
    report << "objective vector:";
    for (double f : plan.objective_vector) report << ' ' << format_double(f);
    report << '\n';
    double total_time = 0.0;
    for (double t : plan.trajectories.beam_on) total_time += t;
    report << "total beam-on time: " << format_double(total_time) << " s (limit "
           << format_double(pc.machine.max_time_s) << " s)\n";
    write_evaluation_text(report, pc, eval);
  }
  write_text_file(config.out_dir / "report.txt", report.str());
  out << report.str();
  out << "solve time: " << std::fixed << std::setprecision(2) << seconds << " s\n";
  out.unsetf(std::ios::floatfield);

  if (!result.converged()) {
    err << "error: solver finished with status " << to_string(result.status)
        << (result.message.empty() ? "" : ": " + result.message) << '\n';
    return static_cast<int>(ErrorKind::kSolver);
  }
  return 0;
}

// ---- evaluate ----------------------------------------------------------------------------

int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream&) {
  if (config.plan_path.empty()) throw_config("evaluate needs --plan");
  const LoadedCase lc = load_case(config);
  const PlanningCase& pc = lc.planning_case;
  const Vector dose = load_plan_dose(config.plan_path, pc);
  const PlanEvaluation eval = evaluate_plan(pc.phantom, dose, pc.quality_indices, pc.criteria);
  ensure_directory(config.out_dir);
  {
    auto f = open_output(config.out_dir / "quality.csv");
    write_quality_csv(f, pc.quality_indices, eval.quality);
  }
  {
    auto f = open_output(config.out_dir / "violations.csv");
    write_violations_csv(f, eval.violations);
  }
  {
    auto f = open_output(config.out_dir / "dvh.csv");
    write_dvh_csv(f, pc.phantom, dose, pc.dvh_step_gy);
  }
  out << "plan: " << config.plan_path.string() << '\n';
  write_evaluation_text(out, pc, eval);
  return 0;
}

// ---- pareto ------------------------------------------------------------------------------

int cmd_pareto(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const LoadedCase lc = load_case(config);
  const PlanningCase& pc = lc.planning_case;
  const WeightGrid grid = weight_grid(pc.num_objectives(), pc.grid_order);

  fs::path run_dir = config.out_dir / (config.run_name ? *config.run_name : pc.name + "_" + timestamp());
  if (!config.run_name) {
    const fs::path base = run_dir;
    for (int suffix = 1; fs::exists(run_dir); ++suffix) run_dir = base.string() + "-" + std::to_string(suffix);
  }
  ensure_directory(run_dir);
  out << "run directory: " << run_dir.string() << '\n';
  out << grid.weights.size() << " weight vectors (grid order " << grid.order << "), " << pc.workers
      << " worker(s)\n";

  std::size_t done = 0;
  const auto progress = [&](const ParetoEntry& e) {
    ++done;
    out << "  [" << done << '/' << grid.weights.size() << "] plan " << e.grid_index << " w=("
        << join_weights(e.weights) << ") " << to_string(e.status) << " in " << e.iterations
        << " iterations, gap " << format_double(e.gap) << " Gy\n";
    out.flush();
  };
  const ParetoSet set = generate_pareto_set(pc, grid, pc.solver, pc.workers, progress);

  const std::vector<Aim> aims = quality_aims(pc);
  std::vector<std::size_t> converged;
  std::vector<std::vector<double>> objective_pts, quality_pts, oriented_pts;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const ParetoEntry& e = set.entries[i];
    if (!e.converged()) continue;
    converged.push_back(i);
    objective_pts.push_back(e.plan.objective_vector);
    quality_pts.push_back(e.evaluation.quality);
    oriented_pts.push_back(oriented_objective(e, aims));
  }
  std::vector<std::size_t> nondominated;
  for (std::size_t local : nondominated_subset(
           objective_pts, std::vector<Aim>(static_cast<std::size_t>(pc.num_objectives()), Aim::kMinimize),
           pc.solver.dose_tolerance)) {
    nondominated.push_back(converged[local]);
  }
  const std::vector<std::size_t> clean = nondominated_without_violations(set, aims, pc.solver.dose_tolerance);

  for (std::size_t i : converged) {
    const fs::path dir = run_dir / "plans" / plan_dir_name(i);
    ensure_directory(dir);
    write_plan_artifacts(dir, pc, set.entries[i].plan, set.entries[i].evaluation);
  }
  {
    auto f = open_output(run_dir / "pareto.csv");
    write_pareto_csv(f, pc, set, nondominated, clean);
  }

  std::ostringstream summary;
  summary << "case: " << pc.name << '\n'
          << "seed: " << config.seed << '\n'
          << "plans: " << set.entries.size() << ", converged " << converged.size() << '\n'
          << "nondominated objective vectors: " << nondominated.size() << " of " << converged.size() << '\n'
          << "nondominated quality vectors without target violations: " << clean.size() << '\n';
  const SupportCheck support = weighted_sum_support_check(set);
  summary << "weighted-sum support: worst excess " << format_double(support.worst) << " over " << support.pairs
          << " pairs\n";

  const bool shift_possible = pc.quality_indices.size() == static_cast<std::size_t>(pc.num_objectives());
  if (shift_possible && !converged.empty()) {
    const ShiftReport shift = hull_and_shift_report(quality_pts, oriented_pts, aims, pc.solver.dose_tolerance);
    {
      auto f = open_output(run_dir / "shift_report.csv");
      ParetoSet converged_set;
      for (std::size_t i : converged) converged_set.entries.push_back(set.entries[i]);
      write_shift_csv(f, converged_set, shift);
    }
    summary << "mean displacement (quality - objective):";
    for (double d : shift.mean_displacement) summary << ' ' << format_double(d);
    summary << "\nresidual spread: " << format_double(shift.residual_spread) << " Gy (per axis";
    for (double s : shift.residual_spread_per_axis) summary << ' ' << format_double(s);
    summary << ")\nsign check: " << (shift.sign_check_passed ? "passed" : "failed") << " (worst "
            << format_double(shift.worst_sign_violation) << " Gy)\n";
    if (pc.quality_indices.size() == 3) {
      summary << "quality hull: " << shift.quality_hull.vertices.size() << " vertices, "
              << shift.quality_hull.facets.size() << " facets, volume " << format_double(shift.quality_hull.volume)
              << '\n'
              << "objective hull: " << shift.objective_hull.vertices.size() << " vertices, "
              << shift.objective_hull.facets.size() << " facets, volume "
              << format_double(shift.objective_hull.volume) << '\n';
    }
    for (const std::string& note : shift.notes) summary << "note: " << note << '\n';
  } else if (!shift_possible) {
    summary << "note: shift report skipped, " << pc.quality_indices.size() << " quality indices for "
            << pc.num_objectives() << " objectives\n";
  }

  if (pc.quality_indices.size() == 3) {
    std::vector<ScatterPoint> points;
    for (std::size_t i : converged) {
      const ParetoEntry& e = set.entries[i];
      points.push_back({{e.evaluation.quality[0], e.evaluation.quality[1], e.evaluation.quality[2]},
                        !e.evaluation.any_target_flagged(), i == set.balanced});
    }
    write_text_file(run_dir / "scatter.svg", scatter_svg(points, scatter_labels(pc), pc.name + " plan quality"));
  }
  if (!converged.empty()) {
    std::vector<const Vector*> doses;
    for (std::size_t i : converged) doses.push_back(&set.entries[i].plan.dose);
    const Vector* highlight = set.entries[set.balanced].converged() ? &set.entries[set.balanced].plan.dose : nullptr;
    write_text_file(run_dir / "dvh_band.svg", dvh_band_svg(dvh_bands(pc, doses, highlight), pc.name + " DVH band"));
  }

  nlohmann::ordered_json meta;
  meta["case"] = pc.name;
  meta["case_file"] = config.case_path.string();
  meta["seed"] = config.seed;
  meta["grid_order"] = grid.order;
  meta["plans"] = set.entries.size();
  meta["balanced_plan"] = set.balanced;
  meta["dose_tolerance_gy"] = pc.solver.dose_tolerance;
  write_text_file(run_dir / "run.json", meta.dump(2) + "\n");
  write_text_file(run_dir / "summary.txt", summary.str());
  out << summary.str();
  if (converged.size() < set.entries.size()) {
    err << "warning: " << set.entries.size() - converged.size() << " weighted-sum solve(s) did not converge\n";
  }
  return 0;
}

// ---- report ------------------------------------------------------------------------------

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream&) {
  if (config.plan_path.empty()) throw_config("report needs --plan <pareto run directory>");
  const LoadedCase lc = load_case(config);
  const PlanningCase& pc = lc.planning_case;
  const fs::path run_dir = config.plan_path;
  const CsvTable table = read_csv_file(run_dir / "pareto.csv");
  const std::size_t c_plan = table.column("plan"), c_status = table.column("status"),
                    c_balanced = table.column("balanced");

  std::vector<Vector> doses;
  std::vector<PlanEvaluation> evals;
  std::vector<bool> balanced;
  std::ostringstream text;
  text << "case: " << pc.name << '\n' << "run: " << run_dir.string() << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[c_status] != to_string(SolveStatus::kConverged)) continue;
    const auto index = static_cast<std::size_t>(parse_integer(row[c_plan]));
    doses.push_back(load_plan_dose(run_dir / "plans" / plan_dir_name(index), pc));
    evals.push_back(evaluate_plan(pc.phantom, doses.back(), pc.quality_indices, pc.criteria));
    balanced.push_back(row[c_balanced] == "1");
    text << "plan " << index << ':';
    for (double q : evals.back().quality) text << ' ' << format_double(q);
    text << (evals.back().any_target_flagged() ? "  [target violation > 1 %]" : "") << '\n';
  }
  if (doses.empty()) throw_data(run_dir.string() + "/pareto.csv: no converged plans");

  if (pc.quality_indices.size() == 3) {
    std::vector<ScatterPoint> points;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      points.push_back({{evals[i].quality[0], evals[i].quality[1], evals[i].quality[2]},
                        !evals[i].any_target_flagged(), balanced[i]});
    }
    write_text_file(run_dir / "scatter.svg", scatter_svg(points, scatter_labels(pc), pc.name + " plan quality"));
  }
  std::vector<const Vector*> ptrs;
  const Vector* highlight = nullptr;
  for (std::size_t i = 0; i < doses.size(); ++i) {
    ptrs.push_back(&doses[i]);
    if (balanced[i]) highlight = &doses[i];
  }
  write_text_file(run_dir / "dvh_band.svg", dvh_band_svg(dvh_bands(pc, ptrs, highlight), pc.name + " DVH band"));
  write_text_file(run_dir / "report.txt", text.str());
  out << text.str();
  return 0;
}

// ---- artifacts ---------------------------------------------------------------------------

void write_trajectories_csv(std::ostream& out, const Trajectories& traj, const MachineModel& m) {
  CsvWriter csv(out);
  csv.field("beam").field("leaf_pair").field("bixel").field("l_time_s").field("r_time_s").field("beam_on_s").end_row();
  for (int b = 0; b < m.num_beams; ++b) {
    for (int n = 0; n < m.leaf_pairs; ++n) {
      for (int j = 0; j < m.bixels_per_row; ++j) {
        const auto col = static_cast<std::size_t>(m.bixel_column(b, n, j));
        csv.field(b).field(n).field(j).field(traj.left[col]).field(traj.right[col]);
        csv.field(traj.beam_on[static_cast<std::size_t>(b)]).end_row();
      }
    }
  }
}

namespace {

[[noreturn]] void fail_at(const std::string& source, int line, const std::string& what) {
  throw_data(source + ":" + std::to_string(line) + ": " + what);
}

double field_double(const CsvTable& t, std::size_t r, std::size_t c, const std::string& source) {
  try {
    return parse_double(t.rows[r][c]);
  } catch (const Error&) {
    fail_at(source, t.line_numbers[r], "'" + t.rows[r][c] + "' in column " + t.header[c] + " is not a number");
  }
}

long long field_integer(const CsvTable& t, std::size_t r, std::size_t c, const std::string& source) {
  try {
    return parse_integer(t.rows[r][c]);
  } catch (const Error&) {
    fail_at(source, t.line_numbers[r], "'" + t.rows[r][c] + "' in column " + t.header[c] + " is not an integer");
  }
}

bool has_column(const CsvTable& t, std::string_view name) {
  return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
}

Trajectories trajectories_from_table(const CsvTable& t, const std::string& source, const MachineModel& m) {
  const std::size_t cb = t.column("beam"), cn = t.column("leaf_pair"), cj = t.column("bixel"),
                    cl = t.column("l_time_s"), cr = t.column("r_time_s"), ct = t.column("beam_on_s");
  Trajectories traj = Trajectories::zeros(m);
  std::vector<char> seen(static_cast<std::size_t>(m.num_bixels()), 0);
  std::vector<char> beam_seen(static_cast<std::size_t>(m.num_beams), 0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const long long b = field_integer(t, r, cb, source), n = field_integer(t, r, cn, source),
                    j = field_integer(t, r, cj, source);
    if (b < 0 || b >= m.num_beams || n < 0 || n >= m.leaf_pairs || j < 0 || j >= m.bixels_per_row) {
      fail_at(source, t.line_numbers[r], "bixel index out of range");
    }
    const auto col = static_cast<std::size_t>(m.bixel_column(static_cast<int>(b), static_cast<int>(n),
                                                             static_cast<int>(j)));
    if (seen[col]) fail_at(source, t.line_numbers[r], "duplicate bixel");
    seen[col] = 1;
    traj.left[col] = field_double(t, r, cl, source);
    traj.right[col] = field_double(t, r, cr, source);
    const double beam_on = field_double(t, r, ct, source);
    auto& stored = traj.beam_on[static_cast<std::size_t>(b)];
    if (beam_seen[static_cast<std::size_t>(b)] && stored != beam_on) {
      fail_at(source, t.line_numbers[r], "beam-on time differs between rows of the same beam");
    }
    beam_seen[static_cast<std::size_t>(b)] = 1;
    stored = beam_on;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw_data(source + ": " + std::to_string(std::count(seen.begin(), seen.end(), 0)) + " bixel(s) missing");
  }
  return traj;
}

Vector dose_from_table(const CsvTable& t, const std::string& source, Index num_voxels) {
  const std::size_t cv = t.column("voxel"), cd = t.column("dose_gy");
  Vector dose = Vector::Zero(num_voxels);
  std::vector<char> seen(static_cast<std::size_t>(num_voxels), 0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const long long v = field_integer(t, r, cv, source);
    if (v < 0 || v >= num_voxels) fail_at(source, t.line_numbers[r], "voxel index out of range");
    if (seen[static_cast<std::size_t>(v)]) fail_at(source, t.line_numbers[r], "duplicate voxel");
    seen[static_cast<std::size_t>(v)] = 1;
    const double d = field_double(t, r, cd, source);
    if (!std::isfinite(d) || d < 0.0) fail_at(source, t.line_numbers[r], "dose must be finite and nonnegative");
    dose[static_cast<Index>(v)] = d;
  }
  const auto missing = std::count(seen.begin(), seen.end(), 0);
  if (missing > 0) throw_data(source + ": " + std::to_string(missing) + " voxel(s) missing");
  return dose;
}

}  // namespace

Trajectories read_trajectories_csv(std::istream& in, const std::string& source, const MachineModel& machine) {
  return trajectories_from_table(read_csv(in, source), source, machine);
}

void write_fluence_csv(std::ostream& out, const FluenceMap& fluence, const MachineModel& m) {
  CsvWriter csv(out);
  csv.field("beam").field("leaf_pair");
  for (int j = 0; j < m.bixels_per_row; ++j) csv.field("bixel_" + std::to_string(j));
  csv.end_row();
  for (int b = 0; b < m.num_beams; ++b) {
    for (int n = 0; n < m.leaf_pairs; ++n) {
      csv.field(b).field(n);
      for (int j = 0; j < m.bixels_per_row; ++j) {
        csv.field(fluence.weights[static_cast<std::size_t>(m.bixel_column(b, n, j))]);
      }
      csv.end_row();
    }
  }
}

void write_dose_csv(std::ostream& out, const Vector& dose) {
  CsvWriter csv(out);
  csv.field("voxel").field("dose_gy").end_row();
  for (Index i = 0; i < dose.size(); ++i) csv.field(static_cast<long long>(i)).field(dose[i]).end_row();
}

Vector read_dose_csv(std::istream& in, const std::string& source, Index num_voxels) {
  return dose_from_table(read_csv(in, source), source, num_voxels);
}

void write_dvh_csv(std::ostream& out, const Phantom& phantom, const Vector& dose, double step_gy) {
  CsvWriter csv(out);
  csv.field("roi").field("dose_gy").field("volume_fraction").end_row();
  for (const Roi& roi : phantom.rois()) {
    const RoiDose g = gather_roi_dose(dose, roi);
    const auto grid = uniform_dose_grid(max_dose(g.dose, g.weights), step_gy);
    for (const DvhPoint& p : dvh_curve(g.dose, g.weights, grid)) {
      csv.field(roi.name).field(p.dose).field(p.volume).end_row();
    }
  }
}

void write_quality_csv(std::ostream& out, const std::vector<QualityIndexSpec>& indices,
                       const std::vector<double>& values) {
  CsvWriter csv(out);
  csv.field("label").field("roi").field("kind").field("aim").field("value_gy").end_row();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    csv.field(indices[i].label).field(indices[i].roi).field(kind_name(indices[i].kind));
    csv.field(aim_name(indices[i].aim)).field(values[i]).end_row();
  }
}

void write_violations_csv(std::ostream& out, const std::vector<ViolationEntry>& violations) {
  CsvWriter csv(out);
  csv.field("label").field("roi").field("bound").field("bound_gy").field("achieved_gy").field("surrogate_gy");
  csv.field("relative_violation").field("over_1pct").field("target").end_row();
  for (const ViolationEntry& v : violations) {
    csv.field(v.label).field(v.roi).field(v.is_upper_bound ? "upper" : "lower").field(v.bound).field(v.achieved);
    csv.field(v.surrogate).field(v.relative_violation).field(v.flag_over_1pct ? 1 : 0).field(v.on_target ? 1 : 0);
    csv.end_row();
  }
}

void write_auxiliary_csv(std::ostream& out, const std::vector<Criterion>& criteria, const Plan& plan) {
  CsvWriter csv(out);
  csv.field("label").field("roi").field("type").field("objective").field("xi_gy").field("tight_xi_gy");
  csv.field("alpha_gy").end_row();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Criterion& c = criteria[k];
    csv.field(c.label).field(c.roi).field(to_string(c.type));
    if (c.objective) {
      csv.field(*c.objective);
    } else {
      csv.field("");
    }
    csv.field(plan.xi[k]).field(plan.tight_xi[k]).field(plan.alpha[k]).end_row();
  }
}

Vector load_plan_dose(const fs::path& path, const PlanningCase& pc) {
  fs::path file = path;
  if (fs::is_directory(file)) file /= "dose.mtdd";
  if (!fs::exists(file)) throw_data("plan file '" + file.string() + "' not found");
  if (file.extension() == ".mtdd") {
    const DoseVolume volume = read_dose_volume(file);
    const GridDims& d = pc.phantom.dims();
    if (volume.dims.nx != d.nx || volume.dims.ny != d.ny || volume.dims.nz != d.nz) {
      throw_data(file.string() + ": dose grid does not match the case phantom");
    }
    return volume.dose;
  }
  const std::string source = file.string();
  const CsvTable table = read_csv_file(file);
  if (has_column(table, "dose_gy")) return dose_from_table(table, source, pc.phantom.num_voxels());
  if (has_column(table, "l_time_s")) {
    const Trajectories traj = trajectories_from_table(table, source, pc.machine);
    return dose_from_fluence(pc.influence, fluence_from_trajectories(traj, pc.machine, true));
  }
  throw_data(source + ": unrecognized plan file (expected a dose or trajectories CSV)");
}

void write_pareto_csv(std::ostream& out, const PlanningCase& pc, const ParetoSet& set,
                      const std::vector<std::size_t>& nondominated, const std::vector<std::size_t>& clean) {
  const int K = pc.num_objectives();
  CsvWriter csv(out);
  csv.field("plan");
  for (int k = 0; k < K; ++k) csv.field("w_" + std::to_string(k));
  csv.field("status").field("iterations").field("objective").field("gap_gy");
  for (const Criterion& c : pc.criteria) csv.field("xi_" + c.label);
  for (const Criterion& c : pc.criteria) csv.field("tight_xi_" + c.label);
  for (int k = 0; k < K; ++k) csv.field("f_" + std::to_string(k));
  for (const QualityIndexSpec& q : pc.quality_indices) csv.field("q_" + q.label);
  csv.field("max_target_violation").field("target_flagged").field("nondominated").field("nondominated_clean");
  csv.field("balanced").end_row();

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto contains = [](const std::vector<std::size_t>& v, std::size_t i) {
    return std::find(v.begin(), v.end(), i) != v.end();
  };
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const ParetoEntry& e = set.entries[i];
    const bool ok = e.converged();
    csv.field(i);
    for (int k = 0; k < K; ++k) csv.field(e.weights[static_cast<std::size_t>(k)]);
    csv.field(to_string(e.status)).field(e.iterations).field(e.objective).field(e.gap);
    for (std::size_t c = 0; c < pc.criteria.size(); ++c) csv.field(ok ? e.plan.xi[c] : nan);
    for (std::size_t c = 0; c < pc.criteria.size(); ++c) csv.field(ok ? e.plan.tight_xi[c] : nan);
    for (int k = 0; k < K; ++k) csv.field(ok ? e.plan.objective_vector[static_cast<std::size_t>(k)] : nan);
    for (std::size_t q = 0; q < pc.quality_indices.size(); ++q) csv.field(ok ? e.evaluation.quality[q] : nan);
    double worst = 0.0;
    for (const ViolationEntry& v : e.evaluation.violations) {
      if (v.on_target) worst = std::max(worst, v.relative_violation);
    }
    csv.field(ok ? worst : nan).field(ok && e.evaluation.any_target_flagged() ? 1 : 0);
    csv.field(contains(nondominated, i) ? 1 : 0).field(contains(clean, i) ? 1 : 0);
    csv.field(i == set.balanced ? 1 : 0).end_row();
  }
}

void write_shift_csv(std::ostream& out, const ParetoSet& set, const ShiftReport& report) {
  const std::size_t dim = report.mean_displacement.size();
  CsvWriter csv(out);
  csv.field("record").field("plan");
  for (std::size_t c = 0; c < dim; ++c) csv.field("c" + std::to_string(c));
  csv.end_row();
  for (std::size_t i = 0; i < report.displacement.size(); ++i) {
    csv.field("displacement").field(set.entries[i].grid_index);
    for (double d : report.displacement[i]) csv.field(d);
    csv.end_row();
  }
  csv.field("mean").field("");
  for (double d : report.mean_displacement) csv.field(d);
  csv.end_row();
  csv.field("residual_spread").field("");
  for (double s : report.residual_spread_per_axis) csv.field(s);
  csv.end_row();
  csv.field("residual_spread_norm").field("");
  for (std::size_t c = 0; c < dim; ++c) {
    if (c == 0) {
      csv.field(report.residual_spread);
    } else {
      csv.field("");
    }
  }
  csv.end_row();
}

}  // namespace mtd
