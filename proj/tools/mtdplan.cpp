// mtdplan: command-line front end for case validation, single solves, Pareto sweeps,
// plan evaluation and report regeneration.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mtd/commands.hpp"
#include "mtd/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multicriteria radiotherapy planning with mean-tail-dose objectives"};
  app.require_subcommand(1);

  mtd::RunConfig config;
  std::string weights, out_dir = "out", case_path, plan_path, run_name, export_lp;
  double tol_gy = 0.0;
  int grid_order = 0, workers = 0;

  const struct {
    mtd::Command command;
    const char* help;
  } commands[] = {
      {mtd::Command::kValidate, "check a case file and print diagnostics"},
      {mtd::Command::kSolve, "solve one weighted-sum instance and write plan artifacts"},
      {mtd::Command::kPareto, "solve the weight grid and write a Pareto run directory"},
      {mtd::Command::kEvaluate, "evaluate a stored plan (dose or trajectories)"},
      {mtd::Command::kReport, "regenerate plots and the report of a Pareto run"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(std::string(mtd::to_string(c.command)), c.help);
    sub->add_option("--case", case_path, "case file (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", config.seed, "seed recorded with the outputs");
    if (c.command == mtd::Command::kSolve) {
      sub->add_option("--weights", weights, "comma-separated objective weights, scaled to sum 1");
      sub->add_option("--export-lp", export_lp, "also write the LP in triplet format to this file");
    }
    if (c.command == mtd::Command::kSolve || c.command == mtd::Command::kPareto) {
      sub->add_option("--tol-gy", tol_gy, "duality-gap termination tolerance in Gy");
    }
    if (c.command == mtd::Command::kPareto) {
      sub->add_option("--grid-order", grid_order, "weight lattice order n");
      sub->add_option("--workers", workers, "parallel solves");
      sub->add_option("--run-name", run_name, "run directory name (default: case name and timestamp)");
    }
    if (c.command == mtd::Command::kEvaluate) {
      sub->add_option("--plan", plan_path, "plan file: dose.mtdd, dose CSV or trajectories CSV")->required();
    }
    if (c.command == mtd::Command::kReport) {
      sub->add_option("--plan", plan_path, "Pareto run directory")->required();
    }
    sub->callback([&config, command = c.command] { config.command = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(mtd::ErrorKind::kConfig);
  }

  config.case_path = case_path;
  config.out_dir = out_dir;
  config.plan_path = plan_path;
  config.export_lp = export_lp;
  if (!run_name.empty()) config.run_name = run_name;
  if (const char* cache = std::getenv("MTD_CACHE_DIR"); cache && *cache) config.cache_dir = cache;
  for (CLI::App* sub : app.get_subcommands()) {
    if (const CLI::Option* o = sub->get_option_no_throw("--tol-gy"); o && o->count() > 0) config.tol_gy = tol_gy;
    if (const CLI::Option* o = sub->get_option_no_throw("--grid-order"); o && o->count() > 0) config.grid_order = grid_order;
    if (const CLI::Option* o = sub->get_option_no_throw("--workers"); o && o->count() > 0) config.workers = workers;
  }
  if (!weights.empty()) {
    try {
      config.weights = mtd::parse_weight_list(weights);
    } catch (const mtd::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return static_cast<int>(e.kind());
    }
  }
  return mtd::run_command(config, std::cout, std::cerr);
}
