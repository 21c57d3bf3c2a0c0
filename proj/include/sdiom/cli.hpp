#pragma once

// Command-line front end tying the pipeline together: degradation-driven
// planning (solve), rolling-horizon benchmarking (evaluate), disruption
// studies (resilience), input checking (validate) and model export
// (dump-model).  Exit codes: 0 success, 1 input or configuration error,
// 2 iteration-budget stop before convergence.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sdiom/error.hpp"
#include "sdiom/evaluation.hpp"
#include "sdiom/formulation.hpp"
#include "sdiom/io.hpp"
#include "sdiom/lp_text.hpp"
#include "sdiom/lshaped.hpp"
#include "sdiom/scenario_gen.hpp"
#include "sdiom/system.hpp"

namespace sdiom::cli {

// Everything a subcommand needs, populated by the flag parser.  Path fields
// stay empty when the corresponding flag was not given.
struct RunConfig {
  std::string system_path;
  std::string scenarios_path;
  std::string degradation_path;
  std::string generator_path;
  std::string schedule_path;
  std::string periodic_schedule_path;
  std::string out_dir = ".";
  std::string variant = "week";  // optimality-cut scope: week | week-scenario
  double eps_l = 1e-3;           // decomposition gap tolerance
  double eps_c = 1e-3;           // cost-recovery gap tolerance
  int workers = 1;
  std::uint64_t seed = 1;
  int max_iterations = 500;
  int max_rounds = 50;
  bool dump_model = false;
  // Rolling-horizon knobs (evaluate only).
  int horizon = 12;
  int freeze = 8;
  int span = 78;
  int replications = 4;
  int age_low = 10;
  int age_high = 45;
  // Disruption modes (resilience only); empty means both disrupted modes.
  std::vector<std::string> modes;
};

namespace detail {

inline void check_config(const RunConfig& cfg) {
  require(cfg.eps_l > 0.0 && cfg.eps_c > 0.0, "bad-config",
          "tolerances must be positive");
  require(cfg.workers >= 1, "bad-config", "worker count must be at least 1");
  require(cfg.max_iterations >= 1 && cfg.max_rounds >= 1, "bad-config",
          "iteration budgets must be at least 1");
}

inline model::Variant variant_from(const std::string& s) {
  if (s == "week") return model::Variant::per_week;
  if (s == "week-scenario") return model::Variant::per_week_scenario;
  fail("bad-variant", "unknown cut variant '" + s + "'");
}

inline lshaped::SolveOptions solver_options(const RunConfig& cfg) {
  lshaped::SolveOptions o;
  o.variant = variant_from(cfg.variant);
  o.eps_lshaped = cfg.eps_l;
  o.eps_recovery = cfg.eps_c;
  o.workers = cfg.workers;
  o.max_iterations = cfg.max_iterations;
  o.max_rounds = cfg.max_rounds;
  return o;
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? "." : dir;
  std::filesystem::create_directories(p);
  return p;
}

inline void write(const std::filesystem::path& path, const std::string& text) {
  io::detail::write_file(path.string(), text);
}

// Loads the system and prints any structural violations; a false return
// means the caller should exit with status 1.
inline bool load_system_checked(const std::string& path,
                                sys::MMGSystem& system, std::ostream& err) {
  system = io::load_system(path);
  auto violations = sys::validate(system);
  for (const auto& v : violations) err << v.code << ": " << v.detail << '\n';
  return violations.empty();
}

// Reads a schedule CSV plus the crew sidecar ("crew.csv" in the same
// directory, the layout `solve` writes); a missing sidecar means no visits.
inline sys::MaintenanceSchedule load_schedule(const std::string& path) {
  std::string sched = io::detail::read_file(path);
  std::filesystem::path crew =
      std::filesystem::path(path).parent_path() / "crew.csv";
  std::string crew_text = std::filesystem::exists(crew)
                              ? io::detail::read_file(crew.string())
                              : std::string("mg,week\n");
  return io::read_schedule_csv(sched, crew_text);
}

inline std::string pad_left(const std::string& s, std::size_t w) {
  return std::string(w - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t w) {
  return s + std::string(w - s.size(), ' ');
}

// Prints the benchmark comparison with one column per method, rows in the
// published report order.
inline void print_metrics_table(
    std::ostream& out,
    const std::vector<std::pair<std::string, eval::MetricsReport>>& methods) {
  std::vector<std::string> labels;
  for (const auto& [label, value] : eval::metric_rows(methods.front().second))
    labels.push_back(label);
  std::size_t label_w = std::string("Metrics").size();
  for (const auto& l : labels) label_w = std::max(label_w, l.size());

  struct Column {
    std::string name;
    std::vector<std::string> cells;
    std::size_t width;
  };
  std::vector<Column> cols;
  for (const auto& [name, report] : methods) {
    Column c{name, {}, name.size()};
    for (const auto& [label, value] : eval::metric_rows(report)) {
      c.cells.push_back(io::detail::fmt(value));
      c.width = std::max(c.width, c.cells.back().size());
    }
    cols.push_back(std::move(c));
  }
  out << pad_right("Metrics", label_w);
  for (const auto& c : cols) out << "  " << pad_left(c.name, c.width);
  out << '\n';
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out << pad_right(labels[r], label_w);
    for (const auto& c : cols) out << "  " << pad_left(c.cells[r], c.width);
    out << '\n';
  }
}

// Prints expected resilience loss as metric rows against method/mode
// columns, in first-appearance order.
inline void print_erl_table(std::ostream& out,
                            const std::vector<io::ErlRow>& rows) {
  std::vector<std::string> metrics, columns;
  for (const auto& r : rows) {
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end())
      metrics.push_back(r.metric);
    std::string col = r.method + " " + r.mode;
    if (std::find(columns.begin(), columns.end(), col) == columns.end())
      columns.push_back(col);
  }
  std::size_t label_w = std::string("ERL").size();
  for (const auto& m : metrics) label_w = std::max(label_w, m.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns) widths.push_back(c.size());
  std::vector<std::vector<std::string>> grid(
      metrics.size(), std::vector<std::string>(columns.size()));
  for (const auto& r : rows) {
    std::size_t i = std::size_t(std::find(metrics.begin(), metrics.end(),
                                          r.metric) -
                                metrics.begin());
    std::size_t j = std::size_t(std::find(columns.begin(), columns.end(),
                                          r.method + " " + r.mode) -
                                columns.begin());
    grid[i][j] = io::detail::fmt(r.erl);
    widths[j] = std::max(widths[j], grid[i][j].size());
  }
  out << pad_right("ERL", label_w);
  for (std::size_t j = 0; j < columns.size(); ++j)
    out << "  " << pad_left(columns[j], widths[j]);
  out << '\n';
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    out << pad_right(metrics[i], label_w);
    for (std::size_t j = 0; j < columns.size(); ++j)
      out << "  " << pad_left(grid[i][j], widths[j]);
    out << '\n';
  }
}

}  // namespace detail

// Plans maintenance from the degradation library and solves the two-stage
// program by decomposition; writes the schedule, crew visits, convergence
// trace, cut log and an objective summary.
inline int cmd_solve(const RunConfig& cfg, std::ostream& out,
                     std::ostream& err) {
  detail::check_config(cfg);
  sys::MMGSystem system;
  if (!detail::load_system_checked(cfg.system_path, system, err)) return 1;
  sys::ScenarioSet scen = io::load_scenarios(cfg.scenarios_path);
  prognostics::DegradationLibrary lib =
      io::load_degradation(cfg.degradation_path);
  model::MaintenancePlan plan =
      model::make_plan(system, lib, system.horizon_weeks);

  lshaped::SolveResult res =
      lshaped::run_lshaped(system, scen, plan, detail::solver_options(cfg));

  auto dir = detail::prepare_out_dir(cfg.out_dir);
  detail::write(dir / "schedule.csv", io::write_schedule_csv(res.schedule));
  detail::write(dir / "crew.csv", io::write_crew_csv(res.schedule));
  detail::write(dir / "convergence.csv", io::write_convergence_csv(res.trace));
  detail::write(dir / "cuts.csv", io::write_cuts_csv(res.cut_log));

  const bool converged = res.state.inner_converged;
  io::json summary;
  summary["command"] = "solve";
  summary["variant"] = cfg.variant;
  summary["status"] = converged ? "converged" : "budget-stop";
  summary["objective"] = res.objective;
  summary["first_stage_cost"] = res.first_stage_cost;
  summary["recourse_cost"] = res.recourse_cost;
  summary["lower_bound"] = res.state.lower_bound;
  summary["upper_bound"] = res.state.upper_bound;
  summary["iterations"] = res.state.iteration;
  summary["rounds"] = res.state.round;
  summary["cuts"] = res.cut_log.size();
  summary["eps_lshaped"] = cfg.eps_l;
  summary["eps_recovery"] = cfg.eps_c;
  detail::write(dir / "summary.json", summary.dump(2) + "\n");

  if (cfg.dump_model) {
    model::ModelHandle h =
        model::build_deterministic_equivalent(system, scen, plan);
    detail::write(dir / "model.lp", opt::write_lp_text(h.lp));
  }

  out << "status " << (converged ? "converged" : "budget-stop") << '\n';
  out << "objective " << io::detail::fmt(res.objective) << " bounds ["
      << io::detail::fmt(res.state.lower_bound) << ", "
      << io::detail::fmt(res.state.upper_bound) << "]\n";
  out << "iterations " << res.state.iteration << " rounds " << res.state.round
      << " cuts " << res.cut_log.size() << '\n';
  out << "artifacts in " << dir.string() << '\n';
  return converged ? 0 : 2;
}

// Runs the rolling-horizon study under both the sensor-driven planner and
// the periodic benchmark, then writes the side-by-side report and the
// per-component outcome log.
inline int cmd_evaluate(const RunConfig& cfg, std::ostream& out,
                        std::ostream& err) {
  detail::check_config(cfg);
  require(cfg.replications >= 1, "bad-config",
          "replication count must be at least 1");
  sys::MMGSystem system;
  if (!detail::load_system_checked(cfg.system_path, system, err)) return 1;
  prognostics::DegradationLibrary models =
      io::load_degradation(cfg.degradation_path);
  sys::GeneratorSpec genspec;
  if (!cfg.generator_path.empty())
    genspec = io::load_generator(cfg.generator_path);
  else
    genspec.mg.resize(std::size_t(system.num_mgs()));

  eval::RollingConfig rc;
  rc.horizon = cfg.horizon;
  rc.freeze = cfg.freeze;
  rc.span = cfg.span;
  rc.age_low = cfg.age_low;
  rc.age_high = cfg.age_high;
  rc.solver = detail::solver_options(cfg);
  rc.seeds.clear();
  for (int r = 0; r < cfg.replications; ++r)
    rc.seeds.push_back(cfg.seed + std::uint64_t(r));

  rc.benchmark = eval::Benchmark::periodic;
  eval::RollingResult periodic =
      eval::run_rolling_horizon(system, genspec, models, rc);
  rc.benchmark = eval::Benchmark::sdiom;
  eval::RollingResult sensor =
      eval::run_rolling_horizon(system, genspec, models, rc);

  std::vector<std::pair<std::string, eval::MetricsReport>> reports = {
      {"Periodic", periodic.report}, {"SD-IOM", sensor.report}};
  auto dir = detail::prepare_out_dir(cfg.out_dir);
  detail::write(dir / "metrics.csv", io::write_metrics_csv(reports));
  detail::write(dir / "outcomes.csv",
                io::write_outcomes_csv({{"periodic", periodic.outcomes},
                                        {"sd-iom", sensor.outcomes}}));

  io::json summary;
  summary["command"] = "evaluate";
  summary["seed"] = cfg.seed;
  summary["replications"] = cfg.replications;
  summary["span_weeks"] = cfg.span;
  summary["horizon_weeks"] = cfg.horizon;
  summary["freeze_weeks"] = cfg.freeze;
  for (const auto& [name, report] : reports) {
    io::json jm;
    for (const auto& [label, value] : eval::metric_rows(report))
      jm[label] = value;
    summary["methods"][name] = std::move(jm);
  }
  detail::write(dir / "summary.json", summary.dump(2) + "\n");

  detail::print_metrics_table(out, reports);
  out << "artifacts in " << dir.string() << '\n';
  return 0;
}

// Probes the given schedules with one-week connectivity disruptions and
// writes the expected-resilience-loss table plus per-week performance
// ratios for plotting.
inline int cmd_resilience(const RunConfig& cfg, std::ostream& out,
                          std::ostream& err) {
  detail::check_config(cfg);
  sys::MMGSystem system;
  if (!detail::load_system_checked(cfg.system_path, system, err)) return 1;
  sys::ScenarioSet scen = io::load_scenarios(cfg.scenarios_path);

  std::vector<std::pair<std::string, sys::MaintenanceSchedule>> methods;
  methods.push_back({"sd-iom", detail::load_schedule(cfg.schedule_path)});
  if (!cfg.periodic_schedule_path.empty())
    methods.push_back(
        {"periodic", detail::load_schedule(cfg.periodic_schedule_path)});

  std::vector<std::string> modes = cfg.modes;
  if (modes.empty()) modes = {"locally-connected", "islanded"};
  const eval::DisruptionMetric metrics[] = {
      eval::DisruptionMetric::cost, eval::DisruptionMetric::critical_load,
      eval::DisruptionMetric::noncritical_load};

  std::vector<io::ErlRow> erl_rows;
  std::vector<io::PsiRow> psi_rows;
  for (const auto& [name, schedule] : methods)
    for (const auto& mode_name : modes) {
      sys::Connectivity mode = sys::connectivity_from(mode_name);
      for (eval::DisruptionMetric metric : metrics) {
        eval::DisruptionResult r = eval::disruption_study(
            system, scen, schedule, mode, metric, cfg.workers);
        erl_rows.push_back(
            {name, mode_name, eval::to_string(metric), r.erl});
        for (int t = 1; t < int(r.psi.size()); ++t)
          psi_rows.push_back(
              {name, mode_name, eval::to_string(metric), t, r.psi[t]});
      }
    }

  auto dir = detail::prepare_out_dir(cfg.out_dir);
  detail::write(dir / "erl.csv", io::write_erl_csv(erl_rows));
  detail::write(dir / "psi.csv", io::write_psi_csv(psi_rows));

  detail::print_erl_table(out, erl_rows);
  out << "artifacts in " << dir.string() << '\n';
  return 0;
}

// Checks the system description and, when given, the scenario set's shape
// and the degradation library's component references.
inline int cmd_validate(const RunConfig& cfg, std::ostream& out,
                        std::ostream& err) {
  sys::MMGSystem system = io::load_system(cfg.system_path);
  std::vector<sys::Violation> violations;
  if (!cfg.scenarios_path.empty()) {
    sys::ScenarioSet scen = io::load_scenarios(cfg.scenarios_path);
    violations = sys::validate(system, scen);
  } else {
    violations = sys::validate(system);
  }
  if (!cfg.degradation_path.empty()) {
    prognostics::DegradationLibrary lib =
        io::load_degradation(cfg.degradation_path);
    for (const auto& [id, rec] : lib) {
      bool found = false;
      for (const auto& mg : system.microgrids)
        for (const auto& der : mg.ders)
          if (der.id == id) found = true;
      if (!found)
        violations.push_back(
            {"unknown-der", "degradation record for unknown component '" +
                                id + "'"});
    }
  }
  if (violations.empty()) {
    out << "ok\n";
    return 0;
  }
  for (const auto& v : violations) err << v.code << ": " << v.detail << '\n';
  return 1;
}

// Exports the deterministic equivalent as LP text for external solvers and
// for round-trip checks against the bundled reader.
inline int cmd_dump_model(const RunConfig& cfg, std::ostream& out,
                          std::ostream& err) {
  sys::MMGSystem system;
  if (!detail::load_system_checked(cfg.system_path, system, err)) return 1;
  sys::ScenarioSet scen = io::load_scenarios(cfg.scenarios_path);
  prognostics::DegradationLibrary lib =
      io::load_degradation(cfg.degradation_path);
  model::MaintenancePlan plan =
      model::make_plan(system, lib, system.horizon_weeks);
  model::ModelHandle h =
      model::build_deterministic_equivalent(system, scen, plan);
  auto dir = detail::prepare_out_dir(cfg.out_dir);
  detail::write(dir / "model.lp", opt::write_lp_text(h.lp));
  out << "wrote " << (dir / "model.lp").string() << " ("
      << h.lp.num_cols() << " columns, " << h.lp.num_rows() << " rows)\n";
  return 0;
}

// Parses flags, dispatches to the subcommand, and maps recoverable failures
// to exit code 1.  Streams are parameters so tests can capture the output.
inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  RunConfig cfg;
  CLI::App app{
      "Sensor-driven operations and maintenance scheduling for "
      "multi-microgrid systems"};
  app.require_subcommand(1);

  const std::vector<std::string> variants = {"week", "week-scenario"};
  const std::vector<std::string> mode_names = {
      "grid-connected", "locally-connected", "islanded"};

  CLI::App* solve = app.add_subcommand(
      "solve", "Plan maintenance and solve the two-stage program");
  solve->add_option("--system", cfg.system_path, "System description JSON")
      ->required();
  solve->add_option("--scenarios", cfg.scenarios_path, "Scenario CSV")
      ->required();
  solve
      ->add_option("--degradation", cfg.degradation_path,
                   "Degradation library JSON")
      ->required();
  solve->add_option("--variant", cfg.variant, "Optimality-cut scope")
      ->check(CLI::IsMember(variants));
  solve->add_option("--eps-l", cfg.eps_l, "Decomposition gap tolerance")
      ->check(CLI::PositiveNumber);
  solve->add_option("--eps-c", cfg.eps_c, "Cost-recovery gap tolerance")
      ->check(CLI::PositiveNumber);
  solve->add_option("--workers", cfg.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  solve
      ->add_option("--max-iterations", cfg.max_iterations,
                   "Master iteration budget")
      ->check(CLI::PositiveNumber);
  solve->add_option("--max-rounds", cfg.max_rounds, "Recovery round budget")
      ->check(CLI::PositiveNumber);
  solve->add_option("--out-dir", cfg.out_dir, "Output directory");
  solve->add_flag("--dump-model", cfg.dump_model,
                  "Also export the deterministic equivalent as LP text");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Rolling-horizon benchmark against periodic maintenance");
  evaluate->add_option("--system", cfg.system_path, "System description JSON")
      ->required();
  evaluate
      ->add_option("--degradation", cfg.degradation_path,
                   "Degradation library JSON")
      ->required();
  evaluate->add_option("--generator", cfg.generator_path,
                       "Scenario generator spec JSON");
  evaluate->add_option("--variant", cfg.variant, "Optimality-cut scope")
      ->check(CLI::IsMember(variants));
  evaluate->add_option("--eps-l", cfg.eps_l, "Decomposition gap tolerance")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--eps-c", cfg.eps_c, "Cost-recovery gap tolerance")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--workers", cfg.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", cfg.seed, "Master random seed");
  evaluate
      ->add_option("--replications", cfg.replications,
                   "Fleets with re-seeded initial ages")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--horizon", cfg.horizon, "Planning weeks per cycle")
      ->check(CLI::PositiveNumber);
  evaluate
      ->add_option("--freeze", cfg.freeze,
                   "Weeks committed before re-planning")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--span", cfg.span, "Total simulated weeks")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--age-low", cfg.age_low, "Minimum initial age")
      ->check(CLI::NonNegativeNumber);
  evaluate->add_option("--age-high", cfg.age_high, "Maximum initial age")
      ->check(CLI::NonNegativeNumber);
  evaluate
      ->add_option("--max-iterations", cfg.max_iterations,
                   "Master iteration budget")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--max-rounds", cfg.max_rounds, "Recovery round budget")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--out-dir", cfg.out_dir, "Output directory");

  CLI::App* resilience = app.add_subcommand(
      "resilience", "Expected resilience loss under one-week disruptions");
  resilience
      ->add_option("--system", cfg.system_path, "System description JSON")
      ->required();
  resilience->add_option("--scenarios", cfg.scenarios_path, "Scenario CSV")
      ->required();
  resilience
      ->add_option("--schedule", cfg.schedule_path,
                   "Sensor-driven schedule CSV (crew.csv sidecar optional)")
      ->required();
  resilience->add_option("--periodic-schedule", cfg.periodic_schedule_path,
                         "Benchmark schedule CSV for comparison");
  resilience->add_option("--mode", cfg.modes, "Disruption connectivity mode")
      ->check(CLI::IsMember(mode_names));
  resilience->add_option("--workers", cfg.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  resilience->add_option("--out-dir", cfg.out_dir, "Output directory");

  CLI::App* validate = app.add_subcommand(
      "validate", "Check inputs and print violations");
  validate->add_option("--system", cfg.system_path, "System description JSON")
      ->required();
  validate->add_option("--scenarios", cfg.scenarios_path, "Scenario CSV");
  validate->add_option("--degradation", cfg.degradation_path,
                       "Degradation library JSON");

  CLI::App* dump = app.add_subcommand(
      "dump-model", "Export the deterministic equivalent as LP text");
  dump->add_option("--system", cfg.system_path, "System description JSON")
      ->required();
  dump->add_option("--scenarios", cfg.scenarios_path, "Scenario CSV")
      ->required();
  dump->add_option("--degradation", cfg.degradation_path,
                   "Degradation library JSON")
      ->required();
  dump->add_option("--out-dir", cfg.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg, out, err);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out, err);
    if (resilience->parsed()) return cmd_resilience(cfg, out, err);
    if (validate->parsed()) return cmd_validate(cfg, out, err);
    if (dump->parsed()) return cmd_dump_model(cfg, out, err);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace sdiom::cli
