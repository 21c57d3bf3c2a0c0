#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sdiom/branch_and_bound.hpp"
#include "sdiom/error.hpp"
#include "sdiom/formulation.hpp"
#include "sdiom/lshaped.hpp"
#include "sdiom/simplex.hpp"
#include "sdiom/system.hpp"
#include "sdiom/worker_pool.hpp"

using namespace sdiom;
using sdiom::lshaped::CostRecoveryCut;
using sdiom::lshaped::OptimalityCut;
using sdiom::lshaped::SolveOptions;
using sdiom::model::MaintenancePlan;
using sdiom::model::ModelHandle;
using sdiom::model::StageBinding;
using sdiom::model::VarKey;
using sdiom::model::VarKind;

namespace {

// One microgrid with a dispatchable unit and a battery.  Import prices above
// the unit's marginal cost make the PM week operationally expensive, so the
// recourse genuinely depends on the schedule.
sys::MMGSystem coupled_system(int weeks, int hours) {
  sys::MMGSystem system;
  system.horizon_weeks = weeks;
  system.hours_per_week = hours;
  system.loss_fraction = 0.05;

  sys::Microgrid a;
  a.id = "mg1";
  a.grid_buy_limit = 5.0;
  a.grid_sell_limit = 4.0;
  a.crew_cost = 120.0;
  sys::Der gen;
  gen.id = "g1";
  gen.kind = sys::DerKind::conventional;
  gen.p_max = 3.0;
  gen.p_min = 0.5;
  gen.ramp_up = 3.0;
  gen.ramp_down = 3.0;
  gen.min_up = 2;
  gen.min_down = 2;
  gen.no_load_cost = 4.0;
  gen.marginal_cost = 30.0;
  gen.start_cost = 50.0;
  gen.stop_cost = 20.0;
  gen.reliability_floor = 0.55;
  a.ders.push_back(gen);
  sys::Battery bat;
  bat.id = "b1";
  bat.soc_min = 0.2;
  bat.soc_max = 2.0;
  bat.charge_max = 0.8;
  bat.discharge_max = 0.8;
  bat.efficiency = 0.95;
  a.batteries.push_back(bat);

  system.microgrids = {a};
  return system;
}

// A second microgrid with solar, linked both ways to the first.
sys::MMGSystem linked_system(int weeks, int hours) {
  sys::MMGSystem system = coupled_system(weeks, hours);
  sys::Microgrid b;
  b.id = "mg2";
  b.grid_buy_limit = 3.0;
  b.grid_sell_limit = 3.0;
  b.crew_cost = 150.0;
  sys::Der pv;
  pv.id = "pv1";
  pv.kind = sys::DerKind::solar;
  pv.rated_mw = 1.5;
  pv.reliability_floor = 0.5;
  b.ders.push_back(pv);
  system.microgrids.push_back(b);

  system.mg_links.push_back({"mg1", "mg2", 2.0, 2.0});
  system.mg_links.push_back({"mg2", "mg1", 2.0, 2.0});
  return system;
}

// No generation at all: the grid serves everything, so operations never
// depend on the (empty) maintenance schedule.
sys::MMGSystem grid_only_system(int weeks, int hours) {
  sys::MMGSystem system;
  system.horizon_weeks = weeks;
  system.hours_per_week = hours;
  system.loss_fraction = 0.05;
  sys::Microgrid a;
  a.id = "mg1";
  a.grid_buy_limit = 10.0;
  a.grid_sell_limit = 4.0;
  a.crew_cost = 100.0;
  system.microgrids = {a};
  return system;
}

sys::ScenarioSet flat_scenarios(const sys::MMGSystem& system, int count,
                                double crit, double noncrit, double buy,
                                double sell, double cap_frac) {
  sys::ScenarioSet scen;
  scen.num_mgs = system.num_mgs();
  scen.weeks = system.horizon_weeks;
  scen.hours = system.hours_per_week;
  auto order = sys::renewable_order(system);
  for (const auto& r : order) scen.renewable_ids.push_back(r.id);
  scen.connectivity.assign(scen.weeks, sys::Connectivity::grid_connected);
  scen.crit_penalty.assign(scen.num_mgs, 1000.0);
  scen.noncrit_penalty.assign(scen.num_mgs, 100.0);
  scen.scenarios.resize(count);
  for (int w = 0; w < count; ++w) {
    auto& sc = scen.scenarios[w];
    double scale = 1.0 + 0.1 * w;
    sc.probability = 1.0 / count;
    sc.crit_load.assign(scen.mg_cells(), crit * scale);
    sc.noncrit_load.assign(scen.mg_cells(), noncrit * scale);
    sc.price_buy.assign(scen.mg_cells(), buy * scale);
    sc.price_sell.assign(scen.mg_cells(), sell * scale);
    sc.renewable_cap.resize(scen.renewable_cells());
    for (int r = 0; r < scen.num_renewables(); ++r) {
      double rated = system.microgrids[order[r].mg].ders[order[r].der].rated_mw;
      for (int t = 1; t <= scen.weeks; ++t)
        for (int hh = 1; hh <= scen.hours; ++hh)
          sc.renewable_cap[scen.ridx(r, t, hh)] = rated * cap_frac;
    }
  }
  return scen;
}

// One PM task on the dispatchable unit with a two-week window.
MaintenancePlan pm_only_plan(int window_hi) {
  MaintenancePlan plan;
  model::PmTask task;
  task.der_id = "g1";
  task.mg = 0;
  task.der = 0;
  task.window_lo = 1;
  task.window_hi = window_hi;
  task.duration = 1;
  task.cost.assign(window_hi, 10.0);
  for (int i = 1; i < window_hi; ++i) task.cost[i] = task.cost[i - 1] - 2.0;
  plan.pm.push_back(task);
  return plan;
}

sys::MaintenanceSchedule pm_schedule(const std::string& id, int week) {
  sys::MaintenanceSchedule sched;
  sched.pm_week[id] = week;
  return sched;
}

// Probability-weighted exact operational cost of a fixed schedule.
double exact_recourse(const sys::MMGSystem& system, const sys::ScenarioSet& scen,
                      const MaintenancePlan& plan,
                      const std::map<VarKey, double>& values) {
  StageBinding binding;
  binding.values = &values;
  double total = 0.0;
  for (int t = 1; t <= system.horizon_weeks; ++t)
    for (int w = 0; w < scen.num_scenarios(); ++w) {
      ModelHandle h =
          model::build_subproblem(system, scen, plan, t, w, binding, false);
      auto sol = opt::solve_mip(h.lp);
      REQUIRE(sol.status == opt::Status::optimal);
      total += scen.scenarios[w].probability * sol.objective;
    }
  return total;
}

// Relaxed weekly recourse values of a fixed schedule.
std::vector<double> relaxed_by_week(const sys::MMGSystem& system,
                                    const sys::ScenarioSet& scen,
                                    const MaintenancePlan& plan,
                                    const std::map<VarKey, double>& values) {
  StageBinding binding;
  binding.values = &values;
  std::vector<double> out(system.horizon_weeks + 1, 0.0);
  for (int t = 1; t <= system.horizon_weeks; ++t) {
    ModelHandle h =
        model::build_subproblem(system, scen, plan, t, -1, binding, true);
    auto sol = opt::solve_lp(h.lp);
    REQUIRE(sol.status == opt::Status::optimal);
    out[t] = sol.objective;
  }
  return out;
}

// First-stage cost of a schedule when the crew visits exactly the weeks that
// host maintenance starts.
double first_stage_cost(const sys::MMGSystem& system,
                        const MaintenancePlan& plan,
                        const sys::MaintenanceSchedule& sched) {
  double total = 0.0;
  std::map<std::string, std::vector<int>> crew;
  for (const auto& task : plan.pm) {
    int week = sched.pm_week.at(task.der_id);
    total += task.cost[week - task.window_lo];
    crew[system.microgrids[task.mg].id].push_back(week);
  }
  for (const auto& task : plan.cm) {
    int week = sched.cm_week.at(task.der_id);
    total += task.cost;
    crew[system.microgrids[task.mg].id].push_back(week);
  }
  for (auto& [mg_id, weeks] : crew) {
    std::sort(weeks.begin(), weeks.end());
    weeks.erase(std::unique(weeks.begin(), weeks.end()), weeks.end());
    for (const auto& mg : system.microgrids)
      if (mg.id == mg_id) total += mg.crew_cost * double(weeks.size());
  }
  return total;
}

}  // namespace

TEST_CASE("dual multipliers turn a coupled row into an exact linear bound",
          "[lshaped][oracle]") {
  // min 2v subject to -v <= -1 + z, solved at z = 0.25.  The true value
  // function is 2 - 2z wherever the row binds, so the cut must reproduce it.
  ModelHandle h;
  VarKey zkey{VarKind::pm_start, 0, 0, -1, 1};
  h.lp.add_col(2.0, 0.0, opt::kInf, false, "v");
  h.lp.add_row(opt::Sense::le, -0.75, {{0, -1.0}}, "need");
  h.coupling.push_back({0, -1.0, {{zkey, 1.0}}});

  auto sol = opt::solve_lp(h.lp);
  REQUIRE(sol.status == opt::Status::optimal);
  REQUIRE_THAT(sol.objective, Catch::Matchers::WithinAbs(1.5, 1e-9));

  OptimalityCut cut = lshaped::make_week_cut(h, sol, 3);
  CHECK(cut.week == 3);
  CHECK(cut.scenario == -1);
  REQUIRE(cut.beta.size() == 1);
  CHECK(cut.beta[0].first == zkey);
  CHECK_THAT(cut.beta[0].second, Catch::Matchers::WithinAbs(-2.0, 1e-9));
  CHECK_THAT(cut.alpha, Catch::Matchers::WithinAbs(2.0, 1e-9));

  // Tight at the generating point, exact along the whole binding region.
  CHECK_THAT(lshaped::cut_bound(cut, {{zkey, 0.25}}),
             Catch::Matchers::WithinAbs(1.5, 1e-9));
  CHECK_THAT(lshaped::cut_bound(cut, {{zkey, 1.0}}),
             Catch::Matchers::WithinAbs(0.0, 1e-9));

  // Scenario scaling multiplies the whole hyperplane by the probability.
  OptimalityCut scaled = lshaped::make_week_scenario_cut(h, sol, 3, 1, 0.25);
  CHECK(scaled.scenario == 1);
  CHECK_THAT(scaled.alpha, Catch::Matchers::WithinAbs(0.5, 1e-9));
  CHECK_THAT(scaled.beta[0].second, Catch::Matchers::WithinAbs(-0.5, 1e-9));

  // Zero-probability scenarios contribute nothing anywhere.
  OptimalityCut zero = lshaped::make_week_scenario_cut(h, sol, 3, 0, 0.0);
  CHECK_THAT(lshaped::cut_bound(zero, {{zkey, 0.0}}),
             Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(lshaped::cut_bound(zero, {{zkey, 1.0}}),
             Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("cuts are tight at their schedule and valid at every other one",
          "[lshaped]") {
  sys::MMGSystem system = coupled_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.5, 0.5, 50.0, 4.0, 0.0);
  MaintenancePlan plan = pm_only_plan(2);

  std::vector<std::map<VarKey, double>> points;
  for (int week = 1; week <= 2; ++week)
    points.push_back(
        model::first_stage_values(system, plan, pm_schedule("g1", week)));

  // Collect an aggregated and a scenario-resolved cut per week per point.
  std::vector<OptimalityCut> cuts;
  for (const auto& values : points) {
    StageBinding binding;
    binding.values = &values;
    for (int t = 1; t <= 2; ++t) {
      ModelHandle whole =
          model::build_subproblem(system, scen, plan, t, -1, binding, true);
      auto wsol = opt::solve_lp(whole.lp);
      REQUIRE(wsol.status == opt::Status::optimal);
      OptimalityCut agg = lshaped::make_week_cut(whole, wsol, t);

      // Tightness: the hyperplane meets the optimum at its own schedule.
      CHECK_THAT(lshaped::cut_bound(agg, values),
                 Catch::Matchers::WithinRel(wsol.objective, 1e-6));

      double scenario_sum = 0.0;
      for (int w = 0; w < 2; ++w) {
        ModelHandle one =
            model::build_subproblem(system, scen, plan, t, w, binding, true);
        auto osol = opt::solve_lp(one.lp);
        REQUIRE(osol.status == opt::Status::optimal);
        OptimalityCut res = lshaped::make_week_scenario_cut(
            one, osol, t, w, scen.scenarios[w].probability);
        scenario_sum += lshaped::cut_bound(res, values);
        cuts.push_back(res);
      }
      // Scenario-resolved cuts tile the aggregated value at the same point.
      CHECK_THAT(scenario_sum,
                 Catch::Matchers::WithinRel(wsol.objective, 1e-6));
      cuts.push_back(agg);
    }
  }

  // Validity: no cut overestimates the relaxed recourse of any schedule.
  for (const auto& values : points) {
    std::vector<double> truth = relaxed_by_week(system, scen, plan, values);
    for (const auto& cut : cuts) {
      double promised = lshaped::cut_bound(cut, values);
      double actual = truth[cut.week];
      if (cut.scenario >= 0) {
        // A scenario slice can only promise its share of the weekly value.
        StageBinding binding;
        binding.values = &values;
        ModelHandle one = model::build_subproblem(system, scen, plan, cut.week,
                                                  cut.scenario, binding, true);
        auto osol = opt::solve_lp(one.lp);
        REQUIRE(osol.status == opt::Status::optimal);
        actual = scen.scenarios[cut.scenario].probability * osol.objective;
      }
      CHECK(promised <= actual + 1e-6 * (1.0 + std::abs(actual)));
    }
  }
}

TEST_CASE("recovery cut is worth delta at its schedule and inert elsewhere",
          "[lshaped][oracle]") {
  VarKey a{VarKind::pm_start, 0, 0, -1, 1};
  VarKey b{VarKind::crew, 0, -1, -1, 1};
  VarKey c{VarKind::pm_start, 0, 0, -1, 2};
  CostRecoveryCut cut;
  cut.delta = 5.0;
  cut.support = {a, b};
  cut.complement = {c};

  // Exhaustive over the 8 binary corners: the bound reaches delta only at
  // the generating point and is nonpositive everywhere else, so a floor of
  // zero on the recovery variable never excludes any schedule.
  for (int mask = 0; mask < 8; ++mask) {
    std::map<VarKey, double> z{{a, double(mask & 1)},
                               {b, double((mask >> 1) & 1)},
                               {c, double((mask >> 2) & 1)}};
    double bound = lshaped::recovery_bound(cut, z);
    int flips = (1 - (mask & 1)) + (1 - ((mask >> 1) & 1)) + ((mask >> 2) & 1);
    if (flips == 0) {
      CHECK_THAT(bound, Catch::Matchers::WithinAbs(5.0, 1e-12));
    } else {
      CHECK(bound <= 1e-12);
      // Each disagreement costs a full delta.
      CHECK_THAT(bound, Catch::Matchers::WithinAbs(5.0 * (1 - flips), 1e-12));
    }
  }
}

TEST_CASE("recovery cut support partitions the master binaries", "[lshaped]") {
  sys::MMGSystem system = coupled_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.5, 0.5, 50.0, 4.0, 0.0);
  MaintenancePlan plan = pm_only_plan(2);
  ModelHandle master = model::build_master(system, plan, &scen);

  std::vector<double> x(master.lp.num_cols(), 0.0);
  x[master.index.at({VarKind::pm_start, 0, 0, -1, 1})] = 1.0;
  x[master.index.at({VarKind::crew, 0, -1, -1, 1})] = 1.0;

  CostRecoveryCut cut = lshaped::make_recovery_cut(master, x, 3.0);
  REQUIRE(cut.support.size() == 2);
  REQUIRE(cut.complement.size() == 2);
  CHECK(std::count(cut.support.begin(), cut.support.end(),
                   VarKey{VarKind::pm_start, 0, 0, -1, 1}) == 1);
  CHECK(std::count(cut.complement.begin(), cut.complement.end(),
                   VarKey{VarKind::pm_start, 0, 0, -1, 2}) == 1);
  CHECK(std::count(cut.complement.begin(), cut.complement.end(),
                   VarKey{VarKind::crew, 0, -1, -1, 2}) == 1);
  CHECK_THROWS_AS(lshaped::make_recovery_cut(master, x, -1.0), Error);
}

TEST_CASE("decoupled operations converge in at most two iterations",
          "[lshaped]") {
  sys::MMGSystem system = grid_only_system(2, 2);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 2.0, 1.0, 10.0, 4.0, 0.0);
  MaintenancePlan plan;  // nothing to maintain

  lshaped::SolveResult res = lshaped::run_lshaped(system, scen, plan);
  CHECK(res.state.inner_converged);
  CHECK(res.state.outer_converged);
  CHECK(res.state.iteration <= 2);
  CHECK(res.state.round == 1);
  CHECK(res.recovery_cuts.empty());
  CHECK_THAT(res.first_stage_cost, Catch::Matchers::WithinAbs(0.0, 1e-12));

  // The exact cost equals the deterministic equivalent: buying the whole
  // load is optimal and the relaxation has an integral completion.
  ModelHandle de = model::build_deterministic_equivalent(system, scen, plan);
  auto dsol = opt::solve_mip(de.lp);
  REQUIRE(dsol.status == opt::Status::optimal);
  CHECK_THAT(res.objective, Catch::Matchers::WithinRel(dsol.objective, 1e-6));
}

TEST_CASE("decomposition matches the deterministic equivalent", "[lshaped]") {
  sys::MMGSystem system = coupled_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.5, 0.5, 50.0, 4.0, 0.0);
  MaintenancePlan plan = pm_only_plan(2);

  ModelHandle de = model::build_deterministic_equivalent(system, scen, plan);
  auto dsol = opt::solve_mip(de.lp);
  REQUIRE(dsol.status == opt::Status::optimal);

  for (auto variant :
       {model::Variant::per_week, model::Variant::per_week_scenario}) {
    SolveOptions opts;
    opts.variant = variant;
    lshaped::SolveResult res = lshaped::run_lshaped(system, scen, plan, opts);
    REQUIRE(res.state.inner_converged);
    double tol = std::max(opts.eps_lshaped, opts.eps_recovery);
    CHECK(std::abs(res.objective - dsol.objective) <=
          tol * std::max(1.0, std::abs(dsol.objective)));
    // The schedule must be complete and internally consistent.
    REQUIRE(res.schedule.pm_week.count("g1") == 1);
    int week = res.schedule.pm_week.at("g1");
    CHECK((week == 1 || week == 2));
    REQUIRE(res.schedule.crew_weeks.count("mg1") == 1);
    CHECK(res.schedule.crew_weeks.at("mg1") == std::vector<int>{week});
    // Reported objective decomposes into its parts.
    CHECK_THAT(res.first_stage_cost + res.recourse_cost,
               Catch::Matchers::WithinRel(res.objective, 1e-12));
  }
}

TEST_CASE("aggregated and scenario-resolved variants agree", "[lshaped]") {
  sys::MMGSystem system = linked_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.2, 0.5, 50.0, 4.0, 0.6);
  MaintenancePlan plan = pm_only_plan(2);
  model::CmTask repair;
  repair.der_id = "pv1";
  repair.mg = 1;
  repair.der = 0;
  repair.duration = 1;
  repair.cost = 25.0;
  plan.cm.push_back(repair);

  SolveOptions a;
  a.variant = model::Variant::per_week;
  SolveOptions b;
  b.variant = model::Variant::per_week_scenario;
  lshaped::SolveResult ra = lshaped::run_lshaped(system, scen, plan, a);
  lshaped::SolveResult rb = lshaped::run_lshaped(system, scen, plan, b);
  REQUIRE(ra.state.inner_converged);
  REQUIRE(rb.state.inner_converged);
  CHECK(std::abs(ra.objective - rb.objective) <=
        2.0 * a.eps_lshaped * std::max(1.0, std::abs(ra.objective)));
}

TEST_CASE("bounds stay ordered and the floor never decreases", "[lshaped]") {
  sys::MMGSystem system = coupled_system(3, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.5, 0.5, 50.0, 4.0, 0.0);
  MaintenancePlan plan = pm_only_plan(3);

  lshaped::SolveResult res = lshaped::run_lshaped(system, scen, plan);
  REQUIRE(res.state.inner_converged);
  REQUIRE(!res.trace.empty());
  double prev = -opt::kInf;
  for (const auto& rec : res.trace) {
    CHECK(rec.lower_bound >= prev - 1e-9);
    prev = rec.lower_bound;
    CHECK(rec.lower_bound <=
          rec.upper_bound + 1e-6 * (1.0 + std::abs(rec.upper_bound)));
  }
  // Every logged cut was violated when it was added.
  for (const auto& entry : res.cut_log) CHECK(entry.violation > 0.0);
  CHECK(res.cut_log.size() == res.cuts.size() + res.recovery_cuts.size());
}

TEST_CASE("master cuts never overprice any schedule", "[lshaped]") {
  sys::MMGSystem system = coupled_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.5, 0.5, 50.0, 4.0, 0.0);
  MaintenancePlan plan = pm_only_plan(2);

  lshaped::SolveResult res = lshaped::run_lshaped(system, scen, plan);
  REQUIRE(res.state.inner_converged);

  // For every feasible schedule, the master's implied estimate (first stage
  // plus the strongest optimality cuts plus any recovery lift) must stay at
  // or below the schedule's true exact cost, so none is priced out.
  double best_exact = opt::kInf;
  for (int week = 1; week <= 2; ++week) {
    sys::MaintenanceSchedule sched = pm_schedule("g1", week);
    auto values = model::first_stage_values(system, plan, sched);
    // Crew indicators enter the recovery cuts, so extend the assignment.
    for (int t = 1; t <= 2; ++t)
      values[{VarKind::crew, 0, -1, -1, t}] = t == week ? 1.0 : 0.0;

    double eta_sum = 0.0;
    for (int t = 1; t <= 2; ++t) {
      double eta = -opt::kInf;
      for (const auto& cut : res.cuts)
        if (cut.week == t)
          eta = std::max(eta, lshaped::cut_bound(cut, values));
      if (eta > -opt::kInf) eta_sum += eta;
    }
    double theta = 0.0;
    for (const auto& cut : res.recovery_cuts)
      theta = std::max(theta, lshaped::recovery_bound(cut, values));

    double implied = first_stage_cost(system, plan, sched) + eta_sum + theta;
    double exact = first_stage_cost(system, plan, sched) +
                   exact_recourse(system, scen, plan, values);
    CHECK(implied <= exact + 1e-6 * (1.0 + std::abs(exact)));
    best_exact = std::min(best_exact, exact);
  }
  // And the solve actually found the best of the enumerable schedules.
  CHECK(res.objective <=
        best_exact + 1e-3 * std::max(1.0, std::abs(best_exact)));
}

TEST_CASE("worker count changes nothing but the wall clock", "[lshaped]") {
  sys::MMGSystem system = coupled_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.5, 0.5, 50.0, 4.0, 0.0);
  MaintenancePlan plan = pm_only_plan(2);

  SolveOptions serial;
  serial.workers = 1;
  SolveOptions parallel;
  parallel.workers = 2;
  lshaped::SolveResult rs = lshaped::run_lshaped(system, scen, plan, serial);
  lshaped::SolveResult rp = lshaped::run_lshaped(system, scen, plan, parallel);

  CHECK(rs.objective == rp.objective);
  CHECK(rs.state.iteration == rp.state.iteration);
  CHECK(rs.cuts.size() == rp.cuts.size());
  CHECK(rs.recovery_cuts.size() == rp.recovery_cuts.size());
  CHECK(rs.schedule.pm_week == rp.schedule.pm_week);
  CHECK(rs.schedule.crew_weeks == rp.schedule.crew_weeks);
  CHECK(rs.trace.size() == rp.trace.size());
  for (size_t i = 0; i < rs.trace.size(); ++i) {
    CHECK(rs.trace[i].lower_bound == rp.trace[i].lower_bound);
    CHECK(rs.trace[i].upper_bound == rp.trace[i].upper_bound);
  }
}

TEST_CASE("a one-iteration budget still reports an honest incumbent",
          "[lshaped]") {
  sys::MMGSystem system = coupled_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.5, 0.5, 50.0, 4.0, 0.0);
  MaintenancePlan plan = pm_only_plan(2);

  SolveOptions opts;
  opts.max_iterations = 1;
  lshaped::SolveResult res = lshaped::run_lshaped(system, scen, plan, opts);
  CHECK_FALSE(res.state.inner_converged);
  // The reported objective is the exact cost of the incumbent schedule, so
  // it can never undercut the still-open lower bound.
  REQUIRE(res.schedule.pm_week.count("g1") == 1);
  auto values = model::first_stage_values(
      system, plan, pm_schedule("g1", res.schedule.pm_week.at("g1")));
  double exact = exact_recourse(system, scen, plan, values);
  CHECK_THAT(res.recourse_cost, Catch::Matchers::WithinRel(exact, 1e-9));
  CHECK_THAT(res.objective,
             Catch::Matchers::WithinRel(res.first_stage_cost + exact, 1e-12));
  CHECK(res.objective >=
        res.state.lower_bound - 1e-6 * (1.0 + std::abs(res.objective)));
}

TEST_CASE("indexed job runner preserves order and surfaces errors",
          "[lshaped]") {
  auto squares = util::run_indexed<int>(7, 3, [](int i) { return i * i; });
  REQUIRE(squares.size() == 7);
  for (int i = 0; i < 7; ++i) CHECK(squares[i] == i * i);

  auto serial = util::run_indexed<int>(5, 1, [](int i) { return i + 1; });
  CHECK(serial == std::vector<int>{1, 2, 3, 4, 5});

  CHECK(util::run_indexed<int>(0, 4, [](int) { return 0; }).empty());

  CHECK_THROWS_AS(util::run_indexed<int>(6, 2,
                                         [](int i) -> int {
                                           if (i == 3) fail("boom", "test");
                                           return i;
                                         }),
                  Error);
  CHECK_THROWS_AS(util::run_indexed<int>(-1, 1, [](int i) { return i; }),
                  Error);
  CHECK_THROWS_AS(util::run_indexed<int>(1, 0, [](int i) { return i; }),
                  Error);
}
