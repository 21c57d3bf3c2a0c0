#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sdiom/branch_and_bound.hpp"
#include "sdiom/error.hpp"
#include "sdiom/formulation.hpp"
#include "sdiom/prognostics.hpp"
#include "sdiom/simplex.hpp"
#include "sdiom/system.hpp"

using namespace sdiom;
using sdiom::model::BuildOptions;
using sdiom::model::MaintenancePlan;
using sdiom::model::ModelHandle;
using sdiom::model::StageBinding;
using sdiom::model::VarKey;
using sdiom::model::VarKind;

namespace {

// One microgrid: a dispatchable unit plus a battery, grid-tied, no peers.
sys::MMGSystem single_mg_system(int weeks, int hours) {
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

// Two linked microgrids: dispatchable + wind on one side, solar on the other.
sys::MMGSystem two_mg_system(int weeks, int hours) {
  sys::MMGSystem system = single_mg_system(weeks, hours);
  sys::Der wind;
  wind.id = "wt1";
  wind.kind = sys::DerKind::wind;
  wind.rated_mw = 2.0;
  wind.reliability_floor = 0.6;
  system.microgrids[0].ders.push_back(wind);

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

// Flat profiles under full control of the test: every hour of every week sees
// the same loads, prices and renewable capacity, scaled per scenario.
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
    double scale = 1.0 + 0.1 * w;  // mild, deterministic spread
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

// A plan written out directly, sidestepping prognostics: one PM task with a
// three-week window and falling cost.
MaintenancePlan direct_plan() {
  MaintenancePlan plan;
  model::PmTask task;
  task.der_id = "g1";
  task.mg = 0;
  task.der = 0;
  task.window_lo = 1;
  task.window_hi = 3;
  task.duration = 1;
  task.cost = {10.0, 8.0, 6.0};
  plan.pm.push_back(task);
  return plan;
}

sys::MaintenanceSchedule schedule_pm(const std::string& id, int week) {
  sys::MaintenanceSchedule sched;
  sched.pm_week[id] = week;
  return sched;
}

int count_kind(const ModelHandle& h, VarKind kind) {
  int n = 0;
  for (const auto& [key, col] : h.index.entries())
    if (key.kind == kind) ++n;
  return n;
}

int count_rows_with_prefix(const opt::LinearProgram& lp,
                           const std::string& prefix) {
  int n = 0;
  for (const auto& row : lp.rows)
    if (row.name.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_CASE("maintenance plan follows the degradation posterior",
          "[formulation][oracle]") {
  // Zero sensor noise collapses the posterior onto the exact drift, so every
  // quantity downstream has a closed form the test can recompute: drift 1
  // from observations (1,1),(2,2), threshold 10, age 2, means the signal
  // crosses at absolute week 10, i.e. 8 weeks out.  Survival is a step: 1
  // through week 7, 0 from week 8.  The cost rate divides expected
  // replacement cost by age plus accumulated survival.
  sys::MMGSystem system = single_mg_system(12, 4);
  prognostics::DegradationLibrary lib;
  prognostics::DegradationRecord rec;
  rec.model.form = prognostics::Form::linear;
  rec.model.kappa = 0.0;
  rec.model.prior_mean = 0.5;
  rec.model.prior_var = 1.0;
  rec.model.noise_var = 0.0;
  rec.model.threshold = 10.0;
  rec.model.pm_cost = 40.0;
  rec.model.cm_cost = 100.0;
  rec.age_weeks = 2;
  rec.observations = {{1, 1.0}, {2, 2.0}};
  lib["g1"] = rec;

  MaintenancePlan plan = model::make_plan(system, lib, 12);
  REQUIRE(plan.cm.empty());
  REQUIRE(plan.pm.size() == 1);
  const auto& task = plan.pm[0];
  CHECK(task.der_id == "g1");
  CHECK(task.window_lo == 1);
  CHECK(task.window_hi == 8);  // first week survival drops below the floor
  CHECK(task.duration == 1);
  REQUIRE(task.cost.size() == 8);
  for (int t = 1; t <= 7; ++t)
    CHECK_THAT(task.cost[t - 1],
               Catch::Matchers::WithinAbs(40.0 / (2.0 + t), 1e-12));
  CHECK_THAT(task.cost[7], Catch::Matchers::WithinAbs(100.0 / 10.0, 1e-12));

  SECTION("failed units get repair tasks at the corrective cost") {
    system.microgrids[0].ders[0].status = sys::DerStatus::failed;
    MaintenancePlan p2 = model::make_plan(system, lib, 12);
    REQUIRE(p2.pm.empty());
    REQUIRE(p2.cm.size() == 1);
    CHECK(p2.cm[0].der_id == "g1");
    CHECK(p2.cm[0].duration == system.microgrids[0].ders[0].cm_duration);
    CHECK(p2.cm[0].cost == 100.0);
  }
  SECTION("units without records are left alone") {
    lib.clear();
    MaintenancePlan p3 = model::make_plan(system, lib, 12);
    CHECK(p3.pm.empty());
    CHECK(p3.cm.empty());
  }
  SECTION("failed units without records cannot be planned") {
    lib.clear();
    system.microgrids[0].ders[0].status = sys::DerStatus::failed;
    REQUIRE_THROWS_AS(model::make_plan(system, lib, 12), Error);
  }
}

TEST_CASE("master counts match a hand enumeration", "[formulation][oracle]") {
  // One task, window weeks 1..3, one-week duration, horizon 3.  By hand:
  // three start columns, three crew columns, three weekly recourse columns,
  // one recovery column; one exactly-one row and three crew-need rows (the
  // fleet has a single microgrid, so no uniqueness row).
  sys::MMGSystem system = single_mg_system(3, 4);
  ModelHandle h = model::build_master(system, direct_plan());

  CHECK(count_kind(h, VarKind::pm_start) == 3);
  CHECK(count_kind(h, VarKind::cm_start) == 0);
  CHECK(count_kind(h, VarKind::crew) == 3);
  CHECK(count_kind(h, VarKind::recourse) == 3);
  CHECK(count_kind(h, VarKind::recovery) == 1);
  CHECK(h.lp.num_cols() == 10);

  CHECK(count_rows_with_prefix(h.lp, "pm_once") == 1);
  CHECK(count_rows_with_prefix(h.lp, "crew_need") == 3);
  CHECK(count_rows_with_prefix(h.lp, "crew_unique") == 0);
  CHECK(h.lp.num_rows() == 4);

  // Objective carries the week-dependent cost on the start columns.
  CHECK(h.lp.obj[h.index.at({VarKind::pm_start, 0, 0, -1, 1})] == 10.0);
  CHECK(h.lp.obj[h.index.at({VarKind::pm_start, 0, 0, -1, 2})] == 8.0);
  CHECK(h.lp.obj[h.index.at({VarKind::pm_start, 0, 0, -1, 3})] == 6.0);
  CHECK(h.lp.obj[h.index.at({VarKind::crew, 0, -1, -1, 2})] == 120.0);

  SECTION("scenario-resolved recourse gets one column per week and scenario") {
    sys::ScenarioSet scen =
        flat_scenarios(system, 2, 1.0, 0.5, 50.0, 40.0, 0.5);
    BuildOptions opt;
    opt.variant = model::Variant::per_week_scenario;
    ModelHandle hs = model::build_master(system, direct_plan(), &scen, opt);
    CHECK(count_kind(hs, VarKind::recourse) == 6);
    // Probability weighting lives in the cuts, so the column costs 1.
    CHECK(hs.lp.obj[hs.index.at({VarKind::recourse, -1, -1, -1, 2, 0, 1})] ==
          1.0);
  }
}

TEST_CASE("subproblem counts match a hand enumeration",
          "[formulation][oracle]") {
  // One microgrid, one dispatchable unit, one battery, four hours, one
  // scenario, schedule fixed.  Columns: 4 commitment quadruples (16), 5
  // battery columns per hour (20), 4 grid columns per hour (16), 2
  // curtailment columns per hour (8): 60 total.  Rows, counted family by
  // family: gate/cap-hi/cap-lo/logic/on-off are 5 per hour (20); ramps are 1
  // at the first hour then 2 (7); minimum-up pins 3, minimum-down pins 2;
  // battery gives 4 per hour plus the boundary tie (17); grid 3 per hour
  // (12); one balance per hour (4).  65 total.  Every gate row couples to
  // the single start variable whose window covers the build week.
  sys::MMGSystem system = single_mg_system(3, 4);
  sys::ScenarioSet scen = flat_scenarios(system, 1, 1.0, 0.5, 50.0, 40.0, 0.5);
  MaintenancePlan plan = direct_plan();
  auto values =
      model::first_stage_values(system, plan, schedule_pm("g1", 2));
  StageBinding binding;
  binding.values = &values;

  ModelHandle h =
      model::build_subproblem(system, scen, plan, 2, 0, binding, false);
  CHECK(h.lp.num_cols() == 60);
  CHECK(h.lp.num_rows() == 65);
  CHECK(h.coupling.size() == 4);
  for (const auto& cr : h.coupling) {
    REQUIRE(cr.terms.size() == 1);
    CHECK(cr.terms[0].first ==
          VarKey{VarKind::pm_start, 0, 0, -1, 2, 0, -1});
    CHECK(cr.terms[0].second == -1.0);
    CHECK(cr.base_rhs == 1.0);
  }
}

TEST_CASE("folded right-hand sides match their descriptors", "[formulation]") {
  sys::MMGSystem system = two_mg_system(4, 4);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.0, 0.5, 50.0, 40.0, 0.5);
  MaintenancePlan plan = direct_plan();  // window covers weeks 1..3
  auto values = model::first_stage_values(system, plan, schedule_pm("g1", 1));
  StageBinding binding;
  binding.values = &values;

  for (int week = 1; week <= 4; ++week) {
    ModelHandle h =
        model::build_subproblem(system, scen, plan, week, -1, binding, true);
    for (const auto& cr : h.coupling) {
      double rhs = cr.base_rhs;
      for (const auto& [key, coef] : cr.terms) rhs += coef * values.at(key);
      CHECK(h.lp.rows[cr.row].rhs == rhs);
      CHECK(h.lp.rows[cr.row].sense == opt::Sense::le);
    }
    // A start variable exists for every week of the window, so each of those
    // weeks couples regardless of where the schedule lands; beyond the
    // window there is nothing to reference.
    if (week <= 3)
      CHECK_FALSE(h.coupling.empty());
    else
      CHECK(h.coupling.empty());
  }
}

TEST_CASE("unreachable deadlines are rejected", "[formulation]") {
  sys::MMGSystem system = two_mg_system(3, 4);

  SECTION("two fleets cannot both be visited in week one") {
    MaintenancePlan plan;
    model::PmTask a;
    a.der_id = "g1";
    a.mg = 0;
    a.der = 0;
    a.window_lo = a.window_hi = 1;
    a.duration = 1;
    a.cost = {10.0};
    model::PmTask b = a;
    b.der_id = "pv1";
    b.mg = 1;
    plan.pm = {a, b};
    try {
      model::build_master(system, plan);
      FAIL("expected the crew capacity check to throw");
    } catch (const Error& e) {
      CHECK(e.code() == "infeasible-deadlines");
    }
  }
  SECTION("windows beyond the horizon are rejected") {
    MaintenancePlan plan = direct_plan();
    plan.pm[0].window_hi = 4;  // horizon is 3
    plan.pm[0].cost = {10.0, 8.0, 6.0, 5.0};
    REQUIRE_THROWS_AS(model::build_master(system, plan), Error);
  }
}

TEST_CASE("maintenance windows silence the unit", "[formulation]") {
  // Fix the PM to week 2.  During that week the unit must sit idle and the
  // load is served some other way; in the surrounding weeks running the unit
  // is much cheaper than buying at the inflated grid price.
  sys::MMGSystem system = single_mg_system(3, 4);
  sys::ScenarioSet scen =
      flat_scenarios(system, 1, 1.0, 0.5, 500.0, 10.0, 0.5);
  MaintenancePlan plan = direct_plan();
  auto values = model::first_stage_values(system, plan, schedule_pm("g1", 2));
  StageBinding binding;
  binding.values = &values;

  for (int week = 1; week <= 3; ++week) {
    ModelHandle h =
        model::build_subproblem(system, scen, plan, week, 0, binding, false);
    auto sol = opt::solve_mip(h.lp);
    REQUIRE(sol.status == opt::Status::optimal);
    double produced = 0.0;
    for (int hh = 1; hh <= 4; ++hh)
      produced += sol.x[h.index.at({VarKind::dispatch, 0, 0, -1, week, hh, 0})];
    if (week == 2)
      CHECK_THAT(produced, Catch::Matchers::WithinAbs(0.0, 1e-9));
    else
      CHECK(produced > 1.0);
  }
}

TEST_CASE("islanded weeks trade nothing and stay feasible", "[formulation]") {
  sys::MMGSystem system = two_mg_system(3, 4);
  sys::ScenarioSet scen = flat_scenarios(system, 1, 1.0, 0.5, 50.0, 40.0, 0.5);
  sys::set_connectivity(scen, {2}, sys::Connectivity::islanded);
  MaintenancePlan plan;  // no maintenance anywhere
  StageBinding binding;
  std::map<VarKey, double> none;
  binding.values = &none;

  ModelHandle h = model::build_subproblem(system, scen, plan, 2, 0, binding,
                                          false);
  auto sol = opt::solve_mip(h.lp);
  REQUIRE(sol.status == opt::Status::optimal);
  double traded = 0.0, grid = 0.0;
  for (const auto& [key, col] : h.index.entries()) {
    if (key.kind == VarKind::link_buy || key.kind == VarKind::link_sell)
      traded += sol.x[col];
    if (key.kind == VarKind::grid_buy || key.kind == VarKind::grid_sell)
      grid += sol.x[col];
  }
  CHECK_THAT(traded, Catch::Matchers::WithinAbs(0.0, 1e-9));
  CHECK_THAT(grid, Catch::Matchers::WithinAbs(0.0, 1e-9));

  SECTION("locally connected weeks keep peer trades available") {
    sys::set_connectivity(scen, {2}, sys::Connectivity::locally_connected);
    // Starve mg2 of cheap energy: no local unit serves it, so the only
    // alternatives are curtailment at 100/MWh or imports from mg1 at 30.
    ModelHandle h2 = model::build_subproblem(system, scen, plan, 2, 0,
                                             binding, false);
    auto sol2 = opt::solve_mip(h2.lp);
    REQUIRE(sol2.status == opt::Status::optimal);
    double gridded = 0.0, imported = 0.0;
    for (int hh = 1; hh <= 4; ++hh) {
      gridded += sol2.x[h2.index.at({VarKind::grid_buy, 1, -1, -1, 2, hh, 0})];
      imported += sol2.x[h2.index.at({VarKind::link_buy, 1, -1, 0, 2, hh, 0})];
    }
    CHECK_THAT(gridded, Catch::Matchers::WithinAbs(0.0, 1e-9));
    CHECK(imported > 0.5);
  }
}

TEST_CASE("stage split reproduces the assembled model",
          "[formulation][oracle]") {
  // Pin the first stage, solve the assembled relaxation, and separately add
  // the first-stage bill to each per-week subproblem optimum.  The two paths
  // must land on the same number: same weighting, same folding, same data.
  sys::MMGSystem system = two_mg_system(3, 4);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.0, 0.5, 50.0, 40.0, 0.5);
  MaintenancePlan plan = direct_plan();
  sys::MaintenanceSchedule sched = schedule_pm("g1", 2);
  auto values = model::first_stage_values(system, plan, sched);

  ModelHandle de = model::build_deterministic_equivalent(system, scen, plan,
                                                         /*relaxed=*/true);
  for (const auto& [key, v] : values) {
    int col = de.index.at(key);
    de.lp.lo[col] = de.lp.hi[col] = v;
  }
  auto desol = opt::solve_lp(de.lp);
  REQUIRE(desol.status == opt::Status::optimal);

  double first_stage = 0.0;
  for (const auto& [key, col] : de.index.entries())
    if (key.kind == VarKind::pm_start || key.kind == VarKind::cm_start ||
        key.kind == VarKind::crew)
      first_stage += de.lp.obj[col] * desol.x[col];

  StageBinding binding;
  binding.values = &values;
  double recourse = 0.0;
  for (int t = 1; t <= 3; ++t) {
    ModelHandle sub =
        model::build_subproblem(system, scen, plan, t, -1, binding, true);
    auto sol = opt::solve_lp(sub.lp);
    REQUIRE(sol.status == opt::Status::optimal);
    recourse += sol.objective;
  }

  double split = first_stage + recourse;
  CHECK_THAT(desol.objective,
             Catch::Matchers::WithinAbs(split, 1e-6 * (1.0 + std::abs(split))));

  SECTION("per-scenario blocks sum to the weighted whole") {
    for (int t = 1; t <= 3; ++t) {
      ModelHandle all =
          model::build_subproblem(system, scen, plan, t, -1, binding, true);
      auto whole = opt::solve_lp(all.lp);
      double parts = 0.0;
      for (int w = 0; w < 2; ++w) {
        ModelHandle one =
            model::build_subproblem(system, scen, plan, t, w, binding, true);
        auto sol = opt::solve_lp(one.lp);
        REQUIRE(sol.status == opt::Status::optimal);
        parts += scen.scenarios[w].probability * sol.objective;
      }
      CHECK_THAT(whole.objective,
                 Catch::Matchers::WithinAbs(parts,
                                            1e-6 * (1.0 + std::abs(parts))));
    }
  }
}

TEST_CASE("solved schedules pass the physics audit", "[formulation]") {
  sys::MMGSystem system = two_mg_system(2, 3);
  sys::ScenarioSet scen = flat_scenarios(system, 2, 1.0, 0.5, 50.0, 40.0, 0.5);
  MaintenancePlan plan;
  model::PmTask task;
  task.der_id = "g1";
  task.mg = 0;
  task.der = 0;
  task.window_lo = 1;
  task.window_hi = 2;
  task.duration = 1;
  task.cost = {10.0, 8.0};
  plan.pm.push_back(task);

  ModelHandle de = model::build_deterministic_equivalent(system, scen, plan);
  auto sol = opt::solve_mip(de.lp);
  REQUIRE(sol.status == opt::Status::optimal);

  auto sched = model::schedule_from_solution(de, system, sol.x);
  REQUIRE(sched.pm_week.count("g1") == 1);
  int chosen = sched.pm_week["g1"];
  REQUIRE((chosen == 1 || chosen == 2));
  REQUIRE(sched.crew_weeks["mg1"] == std::vector<int>{chosen});

  auto avail = model::availability_by_week(system, plan, sched);
  CHECK(avail[chosen][0][0] == 0.0);
  CHECK(avail[chosen == 1 ? 2 : 1][0][0] == 1.0);
  CHECK(avail[chosen][0][1] == 1.0);  // the wind unit is untouched

  auto issues = model::soundness_issues(
      system, scen, de, sol.x,
      [&](int m, int i, int t) { return avail[t][m][i]; });
  for (const auto& s : issues) UNSCOPED_INFO(s);
  CHECK(issues.empty());
}

TEST_CASE("realized availability overrides the schedule", "[formulation]") {
  sys::MMGSystem system = single_mg_system(3, 4);
  sys::ScenarioSet scen = flat_scenarios(system, 1, 1.0, 0.5, 50.0, 40.0, 0.5);
  MaintenancePlan plan = direct_plan();

  std::vector<std::vector<double>> down = {{0.0}};
  StageBinding binding;
  binding.availability = &down;
  ModelHandle h =
      model::build_subproblem(system, scen, plan, 1, 0, binding, false);
  CHECK(h.coupling.empty());
  auto sol = opt::solve_mip(h.lp);
  REQUIRE(sol.status == opt::Status::optimal);
  for (int hh = 1; hh <= 4; ++hh)
    CHECK_THAT(sol.x[h.index.at({VarKind::dispatch, 0, 0, -1, 1, hh, 0})],
               Catch::Matchers::WithinAbs(0.0, 1e-9));

  std::vector<std::vector<double>> up = {{1.0}};
  binding.availability = &up;
  ModelHandle h2 =
      model::build_subproblem(system, scen, plan, 1, 0, binding, false);
  auto sol2 = opt::solve_mip(h2.lp);
  REQUIRE(sol2.status == opt::Status::optimal);
  CHECK(sol2.objective < sol.objective - 1.0);  // running the unit is cheaper
}
