#pragma once

// Rolling-horizon evaluation and resilience analysis.  The harness freezes
// the head of each optimized schedule, simulates the true degradation paths
// against it, classifies what happened to every unit, re-solves each frozen
// week's operations under the realized availability, and accumulates the
// reliability and cost metrics used to compare the sensor-driven policy with
// an age-based periodic benchmark.  The resilience metric (expected
// resilience loss) and the weekly disruption study behind it live here too.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdiom/branch_and_bound.hpp"
#include "sdiom/error.hpp"
#include "sdiom/formulation.hpp"
#include "sdiom/lshaped.hpp"
#include "sdiom/prognostics.hpp"
#include "sdiom/rng.hpp"
#include "sdiom/scenario_gen.hpp"
#include "sdiom/simplex.hpp"
#include "sdiom/system.hpp"
#include "sdiom/worker_pool.hpp"

namespace sdiom::eval {

// ---- expected resilience loss ----------------------------------------------

// Performance trajectories entering the resilience metric.  Weeks are
// 1-based; index 0 is unused.  q_star holds the performance under the
// disruption, q_tilde the undisrupted baseline, and p[t] the probability
// that a disruption lands at week t.  Trajectories may extend past the
// evaluated span so a disruption near the end can be followed to the end of
// its recovery window.
struct ResilienceInput {
  std::vector<double> q_star;
  std::vector<double> q_tilde;
  std::vector<double> p;
  int duration = 1;  // weeks of degraded operation per disruption
};

// Probability-weighted loss of performance, averaged over the recovery
// duration.  A disruption at week t degrades operation over weeks
// t .. t + duration inclusive; weeks beyond the recorded trajectories
// contribute no loss.  The baseline must be positive wherever a disruption
// can reach, since losses are relative.
inline double compute_erl(const ResilienceInput& in, int span) {
  require(span >= 1, "bad-resilience-input", "span must be positive");
  require(in.duration >= 1, "bad-resilience-input",
          "disruption duration must be at least one week");
  double psum = 0.0;
  for (int t = 1; t <= span && t < int(in.p.size()); ++t) {
    require(in.p[t] >= 0.0, "bad-resilience-input",
            "negative disruption probability at week " + std::to_string(t));
    psum += in.p[t];
  }
  require(psum <= 1.0 + 1e-9, "bad-resilience-input",
          "disruption probabilities sum past 1");
  double total = 0.0;
  for (int t = 1; t <= span; ++t) {
    double pt = t < int(in.p.size()) ? in.p[t] : 0.0;
    if (pt == 0.0) continue;
    double loss = 0.0;
    for (int t0 = t; t0 <= t + in.duration; ++t0) {
      if (t0 >= int(in.q_star.size()) || t0 >= int(in.q_tilde.size()))
        continue;
      require(in.q_tilde[t0] > 0.0, "bad-resilience-input",
              "baseline performance must be positive at week " +
                  std::to_string(t0));
      loss += 1.0 - in.q_star[t0] / in.q_tilde[t0];
    }
    total += pt * loss;
  }
  return total / double(in.duration);
}

// ---- outcome classification --------------------------------------------

enum class Outcome { unexpected_failure, planned_maintenance, uninterrupted };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::unexpected_failure: return "unexpected-failure";
    case Outcome::planned_maintenance: return "planned-maintenance";
    case Outcome::uninterrupted: return "uninterrupted";
  }
  return "?";
}

inline Outcome outcome_from(const std::string& s) {
  if (s == "unexpected-failure") return Outcome::unexpected_failure;
  if (s == "planned-maintenance") return Outcome::planned_maintenance;
  if (s == "uninterrupted") return Outcome::uninterrupted;
  fail("bad-outcome", "unknown outcome class '" + s + "'");
}

// What a frozen window holds for one unit: the scheduled maintenance start
// races the first threshold crossing.  Both weeks are cycle-local; 0 means
// the event does not occur.  A tie resolves to maintenance, since work
// starts at the top of the week and preempts the failure.
struct WindowEvent {
  Outcome outcome = Outcome::uninterrupted;
  int week = 0;  // cycle-local week of the event, 0 when uninterrupted
};

inline WindowEvent classify_window(int maint_week, int failure_week,
                                   int freeze) {
  bool maint = maint_week >= 1 && maint_week <= freeze;
  bool fails = failure_week >= 1 && failure_week <= freeze;
  if (maint && (!fails || maint_week <= failure_week))
    return {Outcome::planned_maintenance, maint_week};
  if (fails) return {Outcome::unexpected_failure, failure_week};
  return {Outcome::uninterrupted, 0};
}

// One unit's fate over one planning cycle of one replication.
struct OutcomeRecord {
  int replication = 0;  // index into RollingConfig::seeds
  int cycle = 0;        // 1-based planning cycle
  std::string der_id;
  Outcome outcome = Outcome::uninterrupted;
  int event_week = 0;   // absolute week within the span, 0 when uninterrupted
  int unused_life = 0;  // residual weeks forfeited by maintaining early
};

// ---- metrics ----------------------------------------------------------

// Aggregate evaluation metrics, averaged over replications.  Counts and
// costs are per-replication totals; percentage fields relate energies over
// the whole evaluation: trade flows against total load, curtailed load
// against the load of its class, curtailed renewables against what the
// weather and availability offered.
struct MetricsReport {
  double pm_count = 0.0;
  double cm_count = 0.0;
  double outage_count = 0.0;  // preventive plus corrective
  double crew_visits = 0.0;
  double unused_life_weeks = 0.0;
  double maintenance_cost = 0.0;  // event costs plus crew visits
  double operational_cost = 0.0;  // realized weekly re-solve objectives
  double total_cost = 0.0;
  double pct_exported = 0.0;
  double pct_imported = 0.0;
  double pct_exchanged = 0.0;
  double pct_curtailed_ncl = 0.0;
  double pct_curtailed_cl = 0.0;
  double pct_curtailed_wt = 0.0;
  double pct_curtailed_pv = 0.0;
};

// Rows in the published order; the labels are a reporting contract.
inline std::vector<std::pair<std::string, double>> metric_rows(
    const MetricsReport& r) {
  return {
      {"Exported Power", r.pct_exported},
      {"Imported Power", r.pct_imported},
      {"Exchanged Power", r.pct_exchanged},
      {"Curtailed NCL", r.pct_curtailed_ncl},
      {"Curtailed CL", r.pct_curtailed_cl},
      {"Curtailed WTs Power", r.pct_curtailed_wt},
      {"Curtailed PVs Power", r.pct_curtailed_pv},
      {"# Preventive", r.pm_count},
      {"# Corrective", r.cm_count},
      {"# Total Outages", r.outage_count},
      {"# Crew Visits", r.crew_visits},
      {"Unused Life (wks)", r.unused_life_weeks},
      {"Maintenance Cost", r.maintenance_cost},
      {"Operational Cost", r.operational_cost},
      {"Total Cost", r.total_cost},
  };
}

// ---- periodic benchmark ------------------------------------------------

// Age window of the calendar-based policy: preventive work is mandatory
// while a unit's running week sits inside [low, high] of its service life.
inline constexpr int kPeriodicAgeLow = 48;
inline constexpr int kPeriodicAgeHigh = 52;

// Benchmark plan for the given ages (completed service weeks per DER id):
// a forced window per unit that comes due inside the horizon, plus repair
// tasks for failed units.  Condition data is ignored, so window costs are
// flat except for a tiny ramp that prefers the earliest feasible week once
// crew costs tie.  Units overdue past the window are scheduled as soon as
// possible; units whose window opens beyond the horizon are left alone.
inline model::MaintenancePlan periodic_plan(
    const sys::MMGSystem& system, const std::map<std::string, int>& ages,
    int horizon) {
  require(horizon >= 1, "bad-horizon", "planning horizon must be positive");
  model::MaintenancePlan plan;
  for (int m = 0; m < system.num_mgs(); ++m) {
    const auto& mg = system.microgrids[m];
    for (int i = 0; i < int(mg.ders.size()); ++i) {
      const sys::Der& der = mg.ders[i];
      if (der.status == sys::DerStatus::failed) {
        plan.cm.push_back({der.id, m, i, der.cm_duration, 0.0});
        continue;
      }
      auto it = ages.find(der.id);
      if (it == ages.end()) continue;
      int age = it->second;
      require(age >= 0, "bad-age", "negative age for '" + der.id + "'");
      int lo = kPeriodicAgeLow - age;
      int hi = kPeriodicAgeHigh - age;
      if (hi < 1) {  // overdue: fit the work in as soon as possible
        lo = 1;
        hi = std::min(horizon, 4);
      } else {
        lo = std::max(1, lo);
        hi = std::min(horizon, hi);
      }
      if (lo > hi) continue;  // window opens beyond this horizon
      model::PmTask task{der.id, m, i, lo, hi, der.pm_duration, {}};
      for (int tau = lo; tau <= hi; ++tau)
        task.cost.push_back(1e-6 * double(tau - lo));
      plan.pm.push_back(std::move(task));
    }
  }
  return plan;
}

namespace detail {

// Maintenance-only placement: schedules a plan against crew costs and the
// window cost curves with no operational recourse attached.
inline sys::MaintenanceSchedule schedule_for_plan(
    const sys::MMGSystem& system, const model::MaintenancePlan& plan,
    opt::Tolerances tol, opt::BnbConfig cfg) {
  if (plan.pm.empty() && plan.cm.empty()) return {};
  model::BuildOptions bopt;
  bopt.with_recourse = false;
  model::ModelHandle master = model::build_master(system, plan, nullptr, bopt);
  opt::MipSolution sol = opt::solve_mip(master.lp, tol, cfg);
  require(sol.status == opt::Status::optimal, "benchmark-infeasible",
          "maintenance windows cannot all be scheduled");
  return model::schedule_from_solution(master, system, sol.x);
}

}  // namespace detail

// Benchmark schedule for a fleet snapshot: every unit whose age window
// intersects the system horizon gets its preventive start placed inside the
// window, failed units get repair weeks, crew costs decide bundling.
inline sys::MaintenanceSchedule periodic_schedule(
    const sys::MMGSystem& system, const std::map<std::string, int>& ages,
    opt::Tolerances tol = {}, opt::BnbConfig cfg = {}) {
  return detail::schedule_for_plan(
      system, periodic_plan(system, ages, system.horizon_weeks), tol, cfg);
}

// ---- rolling-horizon harness --------------------------------------------

enum class Benchmark { sdiom, periodic };

inline const char* to_string(Benchmark b) {
  return b == Benchmark::sdiom ? "sd-iom" : "periodic";
}

inline Benchmark benchmark_from(const std::string& s) {
  if (s == "sd-iom") return Benchmark::sdiom;
  if (s == "periodic") return Benchmark::periodic;
  fail("bad-benchmark", "unknown benchmark '" + s + "'");
}

struct RollingConfig {
  int horizon = 12;  // planning weeks per cycle
  int freeze = 8;    // weeks committed before re-planning
  int span = 78;     // total simulated weeks
  std::vector<std::uint64_t> seeds = {11, 22, 33, 44};  // one replication each
  Benchmark benchmark = Benchmark::sdiom;
  int age_low = 10;   // staggered initial component ages, inclusive
  int age_high = 45;
  lshaped::SolveOptions solver;  // drives planning solves and weekly re-solves
};

struct RollingResult {
  MetricsReport report;                 // averaged over replications
  std::vector<OutcomeRecord> outcomes;  // all replications, stable order
};

namespace detail {

// Energy flows of one solved operational week, probability-weighted across
// its scenarios.  Loads and renewable offers come from the scenario data so
// percentage denominators match what the solver saw.
struct WeekFlows {
  double operational_cost = 0.0;
  double imported = 0.0, exported = 0.0, exchanged = 0.0;
  double curtailed_cl = 0.0, curtailed_ncl = 0.0;
  double load_cl = 0.0, load_ncl = 0.0;
  double wind_used = 0.0, wind_avail = 0.0;
  double solar_used = 0.0, solar_avail = 0.0;
};

inline WeekFlows extract_flows(const model::ModelHandle& h,
                               std::span<const double> x,
                               const sys::MMGSystem& system,
                               const sys::ScenarioSet& scen, int week,
                               const std::vector<std::vector<double>>* avail) {
  WeekFlows f;
  for (const auto& [key, col] : h.index.entries()) {
    if (key.scenario < 0) continue;  // first-stage columns carry no energy
    double v = scen.scenarios[key.scenario].probability * x[col];
    switch (key.kind) {
      case model::VarKind::grid_buy: f.imported += v; break;
      case model::VarKind::grid_sell: f.exported += v; break;
      case model::VarKind::link_buy: f.exchanged += v; break;
      case model::VarKind::curtail_crit: f.curtailed_cl += v; break;
      case model::VarKind::curtail_noncrit: f.curtailed_ncl += v; break;
      case model::VarKind::dispatch: {
        sys::DerKind kind = system.microgrids[key.mg].ders[key.unit].kind;
        if (kind == sys::DerKind::wind) f.wind_used += v;
        else if (kind == sys::DerKind::solar) f.solar_used += v;
        break;
      }
      default: break;
    }
  }
  auto rens = sys::renewable_order(system);
  for (int w = 0; w < scen.num_scenarios(); ++w) {
    const sys::Scenario& sc = scen.scenarios[w];
    double p = sc.probability;
    for (int m = 0; m < system.num_mgs(); ++m)
      for (int hr = 1; hr <= scen.hours; ++hr) {
        f.load_cl += p * sc.crit_load[scen.idx(m, week, hr)];
        f.load_ncl += p * sc.noncrit_load[scen.idx(m, week, hr)];
      }
    for (int r = 0; r < int(rens.size()); ++r) {
      double a = avail ? (*avail)[rens[r].mg][rens[r].der] : 1.0;
      if (a <= 0.0) continue;
      sys::DerKind kind = system.microgrids[rens[r].mg].ders[rens[r].der].kind;
      for (int hr = 1; hr <= scen.hours; ++hr) {
        double offer = p * a * sc.renewable_cap[scen.ridx(r, week, hr)];
        if (kind == sys::DerKind::wind) f.wind_avail += offer;
        else f.solar_avail += offer;
      }
    }
  }
  return f;
}

// Running totals of one replication.
struct ReplicationTotals {
  double pm_count = 0.0, cm_count = 0.0, unused = 0.0;
  double maintenance_cost = 0.0, operational_cost = 0.0;
  std::set<std::pair<int, int>> visits;  // (mg, absolute week)
  WeekFlows energy;                      // accumulated over realized weeks
  std::vector<OutcomeRecord> records;
};

inline void accumulate(WeekFlows& into, const WeekFlows& f) {
  into.operational_cost += f.operational_cost;
  into.imported += f.imported;
  into.exported += f.exported;
  into.exchanged += f.exchanged;
  into.curtailed_cl += f.curtailed_cl;
  into.curtailed_ncl += f.curtailed_ncl;
  into.load_cl += f.load_cl;
  into.load_ncl += f.load_ncl;
  into.wind_used += f.wind_used;
  into.wind_avail += f.wind_avail;
  into.solar_used += f.solar_used;
  into.solar_avail += f.solar_avail;
}

// One tracked unit's ground truth as the simulation sees it.  The component
// in service is described relative to its renewal week; a fresh trajectory
// is drawn whenever maintenance renews the slot.
struct UnitState {
  int mg = 0, der = 0;
  std::string id;
  prognostics::DegradationModel model;
  int renewal_abs = 1;     // absolute week the component entered service
  int draws = 0;           // trajectories drawn so far for this slot
  prognostics::SignalTrajectory truth;
  bool failed = false;     // threshold crossed, repair not yet started
  int down_until_abs = 0;  // maintenance keeps the unit offline through here
};

inline constexpr std::uint64_t kTruthTag = 7001, kPlanScenTag = 7002,
                               kRealScenTag = 7003, kAgeTag = 7004;

inline ReplicationTotals run_replication(
    const sys::MMGSystem& base, const sys::GeneratorSpec& genspec,
    const prognostics::DegradationLibrary& models, const RollingConfig& config,
    int rep_index) {
  std::uint64_t seed = config.seeds[rep_index];
  int truth_len = config.span + config.age_high + config.horizon + 4;

  std::vector<UnitState> units;
  for (int m = 0; m < base.num_mgs(); ++m)
    for (int i = 0; i < int(base.microgrids[m].ders.size()); ++i) {
      auto it = models.find(base.microgrids[m].ders[i].id);
      if (it == models.end()) continue;  // untracked units never degrade
      UnitState u;
      u.mg = m;
      u.der = i;
      u.id = it->first;
      u.model = it->second.model;
      units.push_back(std::move(u));
    }
  require(units.size() == models.size(), "unknown-der",
          "a degradation record names a DER the system does not have");

  auto fresh_truth = [&](UnitState& u, int unit_index) {
    u.truth = prognostics::simulate_signal(
        u.model,
        derive_seed(seed, kTruthTag + std::uint64_t(unit_index),
                         std::uint64_t(u.draws)),
        truth_len);
    ++u.draws;
  };

  // Stagger the initial ages and draw each component's history, rejecting
  // draws that would have already failed before the evaluation begins.
  Rng age_rng(derive_seed(seed, kAgeTag));
  for (int k = 0; k < int(units.size()); ++k) {
    UnitState& u = units[k];
    int age0 = age_rng.uniform_int(config.age_low, config.age_high);
    u.renewal_abs = 1 - age0;
    int attempts = 0;
    do {
      require(++attempts <= 200, "bad-initial-age",
              "no survivable history at age " + std::to_string(age0) +
                  " for '" + u.id + "'");
      fresh_truth(u, k);
    } while (u.truth.failure_week != 0 && u.truth.failure_week <= age0);
  }

  ReplicationTotals totals;
  int cs = 1;  // first absolute week of the current cycle
  for (int cycle = 1; cs <= config.span; ++cycle) {
    int freeze = std::min(config.freeze, config.span - cs + 1);

    // Snapshot the fleet for this cycle's planning problem.  Units still
    // offline from earlier maintenance are left out of the library: they
    // cannot be worked on and carry no usable signal yet.
    sys::MMGSystem sys_c = base;
    sys_c.horizon_weeks = config.horizon;
    prognostics::DegradationLibrary lib;
    std::map<std::string, int> ages;
    for (const UnitState& u : units) {
      sys_c.microgrids[u.mg].ders[u.der].status =
          u.failed ? sys::DerStatus::failed : sys::DerStatus::operational;
      if (!u.failed && u.down_until_abs >= cs) continue;
      prognostics::DegradationRecord rec;
      rec.model = u.model;
      rec.age_weeks = cs - u.renewal_abs;
      if (!u.failed) {
        for (int k = 1; k <= rec.age_weeks; ++k)
          rec.observations.push_back({k, u.truth.signal[k]});
        ages[u.id] = rec.age_weeks;
      }
      lib[u.id] = std::move(rec);
    }

    model::MaintenancePlan plan =
        config.benchmark == Benchmark::sdiom
            ? model::make_plan(sys_c, lib, config.horizon)
            : periodic_plan(sys_c, ages, config.horizon);

    sys::MaintenanceSchedule schedule;
    if (config.benchmark == Benchmark::sdiom &&
        !(plan.pm.empty() && plan.cm.empty())) {
      sys::ScenarioSet scen_plan = sys::generate_scenarios(
          sys_c, genspec,
          derive_seed(seed, kPlanScenTag, std::uint64_t(cycle)));
      schedule = lshaped::run_lshaped(sys_c, scen_plan, plan, config.solver)
                     .schedule;
    } else if (config.benchmark == Benchmark::periodic) {
      schedule = schedule_for_plan(sys_c, plan, config.solver.tol,
                                   config.solver.master_cfg);
    }

    // Classify every unit that starts the cycle in service, before events
    // rewrite the state.  The record reflects the first event only; a fresh
    // component failing later inside the same window still counts below.
    for (const UnitState& u : units) {
      if (u.failed || u.down_until_abs >= cs) continue;
      int pm_t = 0;
      if (auto it = schedule.pm_week.find(u.id); it != schedule.pm_week.end())
        pm_t = it->second;
      int fail_t = u.truth.failure_week > 0
                       ? u.renewal_abs + u.truth.failure_week - cs
                       : 0;
      WindowEvent ev = classify_window(pm_t, fail_t, freeze);
      OutcomeRecord rec;
      rec.replication = rep_index;
      rec.cycle = cycle;
      rec.der_id = u.id;
      rec.outcome = ev.outcome;
      rec.event_week = ev.week > 0 ? cs + ev.week - 1 : 0;
      if (ev.outcome == Outcome::planned_maintenance && fail_t > 0)
        rec.unused_life = fail_t - ev.week;
      totals.records.push_back(std::move(rec));
    }

    // Walk the frozen weeks: start repairs and preventive work, detect
    // failures, and record per-week availability for the re-solves.
    auto visit = [&](int mg, int week_abs) {
      if (totals.visits.insert({mg, week_abs}).second)
        totals.maintenance_cost += base.microgrids[mg].crew_cost;
    };
    std::vector<std::vector<std::vector<double>>> avail(freeze + 1);
    for (int t = 1; t <= freeze; ++t) {
      int abs_week = cs + t - 1;
      avail[t].resize(base.num_mgs());
      for (int m = 0; m < base.num_mgs(); ++m)
        avail[t][m].assign(base.microgrids[m].ders.size(), 1.0);
      for (int k = 0; k < int(units.size()); ++k) {
        UnitState& u = units[k];
        if (u.failed) {
          auto it = schedule.cm_week.find(u.id);
          if (it != schedule.cm_week.end() && it->second == t) {
            visit(u.mg, abs_week);
            u.failed = false;
            u.down_until_abs =
                abs_week + base.microgrids[u.mg].ders[u.der].cm_duration - 1;
            u.renewal_abs = u.down_until_abs + 1;
            fresh_truth(u, k);
          }
        } else if (abs_week > u.down_until_abs) {
          auto it = schedule.pm_week.find(u.id);
          if (it != schedule.pm_week.end() && it->second == t) {
            visit(u.mg, abs_week);
            totals.pm_count += 1.0;
            totals.maintenance_cost += u.model.pm_cost;
            if (u.truth.failure_week > 0)
              totals.unused +=
                  u.renewal_abs + u.truth.failure_week - abs_week - 1;
            u.down_until_abs =
                abs_week + base.microgrids[u.mg].ders[u.der].pm_duration - 1;
            u.renewal_abs = u.down_until_abs + 1;
            fresh_truth(u, k);
          } else if (u.truth.failure_week > 0 &&
                     u.renewal_abs + u.truth.failure_week - 1 == abs_week) {
            u.failed = true;
            totals.cm_count += 1.0;
            totals.maintenance_cost += u.model.cm_cost;
          }
        }
        if (u.failed || abs_week <= u.down_until_abs)
          avail[t][u.mg][u.der] = 0.0;
      }
    }

    // Re-solve each frozen week exactly under the realized availability and
    // one freshly revealed operational trace.
    sys::GeneratorSpec real_spec = genspec;
    real_spec.num_scenarios = 1;
    sys::ScenarioSet scen_real = sys::generate_scenarios(
        sys_c, real_spec,
        derive_seed(seed, kRealScenTag, std::uint64_t(cycle)));
    auto week_flows = util::run_indexed<WeekFlows>(
        freeze, config.solver.workers, [&](int k) {
          int t = k + 1;
          model::StageBinding binding;
          binding.availability = &avail[t];
          model::ModelHandle h = model::build_subproblem(
              sys_c, scen_real, plan, t, 0, binding, /*relaxed=*/false);
          opt::MipSolution sol =
              opt::solve_mip(h.lp, config.solver.tol, config.solver.sub_cfg);
          require(sol.status == opt::Status::optimal, "weekly-resolve-failed",
                  "operations for week " + std::to_string(cs + k) +
                      " did not solve to optimality");
          WeekFlows f =
              extract_flows(h, sol.x, sys_c, scen_real, t, &avail[t]);
          f.operational_cost = sol.objective;
          return f;
        });
    for (const WeekFlows& f : week_flows) accumulate(totals.energy, f);
    totals.operational_cost = totals.energy.operational_cost;

    cs += freeze;
  }
  return totals;
}

}  // namespace detail

// Simulates the closed scheduling loop: plan over the horizon, freeze the
// leading weeks, let the true degradation paths play out against the frozen
// schedule, then roll forward and re-plan from the surviving evidence.
// `models` supplies the degradation model per tracked DER id (ages and
// observations inside it are ignored; the harness owns both).  Each seed is
// an independent replication; the report averages them.
inline RollingResult run_rolling_horizon(
    const sys::MMGSystem& system, const sys::GeneratorSpec& genspec,
    const prognostics::DegradationLibrary& models,
    const RollingConfig& config) {
  auto issues = sys::validate(system);
  if (!issues.empty())
    fail("invalid-system", issues.front().code + ": " + issues.front().detail);
  require(config.horizon >= 1, "bad-rolling-config",
          "planning horizon must be positive");
  require(config.freeze >= 1 && config.freeze <= config.horizon,
          "bad-rolling-config", "freeze must lie in [1, horizon]");
  require(config.span >= config.freeze, "bad-rolling-config",
          "span must cover at least one frozen window");
  require(!config.seeds.empty(), "bad-rolling-config",
          "at least one replication seed is required");
  require(config.age_low >= 0 && config.age_high >= config.age_low,
          "bad-rolling-config", "initial-age range is inverted");

  RollingResult out;
  detail::WeekFlows energy;
  int reps = int(config.seeds.size());
  for (int r = 0; r < reps; ++r) {
    detail::ReplicationTotals t =
        detail::run_replication(system, genspec, models, config, r);
    out.report.pm_count += t.pm_count / reps;
    out.report.cm_count += t.cm_count / reps;
    out.report.crew_visits += double(t.visits.size()) / reps;
    out.report.unused_life_weeks += t.unused / reps;
    out.report.maintenance_cost += t.maintenance_cost / reps;
    out.report.operational_cost += t.operational_cost / reps;
    detail::accumulate(energy, t.energy);
    for (auto& rec : t.records) out.outcomes.push_back(std::move(rec));
  }
  out.report.outage_count = out.report.pm_count + out.report.cm_count;
  out.report.total_cost =
      out.report.maintenance_cost + out.report.operational_cost;

  auto pct = [](double part, double base) {
    return base > 0.0 ? 100.0 * std::max(0.0, part) / base : 0.0;
  };
  double load_total = energy.load_cl + energy.load_ncl;
  out.report.pct_exported = pct(energy.exported, load_total);
  out.report.pct_imported = pct(energy.imported, load_total);
  out.report.pct_exchanged = pct(energy.exchanged, load_total);
  out.report.pct_curtailed_cl = pct(energy.curtailed_cl, energy.load_cl);
  out.report.pct_curtailed_ncl = pct(energy.curtailed_ncl, energy.load_ncl);
  out.report.pct_curtailed_wt =
      pct(energy.wind_avail - energy.wind_used, energy.wind_avail);
  out.report.pct_curtailed_pv =
      pct(energy.solar_avail - energy.solar_used, energy.solar_avail);
  return out;
}

// ---- disruption study ----------------------------------------------------

// Which weekly quantity the resilience comparison tracks: the operational
// objective, or the served fraction of one load class.
enum class DisruptionMetric { cost, critical_load, noncritical_load };

inline const char* to_string(DisruptionMetric m) {
  switch (m) {
    case DisruptionMetric::cost: return "cost";
    case DisruptionMetric::critical_load: return "critical-load";
    case DisruptionMetric::noncritical_load: return "non-critical-load";
  }
  return "?";
}

inline DisruptionMetric metric_from(const std::string& s) {
  if (s == "cost") return DisruptionMetric::cost;
  if (s == "critical-load") return DisruptionMetric::critical_load;
  if (s == "non-critical-load") return DisruptionMetric::noncritical_load;
  fail("bad-metric", "unknown disruption metric '" + s + "'");
}

struct DisruptionResult {
  double erl = 0.0;
  std::vector<double> psi;  // per-week performance ratio, index 0 unused
};

// Probes every week with a one-week connectivity disruption: operations are
// solved normally and under the disrupted mode, the weekly performance ratio
// is recorded, and the losses aggregate into the expected resilience loss
// under a uniform disruption probability.  The schedule's maintenance
// windows stay in force on both sides of the comparison; generation assets
// themselves are never damaged.
inline DisruptionResult disruption_study(
    const sys::MMGSystem& system, const sys::ScenarioSet& scen,
    const sys::MaintenanceSchedule& schedule, sys::Connectivity mode,
    DisruptionMetric metric, int workers = 1, opt::Tolerances tol = {},
    opt::BnbConfig cfg = {}) {
  int T = system.horizon_weeks;
  require(scen.weeks == T && scen.num_mgs == system.num_mgs(),
          "scenario-shape", "scenario set does not match the system");

  // Rebuild the schedule's downtime windows as a fixed plan so availability
  // follows maintenance on both sides of the comparison.
  sys::MMGSystem sys_c = system;
  model::MaintenancePlan plan;
  for (int m = 0; m < sys_c.num_mgs(); ++m)
    for (int i = 0; i < int(sys_c.microgrids[m].ders.size()); ++i) {
      sys::Der& der = sys_c.microgrids[m].ders[i];
      if (auto it = schedule.pm_week.find(der.id);
          it != schedule.pm_week.end()) {
        require(it->second >= 1 && it->second <= T, "bad-week",
                "PM week for '" + der.id + "' is outside the horizon");
        der.status = sys::DerStatus::operational;
        plan.pm.push_back({der.id, m, i, it->second, it->second,
                           der.pm_duration, {0.0}});
      } else if (auto ic = schedule.cm_week.find(der.id);
                 ic != schedule.cm_week.end()) {
        require(ic->second >= 1 && ic->second <= T, "bad-week",
                "CM week for '" + der.id + "' is outside the horizon");
        der.status = sys::DerStatus::failed;
        plan.cm.push_back({der.id, m, i, der.cm_duration, 0.0});
      }
    }
  auto avail = model::availability_by_week(sys_c, plan, schedule);

  sys::ScenarioSet scen_d = scen;
  for (auto& c : scen_d.connectivity) c = mode;

  struct WeekPerf {
    double cost = 0.0, served_cl = 1.0, served_ncl = 1.0;
  };
  auto perf = util::run_indexed<WeekPerf>(2 * T, workers, [&](int k) {
    int week = k % T + 1;
    const sys::ScenarioSet& which = k < T ? scen : scen_d;
    model::StageBinding binding;
    binding.availability = &avail[week];
    model::ModelHandle h = model::build_subproblem(
        sys_c, which, plan, week, /*scenario=*/-1, binding, /*relaxed=*/false);
    opt::MipSolution sol = opt::solve_mip(h.lp, tol, cfg);
    require(sol.status == opt::Status::optimal, "weekly-resolve-failed",
            "operations for week " + std::to_string(week) +
                " did not solve to optimality");
    detail::WeekFlows f =
        detail::extract_flows(h, sol.x, sys_c, which, week, &avail[week]);
    WeekPerf p;
    p.cost = sol.objective;
    if (f.load_cl > 0.0) p.served_cl = (f.load_cl - f.curtailed_cl) / f.load_cl;
    if (f.load_ncl > 0.0)
      p.served_ncl = (f.load_ncl - f.curtailed_ncl) / f.load_ncl;
    return p;
  });

  // Orient each metric so the ratio compares disrupted performance against
  // the baseline: served fractions directly, costs inverted since larger
  // spend means worse performance.
  ResilienceInput in;
  in.q_star.assign(T + 1, 0.0);
  in.q_tilde.assign(T + 1, 0.0);
  in.p.assign(T + 1, 1.0 / T);
  in.p[0] = 0.0;
  in.duration = 1;
  for (int t = 1; t <= T; ++t) {
    const WeekPerf& normal = perf[t - 1];
    const WeekPerf& disrupted = perf[T + t - 1];
    switch (metric) {
      case DisruptionMetric::cost:
        in.q_star[t] = normal.cost;
        in.q_tilde[t] = disrupted.cost;
        break;
      case DisruptionMetric::critical_load:
        in.q_star[t] = disrupted.served_cl;
        in.q_tilde[t] = normal.served_cl;
        break;
      case DisruptionMetric::noncritical_load:
        in.q_star[t] = disrupted.served_ncl;
        in.q_tilde[t] = normal.served_ncl;
        break;
    }
  }
  DisruptionResult out;
  out.erl = compute_erl(in, T);
  out.psi.assign(T + 1, 1.0);
  out.psi[0] = 0.0;
  for (int t = 1; t <= T; ++t) out.psi[t] = in.q_star[t] / in.q_tilde[t];
  return out;
}

}  // namespace sdiom::eval
