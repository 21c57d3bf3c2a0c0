#pragma once

// Builders that translate the system + scenarios + maintenance inputs into
// linear programs: the first-stage master, per-week (or per-week-scenario)
// operational subproblems, and the fully assembled deterministic equivalent.
// A shared emitter keeps the three views consistent; coupling descriptors
// record where first-stage binaries enter subproblem right-hand sides so the
// decomposition can price them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sdiom/error.hpp"
#include "sdiom/indexing.hpp"
#include "sdiom/lp.hpp"
#include "sdiom/prognostics.hpp"
#include "sdiom/system.hpp"

namespace sdiom::model {

// Maintenance work distilled from prognostics: one PM task per operational
// DER with a degradation record (allowed start weeks and the week-by-week
// cost), one CM task per failed DER.  DERs without records never appear.
struct PmTask {
  std::string der_id;
  int mg = 0, der = 0;
  int window_lo = 1, window_hi = 1;  // allowed start weeks, inclusive
  int duration = 1;                  // weeks out of service
  std::vector<double> cost;          // cost[i] for start week window_lo + i
};

struct CmTask {
  std::string der_id;
  int mg = 0, der = 0;
  int duration = 1;
  double cost = 0.0;
};

struct MaintenancePlan {
  std::vector<PmTask> pm;
  std::vector<CmTask> cm;
};

// Derives the plan for the current sensor state: posterior update from the
// recorded observations, remaining-life distribution, dynamic cost curve and
// the reliability-floor deadline, clamped to the horizon.
inline MaintenancePlan make_plan(const sys::MMGSystem& system,
                                 const prognostics::DegradationLibrary& lib,
                                 int horizon) {
  require(horizon >= 1, "bad-horizon", "planning horizon must be positive");
  MaintenancePlan plan;
  for (int m = 0; m < system.num_mgs(); ++m) {
    const auto& mg = system.microgrids[m];
    for (int i = 0; i < int(mg.ders.size()); ++i) {
      const sys::Der& der = mg.ders[i];
      auto it = lib.find(der.id);
      if (it == lib.end()) {
        require(der.status == sys::DerStatus::operational,
                "missing-degradation",
                "failed DER '" + der.id + "' has no degradation record");
        continue;  // no record: the unit is treated as immortal
      }
      const prognostics::DegradationRecord& rec = it->second;
      if (der.status == sys::DerStatus::failed) {
        plan.cm.push_back(
            {der.id, m, i, der.cm_duration, rec.model.cm_cost});
        continue;
      }
      prognostics::PosteriorState post = prognostics::prior_state(rec.model);
      if (!rec.observations.empty())
        post = prognostics::update_posterior(
            rec.model, post,
            std::span<const std::pair<int, double>>(rec.observations));
      require(rec.age_weeks >= post.last_obs_time, "bad-age",
              "age of '" + der.id + "' predates its last observation");
      post.last_obs_time = rec.age_weeks;
      auto rld = prognostics::compute_rld(rec.model, post, horizon);
      auto curve = prognostics::dynamic_cost(rec.model.pm_cost,
                                             rec.model.cm_cost, rld,
                                             rec.age_weeks);
      int deadline = prognostics::maintenance_deadline(
          rld, der.reliability_floor, horizon);
      PmTask task;
      task.der_id = der.id;
      task.mg = m;
      task.der = i;
      task.window_lo = 1;
      task.window_hi = deadline;
      task.duration = der.pm_duration;
      task.cost.assign(curve.values.begin() + 1,
                       curve.values.begin() + 1 + deadline);
      plan.pm.push_back(std::move(task));
    }
  }
  return plan;
}

enum class Variant { per_week, per_week_scenario };

struct BuildOptions {
  Variant variant = Variant::per_week;
  double eta_floor = -1e12;  // initial lower bound on each recourse column
  bool with_recourse = true;  // false: pure maintenance master, no eta/theta
};

// A subproblem row whose right-hand side depends on first-stage binaries:
// row activity <= base_rhs + sum(coef * binary).
struct CouplingRow {
  int row = 0;
  double base_rhs = 0.0;
  std::vector<std::pair<VarKey, double>> terms;
};

struct ModelHandle {
  opt::LinearProgram lp;
  IndexMap index;
  std::vector<CouplingRow> coupling;
};

// How subproblem gating sees the first stage: exactly one of
//   master  - first-stage variables are shared columns (deterministic equiv),
//   values  - a concrete 0/1 assignment, folded into right-hand sides with
//             coupling rows recorded for cut generation,
//   availability - realized per-(mg, der) availability for the build week,
//             bypassing schedules entirely (rolling-horizon re-solves).
struct StageBinding {
  const IndexMap* master = nullptr;
  const std::map<VarKey, double>* values = nullptr;
  const std::vector<std::vector<double>>* availability = nullptr;
};

namespace detail {

struct AvailExpr {
  double constant = 0.0;
  std::vector<std::pair<VarKey, double>> terms;  // first-stage key, coefficient
};

struct TaskLookup {
  std::map<std::pair<int, int>, const PmTask*> pm;  // (mg, der) -> task
  std::map<std::pair<int, int>, const CmTask*> cm;

  explicit TaskLookup(const MaintenancePlan& plan) {
    for (const auto& t : plan.pm) {
      auto [it, fresh] = pm.emplace(std::make_pair(t.mg, t.der), &t);
      (void)it;
      require(fresh, "bad-plan", "duplicate PM task for '" + t.der_id + "'");
    }
    for (const auto& t : plan.cm) {
      auto [it, fresh] = cm.emplace(std::make_pair(t.mg, t.der), &t);
      (void)it;
      require(fresh, "bad-plan", "duplicate CM task for '" + t.der_id + "'");
      require(!pm.count({t.mg, t.der}), "bad-plan",
              "DER '" + t.der_id + "' has both PM and CM tasks");
    }
  }
};

// Availability of one DER in week t as an affine function of the first
// stage.  Operational units are available unless a PM start occupies t;
// failed units come online once the repair window has fully elapsed.
inline AvailExpr availability_expr(const TaskLookup& tasks, int mg, int der,
                                   sys::DerStatus status, int week,
                                   int horizon) {
  AvailExpr out;
  if (status == sys::DerStatus::operational) {
    out.constant = 1.0;
    auto it = tasks.pm.find({mg, der});
    if (it != tasks.pm.end()) {
      const PmTask& task = *it->second;
      int lo = std::max(task.window_lo, week - task.duration + 1);
      int hi = std::min(task.window_hi, week);
      for (int tau = lo; tau <= hi; ++tau)
        out.terms.emplace_back(VarKey{VarKind::pm_start, mg, der, -1, tau},
                               -1.0);
    }
  } else {
    auto it = tasks.cm.find({mg, der});
    if (it == tasks.cm.end()) return out;  // never repaired: constant 0
    const CmTask& task = *it->second;
    for (int tau = 1; tau <= std::min(horizon, week - task.duration); ++tau)
      out.terms.emplace_back(VarKey{VarKind::cm_start, mg, der, -1, tau}, 1.0);
  }
  return out;
}

class Emitter {
 public:
  Emitter(const sys::MMGSystem& system, const MaintenancePlan& plan)
      : system_(system), tasks_(plan), plan_(plan) {
    auto order = sys::renewable_order(system);
    for (int r = 0; r < int(order.size()); ++r)
      renew_idx_[{order[r].mg, order[r].der}] = r;
  }

  // ---- first stage ---------------------------------------------------------

  void emit_master(ModelHandle& h, const sys::ScenarioSet* scen,
                   const BuildOptions& opt, bool with_recourse) const {
    int T = system_.horizon_weeks;
    validate_plan(T);

    for (const auto& task : plan_.pm)
      for (int tau = task.window_lo; tau <= task.window_hi; ++tau) {
        int col = h.lp.add_col(task.cost[tau - task.window_lo], 0.0, 1.0, true,
                               var_name({VarKind::pm_start, task.mg, task.der,
                                         -1, tau}));
        int got = h.index.add({VarKind::pm_start, task.mg, task.der, -1, tau});
        require(col == got, "internal", "index desync");
      }
    for (const auto& task : plan_.cm)
      for (int tau = 1; tau <= T; ++tau) {
        int col = h.lp.add_col(task.cost, 0.0, 1.0, true,
                               var_name({VarKind::cm_start, task.mg, task.der,
                                         -1, tau}));
        int got = h.index.add({VarKind::cm_start, task.mg, task.der, -1, tau});
        require(col == got, "internal", "index desync");
      }

    // Crew columns only for microgrids that have any maintenance to host.
    std::vector<bool> mg_has_task(system_.num_mgs(), false);
    for (const auto& task : plan_.pm) mg_has_task[task.mg] = true;
    for (const auto& task : plan_.cm) mg_has_task[task.mg] = true;
    for (int m = 0; m < system_.num_mgs(); ++m)
      if (mg_has_task[m])
        for (int tau = 1; tau <= T; ++tau)
          add_col(h, {VarKind::crew, m, -1, -1, tau},
                  system_.microgrids[m].crew_cost, 0.0, 1.0, true);

    if (with_recourse) {
      // Recourse columns always cost 1: aggregated cuts carry probabilities
      // inside their coefficients, and scenario-resolved cuts are scaled by
      // p_omega where they are generated.
      if (opt.variant == Variant::per_week) {
        for (int t = 1; t <= T; ++t)
          add_col(h, {VarKind::recourse, -1, -1, -1, t}, 1.0, opt.eta_floor,
                  opt::kInf, false);
      } else {
        require(scen != nullptr, "internal", "scenario set needed for variant");
        for (int t = 1; t <= T; ++t)
          for (int w = 0; w < scen->num_scenarios(); ++w)
            add_col(h, {VarKind::recourse, -1, -1, -1, t, 0, w}, 1.0,
                    opt.eta_floor, opt::kInf, false);
      }
      add_col(h, {VarKind::recovery}, 1.0, 0.0, opt::kInf, false);
    }

    // Exactly one start per task.
    for (const auto& task : plan_.pm) {
      std::vector<std::pair<int, double>> terms;
      for (int tau = task.window_lo; tau <= task.window_hi; ++tau)
        terms.emplace_back(
            h.index.at({VarKind::pm_start, task.mg, task.der, -1, tau}), 1.0);
      h.lp.add_row(opt::Sense::eq, 1.0,
                   std::span<const std::pair<int, double>>(terms),
                   "pm_once_" + task.der_id);
    }
    for (const auto& task : plan_.cm) {
      std::vector<std::pair<int, double>> terms;
      for (int tau = 1; tau <= T; ++tau)
        terms.emplace_back(
            h.index.at({VarKind::cm_start, task.mg, task.der, -1, tau}), 1.0);
      h.lp.add_row(opt::Sense::eq, 1.0,
                   std::span<const std::pair<int, double>>(terms),
                   "cm_once_" + task.der_id);
    }

    // Crew presence throughout each occupied week.
    auto couple = [&](const std::string& der_id, int mg, int der, bool is_pm,
                      int window_lo, int window_hi, int duration) {
      for (int t = 1; t <= T; ++t) {
        std::vector<std::pair<int, double>> terms;
        int lo = std::max(window_lo, t - duration + 1);
        int hi = std::min(window_hi, t);
        for (int tau = lo; tau <= hi; ++tau)
          terms.emplace_back(
              h.index.at({is_pm ? VarKind::pm_start : VarKind::cm_start, mg,
                          der, -1, tau}),
              1.0);
        if (terms.empty()) continue;
        terms.emplace_back(h.index.at({VarKind::crew, mg, -1, -1, t}), -1.0);
        h.lp.add_row(opt::Sense::le, 0.0,
                     std::span<const std::pair<int, double>>(terms),
                     "crew_need_" + der_id + "_t" + std::to_string(t));
      }
    };
    for (const auto& task : plan_.pm)
      couple(task.der_id, task.mg, task.der, true, task.window_lo,
             task.window_hi, task.duration);
    for (const auto& task : plan_.cm)
      couple(task.der_id, task.mg, task.der, false, 1, T, task.duration);

    // One microgrid visit per week across the fleet.
    int active_mgs = 0;
    for (bool b : mg_has_task) active_mgs += b ? 1 : 0;
    if (active_mgs >= 2)
      for (int t = 1; t <= T; ++t) {
        std::vector<std::pair<int, double>> terms;
        for (int m = 0; m < system_.num_mgs(); ++m)
          if (mg_has_task[m])
            terms.emplace_back(h.index.at({VarKind::crew, m, -1, -1, t}), 1.0);
        h.lp.add_row(opt::Sense::le, 1.0,
                     std::span<const std::pair<int, double>>(terms),
                     "crew_unique_t" + std::to_string(t));
      }
  }

  // ---- second stage --------------------------------------------------------

  // Emits the operational block for (week, scenario) into h.  weight scales
  // the objective (probability or 1).  binding decides how first-stage terms
  // appear.  relaxed turns operational binaries into [0,1] continuous.
  void emit_week(ModelHandle& h, const sys::ScenarioSet& scen, int week,
                 int scenario, double weight, const StageBinding& binding,
                 bool relaxed) const {
    require(week >= 1 && week <= system_.horizon_weeks, "bad-week",
            "subproblem week outside horizon");
    require(scenario >= 0 && scenario < scen.num_scenarios(), "bad-scenario",
            "scenario index out of range");
    const sys::Scenario& sc = scen.scenarios[scenario];
    const int H = system_.hours_per_week;
    const int t = week;
    const int w = scenario;
    const double rho = system_.loss_fraction;
    sys::Connectivity conn = scen.connectivity[t - 1];
    bool grid_ok = conn == sys::Connectivity::grid_connected;
    bool links_ok = conn != sys::Connectivity::islanded;

    for (int m = 0; m < system_.num_mgs(); ++m) {
      const sys::Microgrid& mg = system_.microgrids[m];

      for (int i = 0; i < int(mg.ders.size()); ++i) {
        const sys::Der& der = mg.ders[i];
        if (der.kind == sys::DerKind::conventional)
          emit_conventional(h, m, i, der, t, w, weight, binding, relaxed);
        else
          emit_renewable(h, scen, m, i, der, t, w, binding);
      }
      for (int b = 0; b < int(mg.batteries.size()); ++b)
        emit_battery(h, mg.batteries[b], m, b, t, w, relaxed);
      emit_grid(h, sc, scen, m, t, w, weight, grid_ok, relaxed);
      emit_links(h, m, t, w, links_ok, relaxed);
      emit_curtailment(h, sc, scen, m, t, w, weight);
    }

    // Trade pairing: what m buys from l is exactly what l sells to m, in
    // power and in direction flags.
    for (const auto& link : system_.mg_links) {
      int m = system_.mg_index(link.from), l = system_.mg_index(link.to);
      for (int hh = 1; hh <= H; ++hh) {
        h.lp.add_row(opt::Sense::eq, 0.0,
                     {{h.index.at({VarKind::link_buy, m, -1, l, t, hh, w}), 1.0},
                      {h.index.at({VarKind::link_sell, l, -1, m, t, hh, w}), -1.0}},
                     "pair_u_m" + std::to_string(m) + "_l" + std::to_string(l) +
                         "_t" + std::to_string(t) + "_h" + std::to_string(hh) +
                         "_s" + std::to_string(w));
        h.lp.add_row(opt::Sense::eq, 0.0,
                     {{h.index.at({VarKind::link_buy_flag, m, -1, l, t, hh, w}), 1.0},
                      {h.index.at({VarKind::link_sell_flag, l, -1, m, t, hh, w}), -1.0}},
                     "pair_y_m" + std::to_string(m) + "_l" + std::to_string(l) +
                         "_t" + std::to_string(t) + "_h" + std::to_string(hh) +
                         "_s" + std::to_string(w));
      }
    }

    // Power balance last, once every column of the block exists.
    for (int m = 0; m < system_.num_mgs(); ++m) {
      const sys::Microgrid& mg = system_.microgrids[m];
      for (int hh = 1; hh <= H; ++hh) {
        std::vector<std::pair<int, double>> terms;
        for (int i = 0; i < int(mg.ders.size()); ++i)
          terms.emplace_back(
              h.index.at({VarKind::dispatch, m, i, -1, t, hh, w}), 1.0);
        for (int b = 0; b < int(mg.batteries.size()); ++b) {
          terms.emplace_back(
              h.index.at({VarKind::discharge, m, b, -1, t, hh, w}), 1.0);
          terms.emplace_back(
              h.index.at({VarKind::charge, m, b, -1, t, hh, w}), -1.0);
        }
        terms.emplace_back(h.index.at({VarKind::grid_buy, m, -1, -1, t, hh, w}),
                           1.0 - rho);
        terms.emplace_back(
            h.index.at({VarKind::grid_sell, m, -1, -1, t, hh, w}), -1.0);
        for (const auto& link : system_.mg_links) {
          if (system_.mg_index(link.from) != m) continue;
          int l = system_.mg_index(link.to);
          terms.emplace_back(
              h.index.at({VarKind::link_buy, m, -1, l, t, hh, w}), 1.0 - rho);
          terms.emplace_back(
              h.index.at({VarKind::link_sell, m, -1, l, t, hh, w}), -1.0);
        }
        terms.emplace_back(
            h.index.at({VarKind::curtail_crit, m, -1, -1, t, hh, w}), 1.0);
        terms.emplace_back(
            h.index.at({VarKind::curtail_noncrit, m, -1, -1, t, hh, w}), 1.0);
        double load = sc.crit_load[scen.idx(m, t, hh)] +
                      sc.noncrit_load[scen.idx(m, t, hh)];
        h.lp.add_row(opt::Sense::eq, load,
                     std::span<const std::pair<int, double>>(terms),
                     "balance_m" + std::to_string(m) + "_t" + std::to_string(t) +
                         "_h" + std::to_string(hh) + "_s" + std::to_string(w));
      }
    }
  }

 private:
  void validate_plan(int T) const {
    for (const auto& task : plan_.pm) {
      require(task.window_lo >= 1 && task.window_lo <= task.window_hi &&
                  task.window_hi <= T,
              "infeasible-deadlines",
              "PM window of '" + task.der_id + "' is empty or outside horizon");
      require(int(task.cost.size()) == task.window_hi - task.window_lo + 1,
              "bad-plan", "cost vector of '" + task.der_id +
                              "' does not span its window");
      require(task.duration >= 1, "bad-plan", "PM duration must be positive");
    }
    for (const auto& task : plan_.cm)
      require(task.duration >= 1, "bad-plan", "CM duration must be positive");

    // Crew capacity is one microgrid visit per week, so by week w at most w
    // distinct microgrids can have been visited; every microgrid whose PM
    // window closes by w needs a visit by then.
    for (int w = 1; w <= T; ++w) {
      std::vector<bool> needs(system_.num_mgs(), false);
      for (const auto& task : plan_.pm)
        if (task.window_hi <= w) needs[task.mg] = true;
      int count = 0;
      for (bool b : needs) count += b ? 1 : 0;
      require(count <= w, "infeasible-deadlines",
              std::to_string(count) + " microgrids need crew by week " +
                  std::to_string(w) + " but only " + std::to_string(w) +
                  " visits fit");
    }
  }

  int add_col(ModelHandle& h, const VarKey& key, double cost, double lo,
              double hi, bool integer) const {
    int col = h.lp.add_col(cost, lo, hi, integer, var_name(key));
    int got = h.index.add(key);
    require(col == got, "internal", "index desync");
    return col;
  }

  // Emits "lhs <= scale * availability" with the first-stage side resolved
  // per the binding.  lhs holds (col, coef) pairs already in h's space.
  void emit_gated_row(ModelHandle& h, std::vector<std::pair<int, double>> lhs,
                      double scale, const AvailExpr& avail,
                      const StageBinding& binding,
                      const std::string& name) const {
    double rhs = scale * avail.constant;
    if (binding.master != nullptr) {
      for (const auto& [key, coef] : avail.terms)
        lhs.emplace_back(binding.master->at(key), -scale * coef);
      h.lp.add_row(opt::Sense::le, rhs,
                   std::span<const std::pair<int, double>>(lhs), name);
      return;
    }
    if (binding.values == nullptr) {
      // Realized-availability mode: the expression is already a constant.
      require(avail.terms.empty(), "internal",
              "unresolved first-stage terms without a binding");
      h.lp.add_row(opt::Sense::le, rhs,
                   std::span<const std::pair<int, double>>(lhs), name);
      return;
    }
    CouplingRow cr;
    cr.base_rhs = rhs;
    double folded = rhs;
    for (const auto& [key, coef] : avail.terms) {
      auto it = binding.values->find(key);
      require(it != binding.values->end(), "incomplete-schedule",
              "no value for first-stage variable " + var_name(key));
      folded += scale * coef * it->second;
      cr.terms.emplace_back(key, scale * coef);
    }
    cr.row = h.lp.add_row(opt::Sense::le, folded,
                          std::span<const std::pair<int, double>>(lhs), name);
    if (!cr.terms.empty()) h.coupling.push_back(std::move(cr));
  }

  AvailExpr availability_for(int m, int i, const sys::Der& der, int t,
                             const StageBinding& binding) const {
    if (binding.availability != nullptr) {
      AvailExpr direct;
      direct.constant = (*binding.availability)[m][i];
      require(direct.constant == 0.0 || direct.constant == 1.0,
              "bad-availability", "availability must be 0 or 1");
      return direct;
    }
    return availability_expr(tasks_, m, i, der.status, t,
                             system_.horizon_weeks);
  }

  void emit_conventional(ModelHandle& h, int m, int i, const sys::Der& der,
                         int t, int w, double weight,
                         const StageBinding& binding, bool relaxed) const {
    const int H = system_.hours_per_week;
    for (int hh = 1; hh <= H; ++hh) {
      add_col(h, {VarKind::commit, m, i, -1, t, hh, w}, weight * der.no_load_cost,
              0.0, 1.0, !relaxed);
      add_col(h, {VarKind::turn_on, m, i, -1, t, hh, w}, weight * der.start_cost,
              0.0, 1.0, false);
      add_col(h, {VarKind::turn_off, m, i, -1, t, hh, w}, weight * der.stop_cost,
              0.0, 1.0, false);
      add_col(h, {VarKind::dispatch, m, i, -1, t, hh, w},
              weight * der.marginal_cost, 0.0, der.p_max, false);
    }
    AvailExpr avail = availability_for(m, i, der, t, binding);
    std::string base = "_m" + std::to_string(m) + "_u" + std::to_string(i) +
                       "_t" + std::to_string(t);
    for (int hh = 1; hh <= H; ++hh) {
      std::string suffix = base + "_h" + std::to_string(hh) + "_s" +
                           std::to_string(w);
      int x = h.index.at({VarKind::commit, m, i, -1, t, hh, w});
      int y = h.index.at({VarKind::dispatch, m, i, -1, t, hh, w});
      int on = h.index.at({VarKind::turn_on, m, i, -1, t, hh, w});
      int off = h.index.at({VarKind::turn_off, m, i, -1, t, hh, w});

      emit_gated_row(h, {{x, 1.0}}, 1.0, avail, binding, "gate" + suffix);
      h.lp.add_row(opt::Sense::le, 0.0, {{y, 1.0}, {x, -der.p_max}},
                   "caphi" + suffix);
      h.lp.add_row(opt::Sense::le, 0.0, {{y, -1.0}, {x, der.p_min}},
                   "caplo" + suffix);

      if (hh == 1) {
        // The week starts from rest: no prior commitment, no prior output.
        h.lp.add_row(opt::Sense::eq, 0.0, {{on, 1.0}, {off, -1.0}, {x, -1.0}},
                     "logic" + suffix);
        h.lp.add_row(opt::Sense::le, der.ramp_up, {{y, 1.0}}, "rampup" + suffix);
      } else {
        int xp = h.index.at({VarKind::commit, m, i, -1, t, hh - 1, w});
        int yp = h.index.at({VarKind::dispatch, m, i, -1, t, hh - 1, w});
        h.lp.add_row(opt::Sense::eq, 0.0,
                     {{on, 1.0}, {off, -1.0}, {x, -1.0}, {xp, 1.0}},
                     "logic" + suffix);
        h.lp.add_row(opt::Sense::le, der.ramp_up, {{y, 1.0}, {yp, -1.0}},
                     "rampup" + suffix);
        h.lp.add_row(opt::Sense::le, der.ramp_down, {{y, -1.0}, {yp, 1.0}},
                     "rampdn" + suffix);
      }
      h.lp.add_row(opt::Sense::le, 1.0, {{on, 1.0}, {off, 1.0}},
                   "onoff" + suffix);

      // Committing at hh pins the unit on through its minimum up time, and
      // releasing it pins it off through its minimum down time.
      for (int hp = hh + 1; hp <= std::min(H, hh + der.min_up - 1); ++hp) {
        int xf = h.index.at({VarKind::commit, m, i, -1, t, hp, w});
        if (hh == 1)
          h.lp.add_row(opt::Sense::le, 0.0, {{x, 1.0}, {xf, -1.0}},
                       "minup" + suffix + "_h" + std::to_string(hp));
        else
          h.lp.add_row(opt::Sense::le, 0.0,
                       {{x, 1.0},
                        {h.index.at({VarKind::commit, m, i, -1, t, hh - 1, w}),
                         -1.0},
                        {xf, -1.0}},
                       "minup" + suffix + "_h" + std::to_string(hp));
      }
      if (hh >= 2)
        for (int hp = hh + 1; hp <= std::min(H, hh + der.min_down - 1); ++hp) {
          int xf = h.index.at({VarKind::commit, m, i, -1, t, hp, w});
          h.lp.add_row(
              opt::Sense::le, 1.0,
              {{h.index.at({VarKind::commit, m, i, -1, t, hh - 1, w}), 1.0},
               {x, -1.0},
               {xf, 1.0}},
              "mindn" + suffix + "_h" + std::to_string(hp));
        }
    }
  }

  void emit_renewable(ModelHandle& h, const sys::ScenarioSet& scen, int m,
                      int i, const sys::Der& der, int t, int w,
                      const StageBinding& binding) const {
    const int H = system_.hours_per_week;
    auto rit = renew_idx_.find({m, i});
    require(rit != renew_idx_.end(), "internal",
            "renewable not in canonical order");
    int r = rit->second;

    AvailExpr avail = availability_for(m, i, der, t, binding);
    const sys::Scenario& sc = scen.scenarios[w];
    for (int hh = 1; hh <= H; ++hh) {
      double cap = sc.renewable_cap[scen.ridx(r, t, hh)];
      int y = add_col(h, {VarKind::dispatch, m, i, -1, t, hh, w}, 0.0, 0.0,
                      cap, false);
      if (avail.terms.empty() && binding.values == nullptr) {
        // Constant availability folds into the column bound.
        if (avail.constant == 0.0) h.lp.hi[y] = 0.0;
        continue;
      }
      emit_gated_row(h, {{y, 1.0}}, cap, avail, binding,
                     "rcap_m" + std::to_string(m) + "_u" + std::to_string(i) +
                         "_t" + std::to_string(t) + "_h" + std::to_string(hh) +
                         "_s" + std::to_string(w));
    }
  }

  void emit_battery(ModelHandle& h, const sys::Battery& bat, int m, int b,
                    int t, int w, bool relaxed) const {
    const int H = system_.hours_per_week;
    const double soc0 = bat.soc_min;  // weekly boundary level
    for (int hh = 1; hh <= H; ++hh) {
      add_col(h, {VarKind::charge, m, b, -1, t, hh, w}, 0.0, 0.0,
              bat.charge_max, false);
      add_col(h, {VarKind::discharge, m, b, -1, t, hh, w}, 0.0, 0.0,
              bat.discharge_max, false);
      add_col(h, {VarKind::charge_flag, m, b, -1, t, hh, w}, 0.0, 0.0, 1.0,
              !relaxed);
      add_col(h, {VarKind::discharge_flag, m, b, -1, t, hh, w}, 0.0, 0.0, 1.0,
              !relaxed);
      add_col(h, {VarKind::soc, m, b, -1, t, hh, w}, 0.0, bat.soc_min,
              bat.soc_max, false);
    }
    std::string base = "_m" + std::to_string(m) + "_b" + std::to_string(b) +
                       "_t" + std::to_string(t);
    for (int hh = 1; hh <= H; ++hh) {
      std::string suffix = base + "_h" + std::to_string(hh) + "_s" +
                           std::to_string(w);
      int ch = h.index.at({VarKind::charge, m, b, -1, t, hh, w});
      int dch = h.index.at({VarKind::discharge, m, b, -1, t, hh, w});
      int pch = h.index.at({VarKind::charge_flag, m, b, -1, t, hh, w});
      int pdch = h.index.at({VarKind::discharge_flag, m, b, -1, t, hh, w});
      int s = h.index.at({VarKind::soc, m, b, -1, t, hh, w});

      h.lp.add_row(opt::Sense::le, 0.0, {{ch, 1.0}, {pch, -bat.charge_max}},
                   "chcap" + suffix);
      h.lp.add_row(opt::Sense::le, 0.0, {{dch, 1.0}, {pdch, -bat.discharge_max}},
                   "dchcap" + suffix);
      h.lp.add_row(opt::Sense::le, 1.0, {{pch, 1.0}, {pdch, 1.0}},
                   "chexcl" + suffix);

      // Stored energy grows by the charged amount net of losses and falls by
      // the energy needed to push out the discharged power.
      if (hh == 1) {
        h.lp.add_row(opt::Sense::eq, soc0,
                     {{s, 1.0}, {ch, -bat.efficiency}, {dch, 1.0 / bat.efficiency}},
                     "socrec" + suffix);
      } else {
        int sp = h.index.at({VarKind::soc, m, b, -1, t, hh - 1, w});
        h.lp.add_row(opt::Sense::eq, 0.0,
                     {{s, 1.0},
                      {sp, -1.0},
                      {ch, -bat.efficiency},
                      {dch, 1.0 / bat.efficiency}},
                     "socrec" + suffix);
      }
    }
    // The week must hand the battery back at its boundary level.
    h.lp.add_row(opt::Sense::eq, soc0,
                 {{h.index.at({VarKind::soc, m, b, -1, t, H, w}), 1.0}},
                 "socend" + base + "_s" + std::to_string(w));
  }

  void emit_grid(ModelHandle& h, const sys::Scenario& sc,
                 const sys::ScenarioSet& scen, int m, int t, int w,
                 double weight, bool grid_ok, bool relaxed) const {
    const int H = system_.hours_per_week;
    const sys::Microgrid& mg = system_.microgrids[m];
    double bcap = grid_ok ? mg.grid_buy_limit : 0.0;
    double scap = grid_ok ? mg.grid_sell_limit : 0.0;
    for (int hh = 1; hh <= H; ++hh) {
      std::size_t k = scen.idx(m, t, hh);
      add_col(h, {VarKind::grid_buy, m, -1, -1, t, hh, w},
              weight * sc.price_buy[k], 0.0, bcap, false);
      add_col(h, {VarKind::grid_sell, m, -1, -1, t, hh, w},
              -weight * sc.price_sell[k], 0.0, scap, false);
      add_col(h, {VarKind::grid_buy_flag, m, -1, -1, t, hh, w}, 0.0, 0.0,
              grid_ok ? 1.0 : 0.0, !relaxed);
      add_col(h, {VarKind::grid_sell_flag, m, -1, -1, t, hh, w}, 0.0, 0.0,
              grid_ok ? 1.0 : 0.0, !relaxed);
    }
    for (int hh = 1; hh <= H; ++hh) {
      std::string suffix = "_m" + std::to_string(m) + "_t" + std::to_string(t) +
                           "_h" + std::to_string(hh) + "_s" + std::to_string(w);
      int gb = h.index.at({VarKind::grid_buy, m, -1, -1, t, hh, w});
      int gs = h.index.at({VarKind::grid_sell, m, -1, -1, t, hh, w});
      int yb = h.index.at({VarKind::grid_buy_flag, m, -1, -1, t, hh, w});
      int ys = h.index.at({VarKind::grid_sell_flag, m, -1, -1, t, hh, w});
      h.lp.add_row(opt::Sense::le, 0.0, {{gb, 1.0}, {yb, -mg.grid_buy_limit}},
                   "gbcap" + suffix);
      h.lp.add_row(opt::Sense::le, 0.0, {{gs, 1.0}, {ys, -mg.grid_sell_limit}},
                   "gscap" + suffix);
      h.lp.add_row(opt::Sense::le, 1.0, {{yb, 1.0}, {ys, 1.0}},
                   "gexcl" + suffix);
    }
  }

  void emit_links(ModelHandle& h, int m, int t, int w, bool links_ok,
                  bool relaxed) const {
    const int H = system_.hours_per_week;
    for (const auto& link : system_.mg_links) {
      if (system_.mg_index(link.from) != m) continue;
      int l = system_.mg_index(link.to);
      double bcap = links_ok ? link.buy_cap : 0.0;
      double scap = links_ok ? link.sell_cap : 0.0;
      for (int hh = 1; hh <= H; ++hh) {
        add_col(h, {VarKind::link_buy, m, -1, l, t, hh, w}, 0.0, 0.0, bcap,
                false);
        add_col(h, {VarKind::link_sell, m, -1, l, t, hh, w}, 0.0, 0.0, scap,
                false);
        add_col(h, {VarKind::link_buy_flag, m, -1, l, t, hh, w}, 0.0, 0.0,
                links_ok ? 1.0 : 0.0, !relaxed);
        add_col(h, {VarKind::link_sell_flag, m, -1, l, t, hh, w}, 0.0, 0.0,
                links_ok ? 1.0 : 0.0, !relaxed);
      }
      for (int hh = 1; hh <= H; ++hh) {
        std::string suffix = "_m" + std::to_string(m) + "_l" +
                             std::to_string(l) + "_t" + std::to_string(t) +
                             "_h" + std::to_string(hh) + "_s" +
                             std::to_string(w);
        int ub = h.index.at({VarKind::link_buy, m, -1, l, t, hh, w});
        int us = h.index.at({VarKind::link_sell, m, -1, l, t, hh, w});
        int yb = h.index.at({VarKind::link_buy_flag, m, -1, l, t, hh, w});
        int ys = h.index.at({VarKind::link_sell_flag, m, -1, l, t, hh, w});
        h.lp.add_row(opt::Sense::le, 0.0, {{ub, 1.0}, {yb, -link.buy_cap}},
                     "ubcap" + suffix);
        h.lp.add_row(opt::Sense::le, 0.0, {{us, 1.0}, {ys, -link.sell_cap}},
                     "uscap" + suffix);
        h.lp.add_row(opt::Sense::le, 1.0, {{yb, 1.0}, {ys, 1.0}},
                     "uexcl" + suffix);
      }
    }
  }

  void emit_curtailment(ModelHandle& h, const sys::Scenario& sc,
                        const sys::ScenarioSet& scen, int m, int t, int w,
                        double weight) const {
    const int H = system_.hours_per_week;
    for (int hh = 1; hh <= H; ++hh) {
      std::size_t k = scen.idx(m, t, hh);
      add_col(h, {VarKind::curtail_crit, m, -1, -1, t, hh, w},
              weight * scen.crit_penalty[m], 0.0, sc.crit_load[k], false);
      add_col(h, {VarKind::curtail_noncrit, m, -1, -1, t, hh, w},
              weight * scen.noncrit_penalty[m], 0.0, sc.noncrit_load[k], false);
    }
  }

  const sys::MMGSystem& system_;
  TaskLookup tasks_;
  const MaintenancePlan& plan_;
  std::map<std::pair<int, int>, int> renew_idx_;  // (mg, der) -> canonical slot
};

}  // namespace detail

inline ModelHandle build_master(const sys::MMGSystem& system,
                                const MaintenancePlan& plan,
                                const sys::ScenarioSet* scen = nullptr,
                                BuildOptions opt = {}) {
  ModelHandle h;
  detail::Emitter(system, plan).emit_master(h, scen, opt, opt.with_recourse);
  return h;
}

// week >= 1; scenario := a single index, or -1 for all scenarios weighted by
// probability.  binding.values (or .availability) triggers fixed mode.
inline ModelHandle build_subproblem(const sys::MMGSystem& system,
                                    const sys::ScenarioSet& scen,
                                    const MaintenancePlan& plan, int week,
                                    int scenario, const StageBinding& binding,
                                    bool relaxed) {
  require(binding.master == nullptr, "internal",
          "shared-column mode is reserved for the deterministic equivalent");
  ModelHandle h;
  detail::Emitter emit(system, plan);
  if (scenario >= 0) {
    emit.emit_week(h, scen, week, scenario, 1.0, binding, relaxed);
  } else {
    for (int w = 0; w < scen.num_scenarios(); ++w)
      emit.emit_week(h, scen, week, w, scen.scenarios[w].probability, binding,
                     relaxed);
  }
  return h;
}

inline ModelHandle build_deterministic_equivalent(
    const sys::MMGSystem& system, const sys::ScenarioSet& scen,
    const MaintenancePlan& plan, bool relaxed = false) {
  ModelHandle h;
  detail::Emitter emit(system, plan);
  BuildOptions opt;
  emit.emit_master(h, &scen, opt, /*with_recourse=*/false);

  // Estimate the final width before committing to the build.
  std::size_t per_block = 0;
  for (const auto& mg : system.microgrids) {
    for (const auto& der : mg.ders)
      per_block += der.kind == sys::DerKind::conventional ? 4 : 1;
    per_block += mg.batteries.size() * 5 + 6;
  }
  per_block += system.mg_links.size() * 4;
  per_block *= std::size_t(system.hours_per_week);
  std::size_t total = std::size_t(h.lp.num_cols()) +
                      per_block * system.horizon_weeks * scen.num_scenarios();
  require(total <= 300000, "model-too-large",
          "deterministic equivalent needs " + std::to_string(total) +
              " columns; decompose instead");

  StageBinding binding;
  binding.master = &h.index;
  for (int t = 1; t <= system.horizon_weeks; ++t)
    for (int w = 0; w < scen.num_scenarios(); ++w)
      emit.emit_week(h, scen, t, w, scen.scenarios[w].probability, binding,
                     relaxed);
  return h;
}

// ---- solution utilities ----------------------------------------------------

// Reads the maintenance schedule out of a master (or deterministic
// equivalent) solution vector.
inline sys::MaintenanceSchedule schedule_from_solution(
    const ModelHandle& h, const sys::MMGSystem& system,
    std::span<const double> x) {
  sys::MaintenanceSchedule out;
  for (const auto& [key, col] : h.index.entries()) {
    if (x[col] <= 0.5) continue;
    if (key.kind == VarKind::pm_start)
      out.pm_week[system.microgrids[key.mg].ders[key.unit].id] = key.week;
    else if (key.kind == VarKind::cm_start)
      out.cm_week[system.microgrids[key.mg].ders[key.unit].id] = key.week;
    else if (key.kind == VarKind::crew)
      out.crew_weeks[system.microgrids[key.mg].id].push_back(key.week);
  }
  for (auto& [id, weeks] : out.crew_weeks) std::sort(weeks.begin(), weeks.end());
  return out;
}

// First-stage values in the shape subproblem bindings expect.
inline std::map<VarKey, double> first_stage_values(
    const sys::MMGSystem& system, const MaintenancePlan& plan,
    const sys::MaintenanceSchedule& schedule) {
  std::map<VarKey, double> out;
  for (const auto& task : plan.pm) {
    auto it = schedule.pm_week.find(task.der_id);
    require(it != schedule.pm_week.end(), "incomplete-schedule",
            "schedule is missing PM week for '" + task.der_id + "'");
    require(it->second >= task.window_lo && it->second <= task.window_hi,
            "incomplete-schedule",
            "PM week for '" + task.der_id + "' is outside its window");
    for (int tau = task.window_lo; tau <= task.window_hi; ++tau)
      out[{VarKind::pm_start, task.mg, task.der, -1, tau}] =
          tau == it->second ? 1.0 : 0.0;
  }
  for (const auto& task : plan.cm) {
    auto it = schedule.cm_week.find(task.der_id);
    require(it != schedule.cm_week.end(), "incomplete-schedule",
            "schedule is missing CM week for '" + task.der_id + "'");
    for (int tau = 1; tau <= system.horizon_weeks; ++tau)
      out[{VarKind::cm_start, task.mg, task.der, -1, tau}] =
          tau == it->second ? 1.0 : 0.0;
  }
  return out;
}

// Independent audit of a solved operational block: recomputes balance, SOC
// physics, gating, commitment logic, ramps and trade pairing straight from
// the scenario data and the variable keys, without trusting the LP rows that
// produced the solution.  avail(m, der, week) supplies ground-truth
// availability.  Returns human-readable issues; empty means sound.
inline std::vector<std::string> soundness_issues(
    const sys::MMGSystem& system, const sys::ScenarioSet& scen,
    const ModelHandle& h, std::span<const double> x,
    const std::function<double(int, int, int)>& avail) {
  std::vector<std::string> issues;
  const double tol = 1e-6;
  auto flag = [&](const std::string& what) {
    if (issues.size() < 200) issues.push_back(what);
  };
  auto val = [&](const VarKey& k) { return x[h.index.at(k)]; };
  auto where = [](int m, int t, int hh, int w) {
    return " at mg " + std::to_string(m) + " week " + std::to_string(t) +
           " hour " + std::to_string(hh) + " scenario " + std::to_string(w);
  };

  // Which (week, scenario) blocks does this model carry?
  std::vector<std::pair<int, int>> blocks;
  for (const auto& [key, col] : h.index.entries())
    if (key.kind == VarKind::grid_buy && key.mg == 0 && key.hour == 1)
      blocks.emplace_back(key.week, key.scenario);

  const int H = system.hours_per_week;
  const double rho = system.loss_fraction;
  for (auto [t, w] : blocks) {
    const sys::Scenario& sc = scen.scenarios[w];
    sys::Connectivity conn = scen.connectivity[t - 1];
    auto renewables = sys::renewable_order(system);

    for (int m = 0; m < system.num_mgs(); ++m) {
      const sys::Microgrid& mg = system.microgrids[m];
      for (int hh = 1; hh <= H; ++hh) {
        // Supply minus demand must net to zero after losses.
        double lhs = 0.0;
        for (int i = 0; i < int(mg.ders.size()); ++i)
          lhs += val({VarKind::dispatch, m, i, -1, t, hh, w});
        for (int b = 0; b < int(mg.batteries.size()); ++b)
          lhs += val({VarKind::discharge, m, b, -1, t, hh, w}) -
                 val({VarKind::charge, m, b, -1, t, hh, w});
        lhs += (1.0 - rho) * val({VarKind::grid_buy, m, -1, -1, t, hh, w}) -
               val({VarKind::grid_sell, m, -1, -1, t, hh, w});
        for (const auto& link : system.mg_links) {
          if (system.mg_index(link.from) != m) continue;
          int l = system.mg_index(link.to);
          lhs += (1.0 - rho) * val({VarKind::link_buy, m, -1, l, t, hh, w}) -
                 val({VarKind::link_sell, m, -1, l, t, hh, w});
        }
        lhs += val({VarKind::curtail_crit, m, -1, -1, t, hh, w}) +
               val({VarKind::curtail_noncrit, m, -1, -1, t, hh, w});
        double load = sc.crit_load[scen.idx(m, t, hh)] +
                      sc.noncrit_load[scen.idx(m, t, hh)];
        if (std::abs(lhs - load) > tol * (1.0 + std::abs(load)))
          flag("power balance off by " + std::to_string(lhs - load) +
               where(m, t, hh, w));

        if (val({VarKind::curtail_crit, m, -1, -1, t, hh, w}) >
            sc.crit_load[scen.idx(m, t, hh)] + tol)
          flag("critical curtailment above load" + where(m, t, hh, w));
        if (val({VarKind::curtail_noncrit, m, -1, -1, t, hh, w}) >
            sc.noncrit_load[scen.idx(m, t, hh)] + tol)
          flag("noncritical curtailment above load" + where(m, t, hh, w));

        // Grid exchange: capacity, one direction at a time, connectivity.
        double gb = val({VarKind::grid_buy, m, -1, -1, t, hh, w});
        double gs = val({VarKind::grid_sell, m, -1, -1, t, hh, w});
        double ygb = val({VarKind::grid_buy_flag, m, -1, -1, t, hh, w});
        double ygs = val({VarKind::grid_sell_flag, m, -1, -1, t, hh, w});
        if (ygb + ygs > 1.0 + tol)
          flag("grid buys and sells simultaneously" + where(m, t, hh, w));
        if (gb > mg.grid_buy_limit * ygb + tol)
          flag("grid purchase above its gated capacity" + where(m, t, hh, w));
        if (gs > mg.grid_sell_limit * ygs + tol)
          flag("grid sale above its gated capacity" + where(m, t, hh, w));
        if (conn != sys::Connectivity::grid_connected && gb + gs > tol)
          flag("grid exchange while disconnected" + where(m, t, hh, w));
      }

      for (int i = 0; i < int(mg.ders.size()); ++i) {
        const sys::Der& der = mg.ders[i];
        double a = avail(m, i, t);
        if (der.kind != sys::DerKind::conventional) {
          int r = -1;
          for (int k = 0; k < int(renewables.size()); ++k)
            if (renewables[k].mg == m && renewables[k].der == i) r = k;
          for (int hh = 1; hh <= H; ++hh) {
            double cap = sc.renewable_cap[scen.ridx(r, t, hh)];
            if (val({VarKind::dispatch, m, i, -1, t, hh, w}) > cap * a + tol)
              flag("renewable output above available capacity" +
                   where(m, t, hh, w));
          }
          continue;
        }
        double prev_x = 0.0, prev_y = 0.0;
        for (int hh = 1; hh <= H; ++hh) {
          double xc = val({VarKind::commit, m, i, -1, t, hh, w});
          double y = val({VarKind::dispatch, m, i, -1, t, hh, w});
          double on = val({VarKind::turn_on, m, i, -1, t, hh, w});
          double off = val({VarKind::turn_off, m, i, -1, t, hh, w});
          if (std::abs(xc - std::round(xc)) > 1e-6)
            flag("fractional commitment" + where(m, t, hh, w));
          if (xc > a + tol)
            flag("unit committed while unavailable" + where(m, t, hh, w));
          if (y > der.p_max * xc + tol || y < der.p_min * xc - tol)
            flag("dispatch outside committed capacity band" +
                 where(m, t, hh, w));
          if (std::abs((on - off) - (xc - prev_x)) > tol)
            flag("start/stop indicators disagree with commitment" +
                 where(m, t, hh, w));
          if (y - prev_y > der.ramp_up + tol)
            flag("ramp-up limit exceeded" + where(m, t, hh, w));
          if (prev_y - y > der.ramp_down + tol)
            flag("ramp-down limit exceeded" + where(m, t, hh, w));
          prev_x = xc;
          prev_y = y;
        }
        // Minimum up and down times, from the committed trace itself.
        std::vector<int> xi(H + 1, 0);
        for (int hh = 1; hh <= H; ++hh)
          xi[hh] = val({VarKind::commit, m, i, -1, t, hh, w}) > 0.5 ? 1 : 0;
        for (int hh = 1; hh <= H; ++hh) {
          if (xi[hh] == 1 && xi[hh - 1] == 0)
            for (int hp = hh + 1; hp <= std::min(H, hh + der.min_up - 1); ++hp)
              if (xi[hp] == 0)
                flag("minimum up time violated" + where(m, t, hp, w));
          if (hh >= 2 && xi[hh] == 0 && xi[hh - 1] == 1)
            for (int hp = hh + 1; hp <= std::min(H, hh + der.min_down - 1);
                 ++hp)
              if (xi[hp] == 1)
                flag("minimum down time violated" + where(m, t, hp, w));
        }
      }

      for (int b = 0; b < int(mg.batteries.size()); ++b) {
        const sys::Battery& bat = mg.batteries[b];
        double soc_prev = bat.soc_min;
        for (int hh = 1; hh <= H; ++hh) {
          double ch = val({VarKind::charge, m, b, -1, t, hh, w});
          double dch = val({VarKind::discharge, m, b, -1, t, hh, w});
          double pch = val({VarKind::charge_flag, m, b, -1, t, hh, w});
          double pdch = val({VarKind::discharge_flag, m, b, -1, t, hh, w});
          double soc = val({VarKind::soc, m, b, -1, t, hh, w});
          if (pch + pdch > 1.0 + tol)
            flag("battery charges and discharges at once" + where(m, t, hh, w));
          if (ch > bat.charge_max * pch + tol)
            flag("charging above gated capacity" + where(m, t, hh, w));
          if (dch > bat.discharge_max * pdch + tol)
            flag("discharging above gated capacity" + where(m, t, hh, w));
          double expect =
              soc_prev + bat.efficiency * ch - dch / bat.efficiency;
          if (std::abs(soc - expect) > tol)
            flag("state of charge breaks the energy recursion" +
                 where(m, t, hh, w));
          if (soc < bat.soc_min - tol || soc > bat.soc_max + tol)
            flag("state of charge outside its band" + where(m, t, hh, w));
          soc_prev = soc;
        }
        if (std::abs(soc_prev - bat.soc_min) > tol)
          flag("battery does not return to its boundary level at week end" +
               where(m, t, H, w));
      }
    }

    // Every trade must have a matching counterparty in power and direction.
    for (const auto& link : system.mg_links) {
      int m = system.mg_index(link.from), l = system.mg_index(link.to);
      for (int hh = 1; hh <= H; ++hh) {
        double ub = val({VarKind::link_buy, m, -1, l, t, hh, w});
        double us_peer = val({VarKind::link_sell, l, -1, m, t, hh, w});
        if (std::abs(ub - us_peer) > tol)
          flag("trade quantities unpaired between mg " + std::to_string(m) +
               " and mg " + std::to_string(l) + where(m, t, hh, w));
        double yb = val({VarKind::link_buy_flag, m, -1, l, t, hh, w});
        double ys = val({VarKind::link_sell_flag, m, -1, l, t, hh, w});
        double ys_peer = val({VarKind::link_sell_flag, l, -1, m, t, hh, w});
        if (std::abs(yb - ys_peer) > tol)
          flag("trade direction flags unpaired" + where(m, t, hh, w));
        if (yb + ys > 1.0 + tol)
          flag("mg both buys from and sells to the same peer" +
               where(m, t, hh, w));
        if (ub > link.buy_cap * yb + tol)
          flag("trade above gated line capacity" + where(m, t, hh, w));
        if (conn == sys::Connectivity::islanded && ub > tol)
          flag("trade while islanded" + where(m, t, hh, w));
      }
    }
  }
  return issues;
}

// Availability of every DER per week implied by a schedule (1 available).
inline std::vector<std::vector<std::vector<double>>> availability_by_week(
    const sys::MMGSystem& system, const MaintenancePlan& plan,
    const sys::MaintenanceSchedule& schedule) {
  detail::TaskLookup tasks(plan);
  auto values = first_stage_values(system, plan, schedule);
  int T = system.horizon_weeks;
  std::vector<std::vector<std::vector<double>>> avail(T + 1);
  for (int t = 1; t <= T; ++t) {
    avail[t].resize(system.num_mgs());
    for (int m = 0; m < system.num_mgs(); ++m) {
      const auto& mg = system.microgrids[m];
      avail[t][m].resize(mg.ders.size());
      for (int i = 0; i < int(mg.ders.size()); ++i) {
        auto expr = detail::availability_expr(tasks, m, i, mg.ders[i].status,
                                              t, T);
        double v = expr.constant;
        for (const auto& [key, coef] : expr.terms) v += coef * values.at(key);
        avail[t][m][i] = v;
      }
    }
  }
  return avail;
}

}  // namespace sdiom::model
