#pragma once

// Multi-microgrid data model: topology, DER fleet, batteries, links, limits
// and cost parameters, plus the validation pass that turns malformed input
// into machine-readable violation codes instead of exceptions.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sdiom/error.hpp"

namespace sdiom::sys {

enum class DerKind { wind, solar, conventional };

inline bool is_renewable(DerKind k) { return k != DerKind::conventional; }

inline const char* to_string(DerKind k) {
  switch (k) {
    case DerKind::wind: return "wind";
    case DerKind::solar: return "solar";
    case DerKind::conventional: return "conventional";
  }
  return "?";
}

inline DerKind der_kind_from(const std::string& s) {
  if (s == "wind") return DerKind::wind;
  if (s == "solar") return DerKind::solar;
  if (s == "conventional") return DerKind::conventional;
  fail("bad-der-kind", "unknown DER kind '" + s + "'");
}

enum class DerStatus { operational, failed };

struct Der {
  std::string id;
  DerKind kind = DerKind::conventional;
  DerStatus status = DerStatus::operational;
  int pm_duration = 1;  // weeks offline for preventive work
  int cm_duration = 2;  // weeks offline for repair after failure
  double rated_mw = 0.0;  // renewables: nameplate scaling the capacity profile

  // Conventional units only.
  double p_max = 0.0, p_min = 0.0;        // MW
  double ramp_up = 0.0, ramp_down = 0.0;  // MW per hour
  int min_up = 1, min_down = 1;           // hours
  double no_load_cost = 0.0;              // currency per committed hour
  double marginal_cost = 0.0;             // currency per MWh
  double start_cost = 0.0, stop_cost = 0.0;

  double reliability_floor = 0.0;  // PM must happen before survival drops below
};

struct Battery {
  std::string id;
  double soc_min = 0.0, soc_max = 0.0;        // MWh
  double charge_max = 0.0, discharge_max = 0.0;  // MW
  double efficiency = 1.0;                    // round-trip split on both legs
};

struct Microgrid {
  std::string id;
  std::vector<Der> ders;
  std::vector<Battery> batteries;
  double grid_buy_limit = 0.0, grid_sell_limit = 0.0;  // MW, 0 disables
  double crew_cost = 0.0;  // per maintenance-crew visit
};

// Directed trade allowance between two microgrids: caps on what `from` may
// purchase from / sell to `to`.  The validator requires the reverse entry to
// exist so the adjacency is symmetric as a graph.
struct MgLink {
  std::string from, to;
  double buy_cap = 0.0;   // MW
  double sell_cap = 0.0;  // MW
};

struct MMGSystem {
  std::vector<Microgrid> microgrids;
  std::vector<MgLink> mg_links;
  double loss_fraction = 0.0;  // share of transferred power lost in transit
  int horizon_weeks = 0;
  int hours_per_week = 24;  // 24 models a representative day; 168 a full week

  int num_mgs() const { return int(microgrids.size()); }

  int mg_index(const std::string& id) const {
    for (int m = 0; m < num_mgs(); ++m)
      if (microgrids[m].id == id) return m;
    return -1;
  }
};

// Canonical renewable ordering shared by scenarios and the formulation:
// microgrids in declaration order, DERs in declaration order within each.
struct RenewableRef {
  int mg = 0;
  int der = 0;  // index within microgrids[mg].ders
  std::string id;
};

inline std::vector<RenewableRef> renewable_order(const MMGSystem& system) {
  std::vector<RenewableRef> out;
  for (int m = 0; m < system.num_mgs(); ++m) {
    const auto& mg = system.microgrids[m];
    for (int i = 0; i < int(mg.ders.size()); ++i)
      if (is_renewable(mg.ders[i].kind))
        out.push_back({m, i, mg.ders[i].id});
  }
  return out;
}

enum class Connectivity { grid_connected, locally_connected, islanded };

inline const char* to_string(Connectivity c) {
  switch (c) {
    case Connectivity::grid_connected: return "grid-connected";
    case Connectivity::locally_connected: return "locally-connected";
    case Connectivity::islanded: return "islanded";
  }
  return "?";
}

inline Connectivity connectivity_from(const std::string& s) {
  if (s == "grid-connected") return Connectivity::grid_connected;
  if (s == "locally-connected") return Connectivity::locally_connected;
  if (s == "islanded") return Connectivity::islanded;
  fail("bad-connectivity", "unknown connectivity mode '" + s + "'");
}

// One stochastic realization of loads, renewable capacity and prices.  All
// arrays are flat; index through ScenarioSet to keep layouts consistent.
struct Scenario {
  double probability = 0.0;
  std::vector<double> crit_load, noncrit_load;  // (mg, week, hour), MW
  std::vector<double> price_buy, price_sell;    // (mg, week, hour), currency/MWh
  std::vector<double> renewable_cap;            // (renewable, week, hour), MW
};

struct ScenarioSet {
  int num_mgs = 0;
  int weeks = 0;
  int hours = 0;
  std::vector<std::string> renewable_ids;  // canonical renewable order
  std::vector<Scenario> scenarios;
  std::vector<Connectivity> connectivity;        // per week
  std::vector<double> crit_penalty;              // per MG, currency/MWh
  std::vector<double> noncrit_penalty;           // per MG, currency/MWh

  int num_scenarios() const { return int(scenarios.size()); }
  int num_renewables() const { return int(renewable_ids.size()); }

  // Weeks and scenario ids are 1-based externally; hours run 1..hours.
  std::size_t idx(int mg, int week, int hour) const {
    return (std::size_t(mg) * weeks + (week - 1)) * hours + (hour - 1);
  }
  std::size_t ridx(int renewable, int week, int hour) const {
    return (std::size_t(renewable) * weeks + (week - 1)) * hours + (hour - 1);
  }

  std::size_t mg_cells() const { return std::size_t(num_mgs) * weeks * hours; }
  std::size_t renewable_cells() const {
    return std::size_t(num_renewables()) * weeks * hours;
  }
};

struct Violation {
  std::string code;    // stable machine-readable identifier
  std::string detail;  // human-oriented elaboration
};

namespace detail {

inline void check_nonneg(std::vector<Violation>& out, double v,
                         const std::string& code, const std::string& what) {
  if (!(v >= 0.0) || std::isnan(v))
    out.push_back({code, what + " must be nonnegative, got " +
                             std::to_string(v)});
}

}  // namespace detail

// Structural validation; returns every violation rather than stopping at the
// first so callers can report a complete list.
inline std::vector<Violation> validate(const MMGSystem& system) {
  std::vector<Violation> out;
  if (system.horizon_weeks < 1)
    out.push_back({"horizon-positive", "horizon must be at least one week"});
  if (system.hours_per_week < 1)
    out.push_back({"hours-positive", "hours per week must be positive"});
  if (!(system.loss_fraction >= 0.0 && system.loss_fraction < 1.0))
    out.push_back({"loss-fraction-range", "loss fraction must lie in [0,1)"});

  std::map<std::string, int> mg_seen;
  std::map<std::string, int> der_seen;
  for (const auto& mg : system.microgrids) {
    if (++mg_seen[mg.id] == 2)
      out.push_back({"duplicate-id", "microgrid id '" + mg.id + "' repeats"});
    detail::check_nonneg(out, mg.grid_buy_limit, "bad-limit-negative",
                         "grid buy limit of " + mg.id);
    detail::check_nonneg(out, mg.grid_sell_limit, "bad-limit-negative",
                         "grid sell limit of " + mg.id);
    detail::check_nonneg(out, mg.crew_cost, "bad-limit-negative",
                         "crew cost of " + mg.id);
    for (const auto& der : mg.ders) {
      if (++der_seen[der.id] == 2)
        out.push_back({"duplicate-id", "DER id '" + der.id + "' repeats"});
      if (der.pm_duration < 1 || der.cm_duration < 1)
        out.push_back({"bad-duration",
                       "maintenance durations of " + der.id +
                           " must be at least one week"});
      if (der.kind == DerKind::conventional) {
        if (der.p_min > der.p_max)
          out.push_back({"bounds-order", "p_min above p_max on " + der.id});
        if (der.min_up < 1 || der.min_down < 1)
          out.push_back({"min-updown-range",
                         "min up/down of " + der.id + " must be >= 1 hour"});
        detail::check_nonneg(out, der.ramp_up, "bad-limit-negative",
                             "ramp-up of " + der.id);
        detail::check_nonneg(out, der.ramp_down, "bad-limit-negative",
                             "ramp-down of " + der.id);
      } else if (der.rated_mw < 0.0) {
        out.push_back({"bad-limit-negative",
                       "rated capacity of " + der.id + " is negative"});
      }
      if (der.reliability_floor < 0.0 || der.reliability_floor > 1.0)
        out.push_back({"reliability-range",
                       "reliability floor of " + der.id + " outside [0,1]"});
    }
    for (const auto& bat : mg.batteries) {
      if (++der_seen[bat.id] == 2)
        out.push_back({"duplicate-id", "battery id '" + bat.id + "' repeats"});
      if (bat.soc_min > bat.soc_max)
        out.push_back({"battery-soc-order", "soc_min above soc_max on " + bat.id});
      if (!(bat.efficiency > 0.0 && bat.efficiency <= 1.0))
        out.push_back({"battery-eff-range",
                       "efficiency of " + bat.id + " outside (0,1]"});
      detail::check_nonneg(out, bat.charge_max, "bad-limit-negative",
                           "charge cap of " + bat.id);
      detail::check_nonneg(out, bat.discharge_max, "bad-limit-negative",
                           "discharge cap of " + bat.id);
      detail::check_nonneg(out, bat.soc_min, "bad-limit-negative",
                           "soc_min of " + bat.id);
    }
  }

  std::map<std::pair<std::string, std::string>, int> links;
  for (const auto& link : system.mg_links) {
    if (system.mg_index(link.from) < 0 || system.mg_index(link.to) < 0) {
      out.push_back({"unknown-link-mg",
                     "link " + link.from + "->" + link.to +
                         " references an unknown microgrid"});
      continue;
    }
    if (link.from == link.to)
      out.push_back({"self-link", "microgrid " + link.from + " linked to itself"});
    if (++links[{link.from, link.to}] == 2)
      out.push_back({"duplicate-link",
                     "link " + link.from + "->" + link.to + " repeats"});
    detail::check_nonneg(out, link.buy_cap, "bad-limit-negative",
                         "buy cap " + link.from + "->" + link.to);
    detail::check_nonneg(out, link.sell_cap, "bad-limit-negative",
                         "sell cap " + link.from + "->" + link.to);
  }
  for (const auto& [key, count] : links) {
    (void)count;
    if (!links.count({key.second, key.first}))
      out.push_back({"topology-asymmetric",
                     "link " + key.first + "->" + key.second +
                         " has no reverse entry"});
  }
  return out;
}

inline std::vector<Violation> validate(const MMGSystem& system,
                                       const ScenarioSet& scen) {
  std::vector<Violation> out = validate(system);

  if (scen.num_mgs != system.num_mgs() || scen.weeks != system.horizon_weeks ||
      scen.hours != system.hours_per_week)
    out.push_back({"scenario-shape",
                   "scenario dimensions do not match the system"});
  auto order = renewable_order(system);
  if (int(order.size()) != scen.num_renewables()) {
    out.push_back({"scenario-shape", "renewable count mismatch"});
  } else {
    for (std::size_t r = 0; r < order.size(); ++r)
      if (order[r].id != scen.renewable_ids[r]) {
        out.push_back({"scenario-shape", "renewable order mismatch at '" +
                                             scen.renewable_ids[r] + "'"});
        break;
      }
  }
  if (int(scen.connectivity.size()) != scen.weeks)
    out.push_back({"connectivity-shape", "connectivity must cover every week"});
  if (int(scen.crit_penalty.size()) != scen.num_mgs ||
      int(scen.noncrit_penalty.size()) != scen.num_mgs)
    out.push_back({"penalty-shape", "penalties must cover every microgrid"});

  double psum = 0.0;
  for (const auto& s : scen.scenarios) {
    psum += s.probability;
    if (s.probability < 0.0)
      out.push_back({"scenario-prob-negative", "negative scenario probability"});
    if (s.crit_load.size() != scen.mg_cells() ||
        s.noncrit_load.size() != scen.mg_cells() ||
        s.price_buy.size() != scen.mg_cells() ||
        s.price_sell.size() != scen.mg_cells() ||
        s.renewable_cap.size() != scen.renewable_cells()) {
      out.push_back({"scenario-shape", "scenario array sizes are inconsistent"});
      continue;
    }
    auto scan = [&](const std::vector<double>& v, const char* what) {
      for (double x : v)
        if (x < 0.0 || std::isnan(x)) {
          out.push_back({"negative-scenario-data",
                         std::string(what) + " contains a negative entry"});
          return;
        }
      };
    scan(s.crit_load, "critical load");
    scan(s.noncrit_load, "non-critical load");
    scan(s.price_buy, "purchase price");
    scan(s.price_sell, "sale price");
    scan(s.renewable_cap, "renewable capacity");
  }
  if (scen.num_scenarios() == 0)
    out.push_back({"scenario-empty", "at least one scenario is required"});
  else if (std::abs(psum - 1.0) > 1e-9)
    out.push_back({"scenario-prob-sum",
                   "probabilities sum to " + std::to_string(psum)});

  for (std::size_t m = 0;
       m < scen.crit_penalty.size() && m < scen.noncrit_penalty.size(); ++m)
    if (!(scen.crit_penalty[m] > scen.noncrit_penalty[m]))
      out.push_back({"penalty-order",
                     "critical curtailment penalty must exceed non-critical"});
  return out;
}

// Applies a disruption mode to a span of weeks; the formulation later turns
// the mode into zero upper bounds on the affected trade variables.
inline void set_connectivity(ScenarioSet& scen, const std::vector<int>& weeks,
                             Connectivity mode) {
  for (int t : weeks) {
    require(t >= 1 && t <= scen.weeks, "bad-week",
            "connectivity week " + std::to_string(t) + " outside horizon");
    scen.connectivity[t - 1] = mode;
  }
}

// First-stage decisions: PM start weeks, CM start weeks, crew visits.
// Week numbers are 1-based; absence of a key means "not scheduled".
struct MaintenanceSchedule {
  std::map<std::string, int> pm_week;
  std::map<std::string, int> cm_week;
  std::map<std::string, std::vector<int>> crew_weeks;  // mg id -> sorted weeks
};

}  // namespace sdiom::sys
