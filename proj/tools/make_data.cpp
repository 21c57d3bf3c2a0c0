// Regenerates the bundled instances under data/.  Every input is seeded and
// every writer uses shortest round-trip number formatting, so rerunning the
// tool reproduces the committed files byte for byte.
//
// Usage: sdiom_make_data [data-dir]

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sdiom/error.hpp"
#include "sdiom/evaluation.hpp"
#include "sdiom/formulation.hpp"
#include "sdiom/io.hpp"
#include "sdiom/lshaped.hpp"
#include "sdiom/prognostics.hpp"
#include "sdiom/scenario_gen.hpp"
#include "sdiom/system.hpp"

using namespace sdiom;

namespace {

sys::Der conventional(const std::string& id, double p_min, double p_max,
                      double marginal, double floor_) {
  sys::Der d;
  d.id = id;
  d.kind = sys::DerKind::conventional;
  d.p_min = p_min;
  d.p_max = p_max;
  d.ramp_up = p_max;
  d.ramp_down = p_max;
  d.no_load_cost = 2.0;
  d.marginal_cost = marginal;
  d.start_cost = 10.0;
  d.stop_cost = 5.0;
  d.reliability_floor = floor_;
  return d;
}

sys::Der wind(const std::string& id, double rated) {
  sys::Der d;
  d.id = id;
  d.kind = sys::DerKind::wind;
  d.rated_mw = rated;
  return d;
}

// A tracked unit: the model plus the sensor history up to the given age,
// sampled from a seeded truth signal.  The truth must not fail before the
// observation window ends, otherwise the record would describe a dead unit.
prognostics::DegradationRecord tracked(const prognostics::DegradationModel& m,
                                       std::uint64_t seed, int age) {
  auto truth = prognostics::simulate_signal(m, seed, age + 8);
  require(truth.failure_week == 0 || truth.failure_week > age, "bad-age",
          "truth signal fails inside the observation window");
  prognostics::DegradationRecord rec;
  rec.model = m;
  rec.age_weeks = age;
  for (int k = 1; k <= age; ++k)
    rec.observations.push_back({k, truth.signal[k]});
  return rec;
}

// Master binaries the plan induces: one per candidate PM week, one per
// candidate CM week, one crew indicator per week for each hosting microgrid.
int first_stage_binaries(const sys::MMGSystem& system,
                         const model::MaintenancePlan& plan) {
  int n = 0;
  for (const auto& t : plan.pm) n += t.window_hi - t.window_lo + 1;
  n += int(plan.cm.size()) * system.horizon_weeks;
  std::vector<bool> hosts(system.num_mgs(), false);
  for (const auto& t : plan.pm) hosts[std::size_t(t.mg)] = true;
  for (const auto& t : plan.cm) hosts[std::size_t(t.mg)] = true;
  for (bool h : hosts)
    if (h) n += system.horizon_weeks;
  return n;
}

void save_instance(const std::string& dir, const sys::MMGSystem& system,
                   const sys::ScenarioSet& scen,
                   const prognostics::DegradationLibrary& lib) {
  std::filesystem::create_directories(dir);
  io::save_system(dir + "/system.json", system);
  io::save_scenarios(dir + "/scenarios.csv", scen);
  io::save_degradation(dir + "/degradation.json", lib);
}

void report(const std::string& name, const sys::MMGSystem& system,
            const model::MaintenancePlan& plan) {
  int n = first_stage_binaries(system, plan);
  require(n <= 12, "internal",
          name + " exceeds the small-instance binary budget");
  std::cout << name << ": " << system.num_mgs() << " microgrids, "
            << system.horizon_weeks << " weeks, " << plan.pm.size()
            << " PM tasks, " << plan.cm.size() << " CM tasks, " << n
            << " first-stage binaries\n";
}

// Single microgrid, one tracked generator close to its failure threshold.
// The two-week replacement window keeps the master tiny.
void make_oracle_a(const std::string& dir) {
  sys::MMGSystem system;
  sys::Microgrid mg;
  mg.id = "mg1";
  mg.ders.push_back(conventional("g1", 0.2, 2.0, 25.0, 0.9));
  mg.ders[0].cm_duration = 1;
  mg.grid_buy_limit = 5.0;
  mg.grid_sell_limit = 2.0;
  mg.crew_cost = 40.0;
  system.microgrids.push_back(mg);
  system.horizon_weeks = 3;
  system.hours_per_week = 4;

  prognostics::DegradationModel m;
  m.prior_mean = 1.0;
  m.prior_var = 0.04;
  m.noise_var = 0.09;
  m.threshold = 29.5;
  m.pm_cost = 40.0;
  m.cm_cost = 120.0;
  prognostics::DegradationLibrary lib;
  lib["g1"] = tracked(m, 9001, 28);

  sys::GeneratorSpec spec;
  spec.num_scenarios = 2;
  spec.mg = {{0.8, 0.5, 0.05}};
  spec.price_noise = 2.0;
  sys::ScenarioSet scen = sys::generate_scenarios(system, spec, 101);

  save_instance(dir, system, scen, lib);
  auto plan = model::make_plan(system, lib, system.horizon_weeks);
  require(plan.pm.size() == 1 && plan.pm[0].window_hi == 2, "internal",
          "oracle-a window drifted");
  report("oracle-a", system, plan);
}

// Two linked microgrids; the second unit's deadline falls beyond the
// horizon, so its replacement window spans every week.
void make_oracle_b(const std::string& dir) {
  sys::MMGSystem system;
  sys::Microgrid mg1;
  mg1.id = "mg1";
  mg1.ders.push_back(conventional("g1", 0.2, 2.0, 25.0, 0.9));
  mg1.ders[0].cm_duration = 1;
  mg1.grid_buy_limit = 4.0;
  mg1.grid_sell_limit = 1.5;
  mg1.crew_cost = 35.0;
  sys::Microgrid mg2;
  mg2.id = "mg2";
  mg2.ders.push_back(conventional("g2", 0.1, 1.5, 35.0, 0.85));
  mg2.ders.push_back(wind("w2", 1.0));
  mg2.grid_buy_limit = 3.0;
  mg2.grid_sell_limit = 1.0;
  mg2.crew_cost = 30.0;
  system.microgrids = {mg1, mg2};
  system.mg_links = {{"mg1", "mg2", 1.5, 1.5}, {"mg2", "mg1", 1.5, 1.5}};
  system.loss_fraction = 0.05;
  system.horizon_weeks = 3;
  system.hours_per_week = 4;

  prognostics::DegradationModel near_failure;
  near_failure.prior_mean = 1.0;
  near_failure.prior_var = 0.04;
  near_failure.noise_var = 0.09;
  near_failure.threshold = 29.5;
  near_failure.pm_cost = 40.0;
  near_failure.cm_cost = 120.0;
  prognostics::DegradationModel healthy = near_failure;
  healthy.threshold = 40.0;
  healthy.pm_cost = 35.0;
  healthy.cm_cost = 110.0;
  prognostics::DegradationLibrary lib;
  lib["g1"] = tracked(near_failure, 9002, 40);  // posterior crossing near 42
  lib["g2"] = tracked(healthy, 9003, 25);       // truth crosses at week 48

  sys::GeneratorSpec spec;
  spec.num_scenarios = 2;
  spec.mg = {{0.9, 0.6, 0.05}, {0.7, 0.4, 0.05}};
  spec.price_noise = 2.0;
  sys::ScenarioSet scen = sys::generate_scenarios(system, spec, 202);

  save_instance(dir, system, scen, lib);
  auto plan = model::make_plan(system, lib, system.horizon_weeks);
  require(plan.pm.size() == 2 && plan.pm[0].window_hi == 2 &&
              plan.pm[1].window_hi == 3,
          "internal", "oracle-b windows drifted");
  report("oracle-b", system, plan);
}

// Storage-equipped microgrid with a failed generator awaiting repair; the
// battery makes this the storage-sweep instance.
void make_oracle_c(const std::string& dir) {
  sys::MMGSystem system;
  sys::Microgrid mg;
  mg.id = "mg1";
  mg.ders.push_back(conventional("g1", 0.2, 2.5, 28.0, 0.9));
  mg.ders[0].status = sys::DerStatus::failed;
  mg.ders.push_back(wind("w1", 1.2));
  sys::Battery b;
  b.id = "b1";
  b.soc_min = 0.2;
  b.soc_max = 2.0;
  b.charge_max = 0.8;
  b.discharge_max = 0.8;
  b.efficiency = 0.95;
  mg.batteries.push_back(b);
  mg.grid_buy_limit = 5.0;
  mg.grid_sell_limit = 2.0;
  mg.crew_cost = 45.0;
  system.microgrids.push_back(mg);
  system.horizon_weeks = 4;
  system.hours_per_week = 6;

  prognostics::DegradationModel m;
  m.prior_mean = 1.0;
  m.prior_var = 0.04;
  m.noise_var = 0.09;
  m.threshold = 30.0;
  m.pm_cost = 40.0;
  m.cm_cost = 120.0;
  prognostics::DegradationLibrary lib;
  lib["g1"].model = m;
  lib["g1"].age_weeks = 30;

  sys::GeneratorSpec spec;
  spec.num_scenarios = 3;
  spec.mg = {{1.0, 0.7, 0.05}};
  spec.price_noise = 2.0;
  sys::ScenarioSet scen = sys::generate_scenarios(system, spec, 303);

  save_instance(dir, system, scen, lib);
  auto plan = model::make_plan(system, lib, system.horizon_weeks);
  require(plan.cm.size() == 1 && plan.pm.empty(), "internal",
          "oracle-c plan drifted");
  report("oracle-c", system, plan);
}

// Rolling-horizon fleet: one tracked generator per microgrid.  Lifetimes
// centre near sixty weeks with enough spread that a calendar policy
// replacing at 48-52 weeks both wastes residual life and still misses the
// short-lived tail.  Replacement costs dwarf crew and dispatch margins, so
// week placement follows the degradation economics: the cost rate falls
// while a unit stays healthy, which slides its replacement past the frozen
// weeks until the deadline approaches.
void make_fleet(const std::string& dir) {
  sys::MMGSystem system;
  sys::Microgrid mg1;
  mg1.id = "mg1";
  mg1.ders.push_back(conventional("g1", 0.2, 2.0, 25.0, 0.9));
  mg1.ders.push_back(wind("w1", 1.2));
  mg1.grid_buy_limit = 6.0;
  mg1.grid_sell_limit = 2.0;
  mg1.crew_cost = 5.0;
  sys::Microgrid mg2;
  mg2.id = "mg2";
  mg2.ders.push_back(conventional("g2", 0.2, 1.8, 27.0, 0.9));
  mg2.ders.push_back(wind("w2", 1.0));
  mg2.grid_buy_limit = 6.0;
  mg2.grid_sell_limit = 2.0;
  mg2.crew_cost = 5.0;
  system.microgrids = {mg1, mg2};
  system.mg_links = {{"mg1", "mg2", 1.0, 1.0}, {"mg2", "mg1", 1.0, 1.0}};
  system.loss_fraction = 0.04;
  system.horizon_weeks = 12;
  system.hours_per_week = 4;

  prognostics::DegradationModel slow;
  slow.prior_mean = 1.0;
  slow.prior_var = 0.09;
  slow.noise_var = 0.25;
  slow.threshold = 60.0;
  slow.pm_cost = 1000.0;
  slow.cm_cost = 3000.0;
  prognostics::DegradationModel fast;
  fast.prior_mean = 0.75;
  fast.prior_var = 0.050625;
  fast.noise_var = 0.16;
  fast.threshold = 45.0;
  fast.pm_cost = 900.0;
  fast.cm_cost = 2700.0;
  prognostics::DegradationLibrary lib;
  lib["g1"].model = slow;
  lib["g2"].model = fast;

  sys::GeneratorSpec spec;
  spec.num_scenarios = 2;
  spec.mg = {{0.9, 0.6, 0.05}, {0.8, 0.5, 0.05}};
  spec.price_buy_base = 30.0;
  spec.price_noise = 0.5;

  std::filesystem::create_directories(dir);
  io::save_system(dir + "/system.json", system);
  io::save_degradation(dir + "/degradation.json", lib);
  io::save_generator(dir + "/generator.json", spec);
  require(sys::validate(system).empty(), "internal", "fleet system invalid");
  std::cout << "fleet: " << system.num_mgs() << " microgrids, "
            << lib.size() << " tracked units\n";
}

// Disruption-study instance.  Two tracked units are due for replacement
// inside the horizon under either policy.  A third unit is old by the
// calendar but degrading slowly, so the sensor-driven plan keeps it running
// while the periodic policy takes an extra outage week and with it extra
// disruption exposure.
void make_resilience(const std::string& dir) {
  sys::MMGSystem system;
  sys::Microgrid mg1;
  mg1.id = "mg1";
  mg1.ders.push_back(conventional("g1", 0.2, 2.0, 26.0, 0.9));
  mg1.ders.push_back(conventional("g3", 0.1, 1.0, 29.0, 0.9));
  sys::Battery b;
  b.id = "b1";
  b.soc_min = 0.1;
  b.soc_max = 0.8;
  b.charge_max = 0.4;
  b.discharge_max = 0.4;
  b.efficiency = 0.95;
  mg1.batteries.push_back(b);
  mg1.grid_buy_limit = 4.0;
  mg1.grid_sell_limit = 1.5;
  mg1.crew_cost = 40.0;
  sys::Microgrid mg2;
  mg2.id = "mg2";
  mg2.ders.push_back(conventional("g2", 0.2, 1.8, 30.0, 0.9));
  mg2.ders.push_back(wind("w2", 1.0));
  mg2.grid_buy_limit = 3.0;
  mg2.grid_sell_limit = 1.0;
  mg2.crew_cost = 35.0;
  system.microgrids = {mg1, mg2};
  system.mg_links = {{"mg1", "mg2", 0.7, 0.7}, {"mg2", "mg1", 0.7, 0.7}};
  system.loss_fraction = 0.05;
  system.horizon_weeks = 6;
  system.hours_per_week = 4;

  prognostics::DegradationModel m1;
  m1.prior_mean = 1.0;
  m1.prior_var = 0.04;
  m1.noise_var = 0.09;
  m1.threshold = 49.0;
  m1.pm_cost = 40.0;
  m1.cm_cost = 120.0;
  prognostics::DegradationModel m2 = m1;
  m2.threshold = 52.5;
  m2.pm_cost = 38.0;
  m2.cm_cost = 115.0;
  prognostics::DegradationLibrary lib;
  lib["g1"] = tracked(m1, 9004, 45);
  lib["g2"] = tracked(m2, 9005, 47);

  sys::GeneratorSpec spec;
  spec.num_scenarios = 2;
  spec.mg = {{0.9, 0.6, 0.05}, {0.8, 0.5, 0.05}};
  spec.price_noise = 2.0;
  sys::ScenarioSet scen = sys::generate_scenarios(system, spec, 404);

  save_instance(dir, system, scen, lib);

  auto plan = model::make_plan(system, lib, system.horizon_weeks);
  require(plan.pm.size() == 2, "internal", "resilience plan drifted");
  lshaped::SolveOptions opts;
  lshaped::SolveResult res = lshaped::run_lshaped(system, scen, plan, opts);
  require(res.state.inner_converged, "internal",
          "resilience instance did not converge");
  std::filesystem::create_directories(dir + "/sdiom");
  io::detail::write_file(dir + "/sdiom/schedule.csv",
                         io::write_schedule_csv(res.schedule));
  io::detail::write_file(dir + "/sdiom/crew.csv",
                         io::write_crew_csv(res.schedule));

  std::map<std::string, int> ages = {{"g1", 45}, {"g2", 47}, {"g3", 48}};
  sys::MaintenanceSchedule periodic = eval::periodic_schedule(system, ages);
  require(!periodic.pm_week.empty(), "internal", "periodic schedule empty");
  std::filesystem::create_directories(dir + "/periodic");
  io::detail::write_file(dir + "/periodic/schedule.csv",
                         io::write_schedule_csv(periodic));
  io::detail::write_file(dir + "/periodic/crew.csv",
                         io::write_crew_csv(periodic));

  std::cout << "resilience: schedules for " << plan.pm.size()
            << " tracked units (objective "
            << io::detail::fmt(res.objective) << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::string root = argc > 1 ? argv[1] : "data";
  try {
    make_oracle_a(root + "/oracle-a");
    make_oracle_b(root + "/oracle-b");
    make_oracle_c(root + "/oracle-c");
    make_fleet(root + "/fleet");
    make_resilience(root + "/resilience");
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
