#pragma once

// File formats: system description as JSON, scenario data as CSV with a
// probability sidecar and a metadata sidecar, degradation library as JSON,
// schedules, solver traces, evaluation reports and resilience tables as CSV.
// Numbers are printed with shortest round-trip formatting so
// serialize -> parse -> serialize is byte-identical.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdiom/error.hpp"
#include "sdiom/evaluation.hpp"
#include "sdiom/lshaped.hpp"
#include "sdiom/prognostics.hpp"
#include "sdiom/scenario_gen.hpp"
#include "sdiom/system.hpp"

namespace sdiom::io {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), "csv-parse",
          std::string("bad number '") + s + "' in " + what);
  return v;
}

inline long parse_long(const std::string& s, const char* what) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), "csv-parse",
          std::string("bad integer '") + s + "' in " + what);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline void check_id(const std::string& id) {
  require(!id.empty(), "bad-id", "empty identifier");
  for (char ch : id)
    require(ch != ',' && ch != '\n' && ch != '"', "bad-id",
            "identifier '" + id + "' contains a reserved character");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), "io-open", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(bool(out), "io-open", "cannot write '" + path + "'");
  out << content;
  require(bool(out), "io-write", "short write to '" + path + "'");
}

}  // namespace detail

// ---- system JSON -----------------------------------------------------------

inline json system_to_json(const sys::MMGSystem& system) {
  json root;
  root["horizon_weeks"] = system.horizon_weeks;
  root["hours_per_week"] = system.hours_per_week;
  root["loss_fraction"] = system.loss_fraction;
  root["microgrids"] = json::array();
  for (const auto& mg : system.microgrids) {
    detail::check_id(mg.id);
    json jm;
    jm["id"] = mg.id;
    jm["grid_buy_limit"] = mg.grid_buy_limit;
    jm["grid_sell_limit"] = mg.grid_sell_limit;
    jm["crew_cost"] = mg.crew_cost;
    jm["ders"] = json::array();
    for (const auto& der : mg.ders) {
      detail::check_id(der.id);
      json jd;
      jd["id"] = der.id;
      jd["kind"] = sys::to_string(der.kind);
      jd["status"] =
          der.status == sys::DerStatus::failed ? "failed" : "operational";
      jd["pm_duration"] = der.pm_duration;
      jd["cm_duration"] = der.cm_duration;
      if (sys::is_renewable(der.kind)) {
        jd["rated_mw"] = der.rated_mw;
      } else {
        jd["p_max"] = der.p_max;
        jd["p_min"] = der.p_min;
        jd["ramp_up"] = der.ramp_up;
        jd["ramp_down"] = der.ramp_down;
        jd["min_up"] = der.min_up;
        jd["min_down"] = der.min_down;
        jd["no_load_cost"] = der.no_load_cost;
        jd["marginal_cost"] = der.marginal_cost;
        jd["start_cost"] = der.start_cost;
        jd["stop_cost"] = der.stop_cost;
      }
      jd["reliability_floor"] = der.reliability_floor;
      jm["ders"].push_back(std::move(jd));
    }
    jm["batteries"] = json::array();
    for (const auto& bat : mg.batteries) {
      detail::check_id(bat.id);
      json jb;
      jb["id"] = bat.id;
      jb["soc_min"] = bat.soc_min;
      jb["soc_max"] = bat.soc_max;
      jb["charge_max"] = bat.charge_max;
      jb["discharge_max"] = bat.discharge_max;
      jb["efficiency"] = bat.efficiency;
      jm["batteries"].push_back(std::move(jb));
    }
    root["microgrids"].push_back(std::move(jm));
  }
  root["mg_links"] = json::array();
  for (const auto& link : system.mg_links) {
    json jl;
    jl["from"] = link.from;
    jl["to"] = link.to;
    jl["buy_cap"] = link.buy_cap;
    jl["sell_cap"] = link.sell_cap;
    root["mg_links"].push_back(std::move(jl));
  }
  return root;
}

inline sys::MMGSystem system_from_json(const json& root) {
  try {
    sys::MMGSystem system;
    system.horizon_weeks = root.at("horizon_weeks").get<int>();
    system.hours_per_week = root.at("hours_per_week").get<int>();
    system.loss_fraction = root.at("loss_fraction").get<double>();
    for (const auto& jm : root.at("microgrids")) {
      sys::Microgrid mg;
      mg.id = jm.at("id").get<std::string>();
      mg.grid_buy_limit = jm.at("grid_buy_limit").get<double>();
      mg.grid_sell_limit = jm.at("grid_sell_limit").get<double>();
      mg.crew_cost = jm.at("crew_cost").get<double>();
      for (const auto& jd : jm.at("ders")) {
        sys::Der der;
        der.id = jd.at("id").get<std::string>();
        der.kind = sys::der_kind_from(jd.at("kind").get<std::string>());
        std::string st = jd.at("status").get<std::string>();
        require(st == "operational" || st == "failed", "system-parse",
                "bad DER status '" + st + "'");
        der.status = st == "failed" ? sys::DerStatus::failed
                                    : sys::DerStatus::operational;
        der.pm_duration = jd.at("pm_duration").get<int>();
        der.cm_duration = jd.at("cm_duration").get<int>();
        if (sys::is_renewable(der.kind)) {
          der.rated_mw = jd.at("rated_mw").get<double>();
        } else {
          der.p_max = jd.at("p_max").get<double>();
          der.p_min = jd.at("p_min").get<double>();
          der.ramp_up = jd.at("ramp_up").get<double>();
          der.ramp_down = jd.at("ramp_down").get<double>();
          der.min_up = jd.at("min_up").get<int>();
          der.min_down = jd.at("min_down").get<int>();
          der.no_load_cost = jd.at("no_load_cost").get<double>();
          der.marginal_cost = jd.at("marginal_cost").get<double>();
          der.start_cost = jd.at("start_cost").get<double>();
          der.stop_cost = jd.at("stop_cost").get<double>();
        }
        der.reliability_floor = jd.at("reliability_floor").get<double>();
        mg.ders.push_back(std::move(der));
      }
      for (const auto& jb : jm.at("batteries")) {
        sys::Battery bat;
        bat.id = jb.at("id").get<std::string>();
        bat.soc_min = jb.at("soc_min").get<double>();
        bat.soc_max = jb.at("soc_max").get<double>();
        bat.charge_max = jb.at("charge_max").get<double>();
        bat.discharge_max = jb.at("discharge_max").get<double>();
        bat.efficiency = jb.at("efficiency").get<double>();
        mg.batteries.push_back(std::move(bat));
      }
      system.microgrids.push_back(std::move(mg));
    }
    for (const auto& jl : root.at("mg_links")) {
      sys::MgLink link;
      link.from = jl.at("from").get<std::string>();
      link.to = jl.at("to").get<std::string>();
      link.buy_cap = jl.at("buy_cap").get<double>();
      link.sell_cap = jl.at("sell_cap").get<double>();
      system.mg_links.push_back(std::move(link));
    }
    return system;
  } catch (const json::exception& e) {
    fail("system-parse", e.what());
  }
}

inline std::string write_system_text(const sys::MMGSystem& system) {
  return system_to_json(system).dump(2) + "\n";
}

inline sys::MMGSystem read_system_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail("system-parse", e.what());
  }
  return system_from_json(root);
}

inline void save_system(const std::string& path, const sys::MMGSystem& system) {
  detail::write_file(path, write_system_text(system));
}

inline sys::MMGSystem load_system(const std::string& path) {
  return read_system_text(detail::read_file(path));
}

// ---- scenario CSV ----------------------------------------------------------
//
// Main file columns: scenario, mg, week, hour, phi_<der id>..., d_crit,
// d_noncrit, price_buy, price_sell.  Renewable capacity is system-wide per
// hour, so its value repeats on each microgrid's row; the reader takes it
// from the first microgrid block.  Sidecars: "<base>.probs.csv" with
// (scenario, probability) rows and "<base>.meta.json" with per-week
// connectivity and per-MG curtailment penalties.

inline std::string write_scenarios_csv(const sys::ScenarioSet& scen) {
  std::string out = "scenario,mg,week,hour";
  for (const auto& id : scen.renewable_ids) {
    detail::check_id(id);
    out += ",phi_" + id;
  }
  out += ",d_crit,d_noncrit,price_buy,price_sell\n";
  for (int w = 0; w < scen.num_scenarios(); ++w) {
    const auto& sc = scen.scenarios[w];
    for (int m = 0; m < scen.num_mgs; ++m)
      for (int t = 1; t <= scen.weeks; ++t)
        for (int h = 1; h <= scen.hours; ++h) {
          out += std::to_string(w + 1) + ',' + std::to_string(m + 1) + ',' +
                 std::to_string(t) + ',' + std::to_string(h);
          for (int r = 0; r < scen.num_renewables(); ++r)
            out += ',' + detail::fmt(sc.renewable_cap[scen.ridx(r, t, h)]);
          std::size_t k = scen.idx(m, t, h);
          out += ',' + detail::fmt(sc.crit_load[k]);
          out += ',' + detail::fmt(sc.noncrit_load[k]);
          out += ',' + detail::fmt(sc.price_buy[k]);
          out += ',' + detail::fmt(sc.price_sell[k]);
          out += '\n';
        }
  }
  return out;
}

inline std::string write_probs_csv(const sys::ScenarioSet& scen) {
  std::string out = "scenario,probability\n";
  for (int w = 0; w < scen.num_scenarios(); ++w)
    out += std::to_string(w + 1) + ',' +
           detail::fmt(scen.scenarios[w].probability) + '\n';
  return out;
}

inline json scenario_meta_to_json(const sys::ScenarioSet& scen) {
  json meta;
  meta["connectivity"] = json::array();
  for (auto c : scen.connectivity)
    meta["connectivity"].push_back(sys::to_string(c));
  meta["crit_penalty"] = scen.crit_penalty;
  meta["noncrit_penalty"] = scen.noncrit_penalty;
  return meta;
}

inline sys::ScenarioSet read_scenarios_csv(const std::string& main_csv,
                                           const std::string& probs_csv,
                                           const std::string& meta_json) {
  sys::ScenarioSet scen;

  std::istringstream in(main_csv);
  std::string line;
  require(bool(std::getline(in, line)), "csv-parse", "empty scenario file");
  auto header = detail::split_csv_line(line);
  require(header.size() >= 8 && header[0] == "scenario" && header[1] == "mg" &&
              header[2] == "week" && header[3] == "hour",
          "csv-parse", "unexpected scenario header");
  std::size_t fixed_tail = 4;  // d_crit, d_noncrit, price_buy, price_sell
  require(header[header.size() - 4] == "d_crit" &&
              header[header.size() - 3] == "d_noncrit" &&
              header[header.size() - 2] == "price_buy" &&
              header[header.size() - 1] == "price_sell",
          "csv-parse", "unexpected scenario header tail");
  for (std::size_t c = 4; c < header.size() - fixed_tail; ++c) {
    require(header[c].rfind("phi_", 0) == 0, "csv-parse",
            "expected phi_ column, got '" + header[c] + "'");
    scen.renewable_ids.push_back(header[c].substr(4));
  }

  struct RawRow {
    int scenario, mg, week, hour;
    std::vector<double> phi;
    double crit, noncrit, buy, sell;
  };
  std::vector<RawRow> rows;
  int max_s = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == header.size(), "csv-parse",
            "scenario row has " + std::to_string(f.size()) + " fields, want " +
                std::to_string(header.size()));
    RawRow r;
    r.scenario = int(detail::parse_long(f[0], "scenario column"));
    r.mg = int(detail::parse_long(f[1], "mg column"));
    r.week = int(detail::parse_long(f[2], "week column"));
    r.hour = int(detail::parse_long(f[3], "hour column"));
    for (std::size_t c = 4; c < f.size() - fixed_tail; ++c)
      r.phi.push_back(detail::parse_double(f[c], "phi column"));
    r.crit = detail::parse_double(f[f.size() - 4], "d_crit");
    r.noncrit = detail::parse_double(f[f.size() - 3], "d_noncrit");
    r.buy = detail::parse_double(f[f.size() - 2], "price_buy");
    r.sell = detail::parse_double(f[f.size() - 1], "price_sell");
    require(r.scenario >= 1 && r.mg >= 1 && r.week >= 1 && r.hour >= 1,
            "csv-parse", "scenario row indices must be 1-based positive");
    scen.num_mgs = std::max(scen.num_mgs, r.mg);
    scen.weeks = std::max(scen.weeks, r.week);
    scen.hours = std::max(scen.hours, r.hour);
    max_s = std::max(max_s, r.scenario);
    rows.push_back(std::move(r));
  }
  require(!rows.empty(), "csv-parse", "scenario file has no data rows");
  require(rows.size() == std::size_t(max_s) * scen.num_mgs * scen.weeks *
                             std::size_t(scen.hours),
          "csv-parse", "scenario grid has missing or duplicate rows");

  scen.scenarios.resize(max_s);
  for (auto& sc : scen.scenarios) {
    sc.crit_load.assign(scen.mg_cells(), 0.0);
    sc.noncrit_load.assign(scen.mg_cells(), 0.0);
    sc.price_buy.assign(scen.mg_cells(), 0.0);
    sc.price_sell.assign(scen.mg_cells(), 0.0);
    sc.renewable_cap.assign(scen.renewable_cells(), 0.0);
  }
  for (const auto& r : rows) {
    auto& sc = scen.scenarios[r.scenario - 1];
    std::size_t k = scen.idx(r.mg - 1, r.week, r.hour);
    sc.crit_load[k] = r.crit;
    sc.noncrit_load[k] = r.noncrit;
    sc.price_buy[k] = r.buy;
    sc.price_sell[k] = r.sell;
    if (r.mg == 1)
      for (int c = 0; c < scen.num_renewables(); ++c)
        sc.renewable_cap[scen.ridx(c, r.week, r.hour)] = r.phi[c];
  }

  // Probability sidecar.
  {
    std::istringstream pin(probs_csv);
    require(bool(std::getline(pin, line)), "csv-parse", "empty probability file");
    require(detail::split_csv_line(line) ==
                std::vector<std::string>({"scenario", "probability"}),
            "csv-parse", "unexpected probability header");
    while (std::getline(pin, line)) {
      if (line.empty()) continue;
      auto f = detail::split_csv_line(line);
      require(f.size() == 2, "csv-parse", "bad probability row");
      int s = int(detail::parse_long(f[0], "probability scenario"));
      require(s >= 1 && s <= max_s, "csv-parse",
              "probability row for unknown scenario");
      scen.scenarios[s - 1].probability =
          detail::parse_double(f[1], "probability");
    }
  }

  // Metadata sidecar; absent content falls back to documented defaults.
  scen.connectivity.assign(scen.weeks, sys::Connectivity::grid_connected);
  scen.crit_penalty.assign(scen.num_mgs, 1000.0);
  scen.noncrit_penalty.assign(scen.num_mgs, 100.0);
  if (!meta_json.empty()) {
    try {
      json meta = json::parse(meta_json);
      if (meta.contains("connectivity")) {
        const auto& arr = meta["connectivity"];
        require(int(arr.size()) == scen.weeks, "csv-parse",
                "connectivity list must cover every week");
        for (int t = 0; t < scen.weeks; ++t)
          scen.connectivity[t] =
              sys::connectivity_from(arr[t].get<std::string>());
      }
      if (meta.contains("crit_penalty"))
        scen.crit_penalty = meta["crit_penalty"].get<std::vector<double>>();
      if (meta.contains("noncrit_penalty"))
        scen.noncrit_penalty =
            meta["noncrit_penalty"].get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail("csv-parse", std::string("scenario metadata: ") + e.what());
    }
  }
  return scen;
}

inline std::string probs_path_for(const std::string& csv_path) {
  std::string base = csv_path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".csv")
    base.resize(base.size() - 4);
  return base + ".probs.csv";
}

inline std::string meta_path_for(const std::string& csv_path) {
  std::string base = csv_path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".csv")
    base.resize(base.size() - 4);
  return base + ".meta.json";
}

inline void save_scenarios(const std::string& csv_path,
                           const sys::ScenarioSet& scen) {
  detail::write_file(csv_path, write_scenarios_csv(scen));
  detail::write_file(probs_path_for(csv_path), write_probs_csv(scen));
  detail::write_file(meta_path_for(csv_path),
                     scenario_meta_to_json(scen).dump(2) + "\n");
}

inline sys::ScenarioSet load_scenarios(const std::string& csv_path) {
  std::string meta;
  if (std::filesystem::exists(meta_path_for(csv_path)))
    meta = detail::read_file(meta_path_for(csv_path));
  return read_scenarios_csv(detail::read_file(csv_path),
                            detail::read_file(probs_path_for(csv_path)), meta);
}

// ---- degradation library JSON ----------------------------------------------

inline json degradation_to_json(const prognostics::DegradationLibrary& lib) {
  json root;
  root["ders"] = json::array();
  for (const auto& [id, rec] : lib) {
    detail::check_id(id);
    json jd;
    jd["id"] = id;
    jd["form"] =
        rec.model.form == prognostics::Form::linear ? "linear" : "exponential";
    jd["kappa"] = rec.model.kappa;
    jd["prior_mean"] = rec.model.prior_mean;
    jd["prior_var"] = rec.model.prior_var;
    jd["noise_var"] = rec.model.noise_var;
    jd["threshold"] = rec.model.threshold;
    jd["pm_cost"] = rec.model.pm_cost;
    jd["cm_cost"] = rec.model.cm_cost;
    jd["age_weeks"] = rec.age_weeks;
    jd["observations"] = json::array();
    for (const auto& [week, value] : rec.observations)
      jd["observations"].push_back(json::array({week, value}));
    root["ders"].push_back(std::move(jd));
  }
  return root;
}

inline prognostics::DegradationLibrary degradation_from_json(const json& root) {
  try {
    prognostics::DegradationLibrary lib;
    for (const auto& jd : root.at("ders")) {
      prognostics::DegradationRecord rec;
      std::string form = jd.at("form").get<std::string>();
      require(form == "linear" || form == "exponential", "degradation-parse",
              "bad degradation form '" + form + "'");
      rec.model.form = form == "linear" ? prognostics::Form::linear
                                        : prognostics::Form::exponential;
      rec.model.kappa = jd.at("kappa").get<double>();
      rec.model.prior_mean = jd.at("prior_mean").get<double>();
      rec.model.prior_var = jd.at("prior_var").get<double>();
      rec.model.noise_var = jd.at("noise_var").get<double>();
      rec.model.threshold = jd.at("threshold").get<double>();
      rec.model.pm_cost = jd.at("pm_cost").get<double>();
      rec.model.cm_cost = jd.at("cm_cost").get<double>();
      rec.age_weeks = jd.at("age_weeks").get<int>();
      for (const auto& obs : jd.at("observations"))
        rec.observations.emplace_back(obs.at(0).get<int>(),
                                      obs.at(1).get<double>());
      std::string id = jd.at("id").get<std::string>();
      require(!lib.count(id), "degradation-parse",
              "duplicate degradation entry '" + id + "'");
      lib.emplace(std::move(id), std::move(rec));
    }
    return lib;
  } catch (const json::exception& e) {
    fail("degradation-parse", e.what());
  }
}

inline void save_degradation(const std::string& path,
                             const prognostics::DegradationLibrary& lib) {
  detail::write_file(path, degradation_to_json(lib).dump(2) + "\n");
}

inline prognostics::DegradationLibrary load_degradation(
    const std::string& path) {
  json root;
  try {
    root = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    fail("degradation-parse", e.what());
  }
  return degradation_from_json(root);
}

// ---- schedule CSV ----------------------------------------------------------

inline std::string write_schedule_csv(const sys::MaintenanceSchedule& sched) {
  std::string out = "der,action,week\n";
  for (const auto& [id, week] : sched.pm_week)
    out += id + ",PM," + std::to_string(week) + '\n';
  for (const auto& [id, week] : sched.cm_week)
    out += id + ",CM," + std::to_string(week) + '\n';
  return out;
}

inline std::string write_crew_csv(const sys::MaintenanceSchedule& sched) {
  std::string out = "mg,week\n";
  for (const auto& [id, weeks] : sched.crew_weeks)
    for (int week : weeks) out += id + ',' + std::to_string(week) + '\n';
  return out;
}

inline sys::MaintenanceSchedule read_schedule_csv(const std::string& sched_csv,
                                                  const std::string& crew_csv) {
  sys::MaintenanceSchedule out;
  std::istringstream in(sched_csv);
  std::string line;
  require(bool(std::getline(in, line)) &&
              detail::split_csv_line(line) ==
                  std::vector<std::string>({"der", "action", "week"}),
          "csv-parse", "unexpected schedule header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 3, "csv-parse", "bad schedule row");
    int week = int(detail::parse_long(f[2], "schedule week"));
    if (f[1] == "PM")
      out.pm_week[f[0]] = week;
    else if (f[1] == "CM")
      out.cm_week[f[0]] = week;
    else
      fail("csv-parse", "unknown action '" + f[1] + "'");
  }
  std::istringstream cin_(crew_csv);
  require(bool(std::getline(cin_, line)) &&
              detail::split_csv_line(line) ==
                  std::vector<std::string>({"mg", "week"}),
          "csv-parse", "unexpected crew header");
  while (std::getline(cin_, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 2, "csv-parse", "bad crew row");
    out.crew_weeks[f[0]].push_back(int(detail::parse_long(f[1], "crew week")));
  }
  return out;
}

// ---- scenario generator spec JSON --------------------------------------

inline json generator_to_json(const sys::GeneratorSpec& spec) {
  json root;
  root["num_scenarios"] = spec.num_scenarios;
  root["microgrids"] = json::array();
  for (const auto& p : spec.mg) {
    json jp;
    jp["crit_base_mw"] = p.crit_base_mw;
    jp["noncrit_base_mw"] = p.noncrit_base_mw;
    jp["load_noise_frac"] = p.load_noise_frac;
    root["microgrids"].push_back(std::move(jp));
  }
  root["load_diurnal_amp"] = spec.load_diurnal_amp;
  root["wind_mean_frac"] = spec.wind_mean_frac;
  root["wind_reversion"] = spec.wind_reversion;
  root["wind_noise_frac"] = spec.wind_noise_frac;
  root["solar_noise_frac"] = spec.solar_noise_frac;
  root["price_buy_base"] = spec.price_buy_base;
  root["price_diurnal_amp"] = spec.price_diurnal_amp;
  root["price_reversion"] = spec.price_reversion;
  root["price_noise"] = spec.price_noise;
  root["sell_discount"] = spec.sell_discount;
  root["crit_penalty"] = spec.crit_penalty;
  root["noncrit_penalty"] = spec.noncrit_penalty;
  return root;
}

inline sys::GeneratorSpec generator_from_json(const json& root) {
  try {
    sys::GeneratorSpec spec;
    spec.num_scenarios = root.at("num_scenarios").get<int>();
    for (const auto& jp : root.at("microgrids")) {
      sys::GeneratorSpec::MgProfile p;
      p.crit_base_mw = jp.at("crit_base_mw").get<double>();
      p.noncrit_base_mw = jp.at("noncrit_base_mw").get<double>();
      p.load_noise_frac = jp.at("load_noise_frac").get<double>();
      spec.mg.push_back(p);
    }
    spec.load_diurnal_amp = root.at("load_diurnal_amp").get<double>();
    spec.wind_mean_frac = root.at("wind_mean_frac").get<double>();
    spec.wind_reversion = root.at("wind_reversion").get<double>();
    spec.wind_noise_frac = root.at("wind_noise_frac").get<double>();
    spec.solar_noise_frac = root.at("solar_noise_frac").get<double>();
    spec.price_buy_base = root.at("price_buy_base").get<double>();
    spec.price_diurnal_amp = root.at("price_diurnal_amp").get<double>();
    spec.price_reversion = root.at("price_reversion").get<double>();
    spec.price_noise = root.at("price_noise").get<double>();
    spec.sell_discount = root.at("sell_discount").get<double>();
    spec.crit_penalty = root.at("crit_penalty").get<double>();
    spec.noncrit_penalty = root.at("noncrit_penalty").get<double>();
    return spec;
  } catch (const json::exception& e) {
    fail("generator-parse", e.what());
  }
}

inline void save_generator(const std::string& path,
                           const sys::GeneratorSpec& spec) {
  detail::write_file(path, generator_to_json(spec).dump(2) + "\n");
}

inline sys::GeneratorSpec load_generator(const std::string& path) {
  json root;
  try {
    root = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    fail("generator-parse", e.what());
  }
  return generator_from_json(root);
}

// ---- metrics CSV ---------------------------------------------------------
//
// Side-by-side method columns over the published row labels, one row per
// metric: "Metrics,Periodic,SD-IOM".

inline std::string write_metrics_csv(
    const std::vector<std::pair<std::string, eval::MetricsReport>>& methods) {
  require(!methods.empty(), "bad-report", "no method columns to write");
  std::string out = "Metrics";
  for (const auto& [name, report] : methods) out += ',' + name;
  out += '\n';
  std::vector<std::vector<std::pair<std::string, double>>> cols;
  for (const auto& [name, report] : methods)
    cols.push_back(eval::metric_rows(report));
  for (std::size_t r = 0; r < cols[0].size(); ++r) {
    out += cols[0][r].first;
    for (const auto& col : cols) out += ',' + detail::fmt(col[r].second);
    out += '\n';
  }
  return out;
}

struct MetricsTable {
  std::vector<std::string> methods;         // column names
  std::vector<std::string> labels;          // row labels in file order
  std::vector<std::vector<double>> values;  // values[row][column]
};

inline MetricsTable read_metrics_csv(const std::string& text) {
  MetricsTable table;
  std::istringstream in(text);
  std::string line;
  require(bool(std::getline(in, line)), "csv-parse", "empty metrics file");
  auto head = detail::split_csv_line(line);
  require(head.size() >= 2 && head[0] == "Metrics", "csv-parse",
          "unexpected metrics header");
  table.methods.assign(head.begin() + 1, head.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == head.size(), "csv-parse", "ragged metrics row");
    table.labels.push_back(f[0]);
    std::vector<double> row;
    for (std::size_t c = 1; c < f.size(); ++c)
      row.push_back(detail::parse_double(f[c], "metric value"));
    table.values.push_back(std::move(row));
  }
  return table;
}

// ---- outcome log ---------------------------------------------------------

inline std::string write_outcomes_csv(
    const std::vector<std::pair<std::string, std::vector<eval::OutcomeRecord>>>&
        methods) {
  std::string out = "method,replication,cycle,der,outcome,event_week,unused_life\n";
  for (const auto& [name, records] : methods)
    for (const auto& rec : records) {
      out += name + ',' + std::to_string(rec.replication) + ',' +
             std::to_string(rec.cycle) + ',' + rec.der_id + ',' +
             eval::to_string(rec.outcome) + ',' +
             std::to_string(rec.event_week) + ',' +
             std::to_string(rec.unused_life) + '\n';
    }
  return out;
}

inline std::vector<std::pair<std::string, eval::OutcomeRecord>>
read_outcomes_csv(const std::string& text) {
  std::vector<std::pair<std::string, eval::OutcomeRecord>> out;
  std::istringstream in(text);
  std::string line;
  require(bool(std::getline(in, line)) &&
              detail::split_csv_line(line) ==
                  std::vector<std::string>({"method", "replication", "cycle",
                                            "der", "outcome", "event_week",
                                            "unused_life"}),
          "csv-parse", "unexpected outcome header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 7, "csv-parse", "bad outcome row");
    eval::OutcomeRecord rec;
    rec.replication = int(detail::parse_long(f[1], "replication"));
    rec.cycle = int(detail::parse_long(f[2], "cycle"));
    rec.der_id = f[3];
    rec.outcome = eval::outcome_from(f[4]);
    rec.event_week = int(detail::parse_long(f[5], "event week"));
    rec.unused_life = int(detail::parse_long(f[6], "unused life"));
    out.push_back({f[0], std::move(rec)});
  }
  return out;
}

// ---- solver traces ---------------------------------------------------------

inline std::string write_convergence_csv(
    const std::vector<lshaped::IterationRecord>& trace) {
  std::string out =
      "iteration,round,lower_bound,upper_bound,master_objective,"
      "first_stage_cost,recourse_relaxed,recovery_estimate,cuts_added\n";
  for (const auto& it : trace) {
    out += std::to_string(it.iteration) + ',' + std::to_string(it.round) +
           ',' + detail::fmt(it.lower_bound) + ',' +
           detail::fmt(it.upper_bound) + ',' +
           detail::fmt(it.master_objective) + ',' +
           detail::fmt(it.first_stage_cost) + ',' +
           detail::fmt(it.recourse_relaxed) + ',' +
           detail::fmt(it.recovery_estimate) + ',' +
           std::to_string(it.cuts_added) + '\n';
  }
  return out;
}

inline std::vector<lshaped::IterationRecord> read_convergence_csv(
    const std::string& text) {
  std::vector<lshaped::IterationRecord> out;
  std::istringstream in(text);
  std::string line;
  require(bool(std::getline(in, line)) &&
              detail::split_csv_line(line).size() == 9,
          "csv-parse", "unexpected convergence header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 9, "csv-parse", "bad convergence row");
    lshaped::IterationRecord rec;
    rec.iteration = int(detail::parse_long(f[0], "iteration"));
    rec.round = int(detail::parse_long(f[1], "round"));
    rec.lower_bound = detail::parse_double(f[2], "lower bound");
    rec.upper_bound = detail::parse_double(f[3], "upper bound");
    rec.master_objective = detail::parse_double(f[4], "master objective");
    rec.first_stage_cost = detail::parse_double(f[5], "first-stage cost");
    rec.recourse_relaxed = detail::parse_double(f[6], "relaxed recourse");
    rec.recovery_estimate = detail::parse_double(f[7], "recovery estimate");
    rec.cuts_added = int(detail::parse_long(f[8], "cuts added"));
    out.push_back(rec);
  }
  return out;
}

inline std::string write_cuts_csv(
    const std::vector<lshaped::CutLogEntry>& log) {
  std::string out = "iteration,round,scope,alpha,nonzeros,violation\n";
  for (const auto& c : log) {
    out += std::to_string(c.iteration) + ',' + std::to_string(c.round) + ',' +
           c.scope + ',' + detail::fmt(c.alpha) + ',' +
           std::to_string(c.nonzeros) + ',' + detail::fmt(c.violation) + '\n';
  }
  return out;
}

inline std::vector<lshaped::CutLogEntry> read_cuts_csv(
    const std::string& text) {
  std::vector<lshaped::CutLogEntry> out;
  std::istringstream in(text);
  std::string line;
  require(bool(std::getline(in, line)) &&
              detail::split_csv_line(line).size() == 6,
          "csv-parse", "unexpected cut-log header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 6, "csv-parse", "bad cut-log row");
    lshaped::CutLogEntry rec;
    rec.iteration = int(detail::parse_long(f[0], "iteration"));
    rec.round = int(detail::parse_long(f[1], "round"));
    rec.scope = f[2];
    rec.alpha = detail::parse_double(f[3], "alpha");
    rec.nonzeros = int(detail::parse_long(f[4], "nonzeros"));
    rec.violation = detail::parse_double(f[5], "violation");
    out.push_back(std::move(rec));
  }
  return out;
}

// ---- resilience tables ---------------------------------------------------

struct ErlRow {
  std::string method, mode, metric;
  double erl = 0.0;
};

inline std::string write_erl_csv(const std::vector<ErlRow>& rows) {
  std::string out = "method,mode,metric,erl\n";
  for (const auto& r : rows)
    out += r.method + ',' + r.mode + ',' + r.metric + ',' +
           detail::fmt(r.erl) + '\n';
  return out;
}

inline std::vector<ErlRow> read_erl_csv(const std::string& text) {
  std::vector<ErlRow> out;
  std::istringstream in(text);
  std::string line;
  require(bool(std::getline(in, line)) &&
              detail::split_csv_line(line) ==
                  std::vector<std::string>({"method", "mode", "metric", "erl"}),
          "csv-parse", "unexpected resilience header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 4, "csv-parse", "bad resilience row");
    out.push_back({f[0], f[1], f[2], detail::parse_double(f[3], "erl")});
  }
  return out;
}

struct PsiRow {
  std::string method, mode, metric;
  int week = 0;
  double psi = 1.0;
};

inline std::string write_psi_csv(const std::vector<PsiRow>& rows) {
  std::string out = "method,mode,metric,week,psi\n";
  for (const auto& r : rows)
    out += r.method + ',' + r.mode + ',' + r.metric + ',' +
           std::to_string(r.week) + ',' + detail::fmt(r.psi) + '\n';
  return out;
}

inline std::vector<PsiRow> read_psi_csv(const std::string& text) {
  std::vector<PsiRow> out;
  std::istringstream in(text);
  std::string line;
  require(bool(std::getline(in, line)) &&
              detail::split_csv_line(line) ==
                  std::vector<std::string>(
                      {"method", "mode", "metric", "week", "psi"}),
          "csv-parse", "unexpected plot-data header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::split_csv_line(line);
    require(f.size() == 5, "csv-parse", "bad plot-data row");
    out.push_back({f[0], f[1], f[2], int(detail::parse_long(f[3], "week")),
                   detail::parse_double(f[4], "psi")});
  }
  return out;
}

}  // namespace sdiom::io
