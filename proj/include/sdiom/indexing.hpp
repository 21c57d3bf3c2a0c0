#pragma once

// Stable bijection between structured variable identities and flat column
// ids.  Every decision variable in the scheduling model belongs to exactly
// one kind; the key carries whichever subscripts apply and compares
// lexicographically so emission order is deterministic.

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "sdiom/error.hpp"

namespace sdiom::model {

enum class VarKind {
  // First stage.
  pm_start,        // nu: preventive maintenance begins this week
  cm_start,        // z: corrective repair begins this week
  crew,            // crew visits microgrid this week
  recourse,        // eta: under-estimator of one week's operational cost
  recovery,        // theta: integer cost-recovery lift
  // Second stage, per scenario and hour.
  commit,          // x: conventional unit committed
  turn_on,         // beta+: startup indicator
  turn_off,        // beta-: shutdown indicator
  dispatch,        // y: DER production
  charge,          // e+: battery charging power
  discharge,       // e-: battery discharging power
  charge_flag,     // pi+: charging enabled
  discharge_flag,  // pi-: discharging enabled
  soc,             // stored energy at end of hour
  grid_buy,        // g^p: purchase from the main grid
  grid_sell,       // g^s: sale to the main grid
  grid_buy_flag,   // direction binary for grid purchase
  grid_sell_flag,  // direction binary for grid sale
  link_buy,        // u^p: purchase from a neighbor microgrid
  link_sell,       // u^s: sale to a neighbor microgrid
  link_buy_flag,   // direction binary per link purchase
  link_sell_flag,  // direction binary per link sale
  curtail_crit,    // psi^c: critical load shed
  curtail_noncrit, // psi^n: non-critical load shed
};

inline const char* tag(VarKind k) {
  switch (k) {
    case VarKind::pm_start: return "nu";
    case VarKind::cm_start: return "zz";
    case VarKind::crew: return "crew";
    case VarKind::recourse: return "eta";
    case VarKind::recovery: return "theta";
    case VarKind::commit: return "x";
    case VarKind::turn_on: return "bon";
    case VarKind::turn_off: return "boff";
    case VarKind::dispatch: return "y";
    case VarKind::charge: return "ech";
    case VarKind::discharge: return "edch";
    case VarKind::charge_flag: return "pich";
    case VarKind::discharge_flag: return "pidch";
    case VarKind::soc: return "soc";
    case VarKind::grid_buy: return "gbuy";
    case VarKind::grid_sell: return "gsell";
    case VarKind::grid_buy_flag: return "ygbuy";
    case VarKind::grid_sell_flag: return "ygsell";
    case VarKind::link_buy: return "ubuy";
    case VarKind::link_sell: return "usell";
    case VarKind::link_buy_flag: return "yubuy";
    case VarKind::link_sell_flag: return "yusell";
    case VarKind::curtail_crit: return "psic";
    case VarKind::curtail_noncrit: return "psin";
  }
  return "?";
}

struct VarKey {
  VarKind kind{};
  int mg = -1;        // microgrid index
  int unit = -1;      // DER or battery index within the microgrid
  int peer = -1;      // partner microgrid for link variables
  int week = 0;       // t, 1-based; 0 when not applicable
  int hour = 0;       // h, 1-based; 0 when not applicable
  int scenario = -1;  // omega, 0-based; -1 for first-stage variables

  auto operator<=>(const VarKey&) const = default;
};

// Human-readable, LP-format-safe encoding (letters, digits, underscores).
inline std::string var_name(const VarKey& k) {
  std::string out = tag(k.kind);
  if (k.mg >= 0) out += "_m" + std::to_string(k.mg);
  if (k.unit >= 0) out += "_u" + std::to_string(k.unit);
  if (k.peer >= 0) out += "_p" + std::to_string(k.peer);
  if (k.week > 0) out += "_t" + std::to_string(k.week);
  if (k.hour > 0) out += "_h" + std::to_string(k.hour);
  if (k.scenario >= 0) out += "_s" + std::to_string(k.scenario);
  return out;
}

class IndexMap {
 public:
  int add(const VarKey& key) {
    auto [it, fresh] = by_key_.emplace(key, int(keys_.size()));
    require(fresh, "duplicate-variable", "variable emitted twice: " + var_name(key));
    keys_.push_back(key);
    return it->second;
  }

  bool contains(const VarKey& key) const { return by_key_.count(key) != 0; }

  int at(const VarKey& key) const {
    auto it = by_key_.find(key);
    require(it != by_key_.end(), "unknown-variable",
            "no column for " + var_name(key));
    return it->second;
  }

  const VarKey& key(int col) const {
    require(col >= 0 && col < int(keys_.size()), "unknown-variable",
            "column id out of range");
    return keys_[col];
  }

  int size() const { return int(keys_.size()); }
  const std::map<VarKey, int>& entries() const { return by_key_; }

 private:
  std::map<VarKey, int> by_key_;
  std::vector<VarKey> keys_;
};

}  // namespace sdiom::model
