#pragma once

// Seeded synthetic scenario generator: diurnal loads, daylight-windowed
// solar, autocorrelated wind and mean-reverting prices.  Every draw comes
// from a per-(scenario, entity) substream with a fixed evaluation order
// (week-major, then hour; critical load before non-critical), so output is
// reproducible for a fixed seed regardless of platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "sdiom/error.hpp"
#include "sdiom/rng.hpp"
#include "sdiom/system.hpp"

namespace sdiom::sys {

struct GeneratorSpec {
  struct MgProfile {
    double crit_base_mw = 1.0;
    double noncrit_base_mw = 1.0;
    double load_noise_frac = 0.0;  // multiplicative noise, std dev
  };

  int num_scenarios = 1;
  std::vector<MgProfile> mg;  // one per microgrid, in system order

  double load_diurnal_amp = 0.25;  // relative swing of the daily load shape

  double wind_mean_frac = 0.6;   // long-run capacity factor
  double wind_reversion = 0.7;   // pull of the hourly factor toward the mean
  double wind_noise_frac = 0.0;  // innovation std dev (fraction of rating)

  double solar_noise_frac = 0.0;  // weather dimming std dev

  double price_buy_base = 50.0;  // currency/MWh
  double price_diurnal_amp = 0.3;
  double price_reversion = 0.8;  // persistence of the price deviation
  double price_noise = 0.0;      // additive innovation std dev
  double sell_discount = 0.8;    // sale price as a fraction of purchase price

  double crit_penalty = 1000.0;    // currency/MWh, applied to every MG
  double noncrit_penalty = 100.0;  // must stay below crit_penalty
};

namespace detail {

inline double diurnal_shape(int hour_of_day, double amp, double phase) {
  return 1.0 + amp * std::sin(2.0 * std::numbers::pi *
                              (hour_of_day - phase) / 24.0);
}

// Substream tags; scenario and entity index select the member stream.
inline constexpr std::uint64_t kLoadTag = 101, kSolarTag = 102,
                               kWindTag = 103, kPriceTag = 104;

}  // namespace detail

inline ScenarioSet generate_scenarios(const MMGSystem& system,
                                      const GeneratorSpec& spec,
                                      std::uint64_t seed) {
  require(spec.num_scenarios >= 1, "bad-generator-spec",
          "at least one scenario is required");
  require(int(spec.mg.size()) == system.num_mgs(), "bad-generator-spec",
          "one load profile per microgrid is required");
  require(spec.load_diurnal_amp >= 0.0 && spec.load_diurnal_amp < 1.0,
          "bad-generator-spec", "load diurnal amplitude must lie in [0,1)");

  ScenarioSet out;
  out.num_mgs = system.num_mgs();
  out.weeks = system.horizon_weeks;
  out.hours = system.hours_per_week;
  for (const auto& ref : renewable_order(system))
    out.renewable_ids.push_back(ref.id);
  out.connectivity.assign(out.weeks, Connectivity::grid_connected);
  out.crit_penalty.assign(out.num_mgs, spec.crit_penalty);
  out.noncrit_penalty.assign(out.num_mgs, spec.noncrit_penalty);

  auto renewables = renewable_order(system);
  out.scenarios.resize(spec.num_scenarios);
  for (int w = 0; w < spec.num_scenarios; ++w) {
    Scenario& sc = out.scenarios[w];
    sc.probability = 1.0 / spec.num_scenarios;
    sc.crit_load.assign(out.mg_cells(), 0.0);
    sc.noncrit_load.assign(out.mg_cells(), 0.0);
    sc.price_buy.assign(out.mg_cells(), 0.0);
    sc.price_sell.assign(out.mg_cells(), 0.0);
    sc.renewable_cap.assign(out.renewable_cells(), 0.0);

    for (int m = 0; m < out.num_mgs; ++m) {
      const auto& prof = spec.mg[m];
      Rng load_rng(derive_seed(seed, detail::kLoadTag, w * 4096 + m));
      Rng price_rng(derive_seed(seed, detail::kPriceTag, w * 4096 + m));
      double price_dev = 0.0;
      for (int t = 1; t <= out.weeks; ++t) {
        for (int h = 1; h <= out.hours; ++h) {
          int hod = (h - 1) % 24;
          double shape =
              detail::diurnal_shape(hod, spec.load_diurnal_amp, 8.0);
          double ec = prof.load_noise_frac == 0.0
                          ? 0.0
                          : load_rng.gaussian(0.0, prof.load_noise_frac);
          double en = prof.load_noise_frac == 0.0
                          ? 0.0
                          : load_rng.gaussian(0.0, prof.load_noise_frac);
          std::size_t k = out.idx(m, t, h);
          sc.crit_load[k] =
              std::max(0.0, prof.crit_base_mw * shape * (1.0 + ec));
          sc.noncrit_load[k] =
              std::max(0.0, prof.noncrit_base_mw * shape * (1.0 + en));

          double base_price = spec.price_buy_base *
                              detail::diurnal_shape(hod, spec.price_diurnal_amp, 9.0);
          if (spec.price_noise != 0.0)
            price_dev = spec.price_reversion * price_dev +
                        price_rng.gaussian(0.0, spec.price_noise);
          double buy = std::max(0.0, base_price + price_dev);
          sc.price_buy[k] = buy;
          sc.price_sell[k] = spec.sell_discount * buy;
        }
      }
    }

    for (int r = 0; r < int(renewables.size()); ++r) {
      const Der& der =
          system.microgrids[renewables[r].mg].ders[renewables[r].der];
      if (der.kind == DerKind::solar) {
        Rng rng(derive_seed(seed, detail::kSolarTag, w * 4096 + r));
        for (int t = 1; t <= out.weeks; ++t)
          for (int h = 1; h <= out.hours; ++h) {
            int hod = (h - 1) % 24;
            std::size_t k = out.ridx(r, t, h);
            if (hod < 6 || hod >= 18) {
              sc.renewable_cap[k] = 0.0;  // no draw: night output is exact
              continue;
            }
            double arc = std::sin(std::numbers::pi * (hod - 6) / 12.0);
            double weather =
                spec.solar_noise_frac == 0.0
                    ? 1.0
                    : std::clamp(1.0 + rng.gaussian(0.0, spec.solar_noise_frac),
                                 0.0, 1.25);
            sc.renewable_cap[k] = der.rated_mw * arc * weather;
          }
      } else {  // wind: clipped first-order autoregression on the factor
        Rng rng(derive_seed(seed, detail::kWindTag, w * 4096 + r));
        double factor = spec.wind_mean_frac;
        for (int t = 1; t <= out.weeks; ++t)
          for (int h = 1; h <= out.hours; ++h) {
            if (spec.wind_noise_frac != 0.0)
              factor = spec.wind_mean_frac +
                       spec.wind_reversion * (factor - spec.wind_mean_frac) +
                       rng.gaussian(0.0, spec.wind_noise_frac);
            sc.renewable_cap[out.ridx(r, t, h)] =
                der.rated_mw * std::clamp(factor, 0.0, 1.0);
          }
      }
    }
  }
  return out;
}

}  // namespace sdiom::sys
