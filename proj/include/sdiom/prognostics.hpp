#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdiom/error.hpp"
#include "sdiom/rng.hpp"

namespace sdiom::prognostics {

enum class Form { linear, exponential };

// Stochastic degradation signal D(t) = h(kappa, phi, t) + noise, with a
// Gaussian prior on the unit-specific rate phi.  The linear form uses
// h = kappa + phi*t; the exponential form uses h = kappa*exp(phi*t) and is
// handled on the log scale, where it is linear in phi again.
struct DegradationModel {
  Form form = Form::linear;
  double kappa = 0.0;       // deterministic intercept (scale when exponential)
  double prior_mean = 0.0;  // prior on phi
  double prior_var = 1.0;
  double noise_var = 0.0;
  double threshold = 1.0;   // failure level on the signal scale
  double pm_cost = 0.0;     // planned replacement cost
  double cm_cost = 0.0;     // post-failure replacement cost
};

struct PosteriorState {
  double mean = 0.0;
  double var = 1.0;
  int last_obs_time = 0;  // weeks since the unit's last renewal
  int n_obs = 0;
};

// Remaining-life distribution on a weekly grid, measured from origin week.
// pmf[t] (t = 1..horizon) is the mass of failing in week t; index 0 unused.
struct Rld {
  int origin = 0;
  std::vector<double> pmf;       // size horizon + 1
  std::vector<double> survival;  // survival[t] = P(life > t), survival[0] = 1
  int horizon() const { return int(pmf.size()) - 1; }
  double tail_mass() const { return survival.back(); }
};

// Expected maintenance cost per unit of expected usable life, one value per
// candidate week; index 0 unused.
struct CostCurve {
  std::vector<double> values;
  int horizon() const { return int(values.size()) - 1; }
};

struct SignalTrajectory {
  double phi = 0.0;
  std::vector<double> signal;  // signal[t], t = 1..horizon; index 0 unused
  int failure_week = 0;        // first week signal >= threshold; 0 if none
};

namespace detail {

// Working scale: identity for the linear form, log for the exponential one.
struct Scale {
  double kappa_eff;
  double threshold_eff;
};

inline Scale effective_scale(const DegradationModel& m) {
  if (m.form == Form::linear) return {m.kappa, m.threshold};
  require(m.kappa > 0.0, "bad-model",
          "exponential form needs a positive intercept");
  require(m.threshold > 0.0, "bad-model",
          "exponential form needs a positive threshold");
  return {std::log(m.kappa), std::log(m.threshold)};
}

inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace detail

inline void validate_model(const DegradationModel& m) {
  require(m.prior_var > 0.0, "bad-model", "prior variance must be positive");
  require(m.noise_var >= 0.0, "bad-model", "noise variance must be >= 0");
  auto sc = detail::effective_scale(m);
  require(sc.threshold_eff > sc.kappa_eff, "bad-model",
          "failure threshold must sit above the signal at t = 0");
}

inline PosteriorState prior_state(const DegradationModel& m) {
  validate_model(m);
  return {m.prior_mean, m.prior_var, 0, 0};
}

// Conjugate Gaussian update of phi from (week, signal) pairs.  Observation
// weeks must be strictly increasing and later than anything already absorbed.
// With zero sensor noise the posterior collapses onto the least-squares phi.
inline PosteriorState update_posterior(
    const DegradationModel& m, const PosteriorState& state,
    std::span<const std::pair<int, double>> observations) {
  validate_model(m);
  auto sc = detail::effective_scale(m);

  double sum_t2 = 0.0;   // sum of squared basis values
  double sum_ty = 0.0;   // sum of basis * centered response
  int last_time = state.last_obs_time;
  for (const auto& [week, raw] : observations) {
    require(week > last_time, "bad-observation-time",
            "observation weeks must be strictly increasing");
    last_time = week;
    double y = raw;
    if (m.form == Form::exponential) {
      require(raw > 0.0, "bad-observation",
              "exponential-form signals must be positive to log-transform");
      y = std::log(raw);
    }
    double t = double(week);
    sum_t2 += t * t;
    sum_ty += t * (y - sc.kappa_eff);
  }
  if (observations.empty()) return state;

  PosteriorState out = state;
  out.last_obs_time = last_time;
  out.n_obs = state.n_obs + int(observations.size());
  if (m.noise_var == 0.0) {
    out.mean = sum_ty / sum_t2;
    out.var = 0.0;
    return out;
  }
  if (state.var == 0.0) return out;  // already collapsed; nothing moves it
  double precision = 1.0 / state.var + sum_t2 / m.noise_var;
  out.mean = (state.mean / state.var + sum_ty / m.noise_var) / precision;
  out.var = 1.0 / precision;
  return out;
}

// First-passage law of the posterior-predictive mean path through the
// threshold.  On the working scale the path kappa + phi*s crosses by absolute
// week s iff phi >= (threshold - kappa)/s, so the survival beyond t more
// weeks is the Gaussian mass below that boundary.  Mass of paths that are
// late to cross lands in week 1 by convention, as does everything when the
// predicted signal already sits at the threshold.
inline Rld compute_rld(const DegradationModel& m, const PosteriorState& post,
                       int horizon) {
  validate_model(m);
  require(horizon >= 1, "bad-horizon", "RLD horizon must be >= 1");
  require(post.var >= 0.0, "bad-posterior", "negative posterior variance");
  auto sc = detail::effective_scale(m);

  Rld rld;
  rld.origin = post.last_obs_time;
  rld.pmf.assign(horizon + 1, 0.0);
  rld.survival.assign(horizon + 1, 0.0);
  rld.survival[0] = 1.0;

  double predicted_now = sc.kappa_eff + post.mean * double(post.last_obs_time);
  if (predicted_now >= sc.threshold_eff) {
    rld.pmf[1] = 1.0;
    return rld;
  }

  double sd = std::sqrt(post.var);
  for (int t = 1; t <= horizon; ++t) {
    double boundary =
        (sc.threshold_eff - sc.kappa_eff) / double(post.last_obs_time + t);
    double s;
    if (sd == 0.0) {
      s = post.mean < boundary ? 1.0 : 0.0;
    } else {
      s = detail::std_normal_cdf((boundary - post.mean) / sd);
    }
    rld.survival[t] = std::min(s, rld.survival[t - 1]);
    rld.pmf[t] = rld.survival[t - 1] - rld.survival[t];
  }
  return rld;
}

// Cost rate of committing to preventive replacement in week t: expected
// replacement cost over expected usable life, the life integral taken as a
// left Riemann sum of the survival curve plus the age already consumed.
inline CostCurve dynamic_cost(double pm_cost, double cm_cost, const Rld& rld,
                              int age_weeks) {
  require(age_weeks >= 0, "bad-age", "age must be >= 0");
  int T = rld.horizon();
  if (age_weeks == 0)
    require(rld.survival[1] > 1e-15, "degenerate-life",
            "new unit with certain first-week failure has zero expected life");

  CostCurve curve;
  curve.values.assign(T + 1, 0.0);
  double life = double(age_weeks);
  for (int t = 1; t <= T; ++t) {
    life += rld.survival[t - 1];
    double s = rld.survival[t];
    curve.values[t] = (pm_cost * s + cm_cost * (1.0 - s)) / life;
  }
  return curve;
}

// Latest acceptable week: first week where survival drops below the
// reliability floor, clamped to the planning horizon.
inline int maintenance_deadline(const Rld& rld, double reliability_floor,
                                int horizon) {
  require(horizon >= 1, "bad-horizon", "deadline horizon must be >= 1");
  require(reliability_floor > 0.0 && reliability_floor < 1.0, "bad-floor",
          "reliability floor must lie in (0,1)");
  int T = std::min(horizon, rld.horizon());
  for (int t = 1; t <= T; ++t) {
    if (rld.survival[t] < reliability_floor) return t;
  }
  return horizon;
}

// Draw phi from the prior, then one noise term per week, in that order.
inline SignalTrajectory simulate_signal(const DegradationModel& m,
                                        std::uint64_t seed, int horizon) {
  validate_model(m);
  require(horizon >= 1, "bad-horizon", "simulation horizon must be >= 1");
  Rng rng(seed);
  SignalTrajectory traj;
  traj.phi = rng.gaussian(m.prior_mean, std::sqrt(m.prior_var));
  traj.signal.assign(horizon + 1, 0.0);
  double noise_sd = std::sqrt(m.noise_var);
  for (int t = 1; t <= horizon; ++t) {
    double mean_path = m.form == Form::linear
                           ? m.kappa + traj.phi * double(t)
                           : m.kappa * std::exp(traj.phi * double(t));
    traj.signal[t] = mean_path + rng.gaussian(0.0, noise_sd);
    if (traj.failure_week == 0 && traj.signal[t] >= m.threshold)
      traj.failure_week = t;
  }
  return traj;
}

// Per-asset degradation record: the population model plus what the sensors
// have reported so far.  Keyed by DER id when assembled into a library.
struct DegradationRecord {
  DegradationModel model;
  int age_weeks = 0;  // observation origin t_o
  std::vector<std::pair<int, double>> observations;  // (week, signal)
};

using DegradationLibrary = std::map<std::string, DegradationRecord>;

}  // namespace sdiom::prognostics
