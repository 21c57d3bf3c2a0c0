#pragma once

// Branch-and-bound over binary/integer columns of a LinearProgram.  Depth
// first dives with warm-started LP re-solves (the dual-simplex repair path),
// best-bound node selection between dives, most-fractional branching with
// lowest-column-id tie break.  Deterministic: same input, same node count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "sdiom/lp.hpp"
#include "sdiom/simplex.hpp"

namespace sdiom::opt {

struct BnbConfig {
  double rel_gap = 0.0;          // relative optimality gap to stop at
  long max_nodes = 0;            // 0: unlimited
  double time_limit_sec = 0.0;   // 0: none
  int heuristic_period = 64;     // fix-and-solve rounding cadence, 0: off
};

namespace detail {

struct BnbNode {
  std::vector<std::pair<int, double>> fixes;  // (col, value)
  double bound = -kInf;
  Basis basis;
  long id = 0;
};

}  // namespace detail

class BranchAndBound {
 public:
  BranchAndBound(const LinearProgram& lp, Tolerances tol = {},
                 BnbConfig cfg = {})
      : lp_(lp), tol_(tol), cfg_(cfg), solver_(lp_, tol) {
    for (int j = 0; j < lp.num_cols(); ++j)
      if (lp.integer[j]) int_cols_.push_back(j);
  }

  MipSolution solve() {
    using clock = std::chrono::steady_clock;
    auto started = clock::now();
    auto out_of_time = [&] {
      return cfg_.time_limit_sec > 0.0 &&
             std::chrono::duration<double>(clock::now() - started).count() >
                 cfg_.time_limit_sec;
    };

    MipSolution best;
    best.status = Status::infeasible;
    best.objective = kInf;
    double incumbent = kInf;

    std::vector<detail::BnbNode> pool;
    pool.push_back({});  // root: no fixes, cold solve
    long next_id = 1;
    long nodes = 0;
    bool budget_hit = false;

    while (!pool.empty()) {
      // Best-bound restart: weakest proven bound first, id breaks ties.
      std::size_t pick = 0;
      for (std::size_t i = 1; i < pool.size(); ++i) {
        if (pool[i].bound < pool[pick].bound - 1e-12 ||
            (std::abs(pool[i].bound - pool[pick].bound) <= 1e-12 &&
             pool[i].id < pool[pick].id))
          pick = i;
      }
      detail::BnbNode node = std::move(pool[pick]);
      pool.erase(pool.begin() + long(pick));

      if (prune_value(node.bound, incumbent)) continue;
      record_bound(best, node, pool, incumbent);

      apply_fixes(node.fixes);
      if (!node.basis.empty()) solver_.load_basis(node.basis);

      // Dive depth-first until this line of the tree closes.
      std::vector<std::pair<int, double>> fixes = node.fixes;
      while (true) {
        if ((cfg_.max_nodes > 0 && nodes >= cfg_.max_nodes) || out_of_time()) {
          budget_hit = true;
          break;
        }
        ++nodes;
        LpSolution rel = solver_.solve();
        lp_iterations_ += rel.iterations;
        if (rel.status == Status::unbounded) {
          best.status = Status::unbounded;
          best.nodes = nodes;
          best.lp_iterations = lp_iterations_;
          return best;
        }
        if (rel.status == Status::numerics ||
            rel.status == Status::iteration_limit)
          fail(std::string("lp-") + to_string(rel.status),
               "node relaxation failed; cannot certify the search tree");
        if (rel.status != Status::optimal) break;  // infeasible subtree
        if (prune_value(rel.objective, incumbent)) break;

        int branch_col = pick_branch_column(rel.x);
        if (branch_col < 0) {
          accept_incumbent(rel, incumbent, best);
          break;
        }

        if (cfg_.heuristic_period > 0 &&
            (nodes == 1 || nodes % cfg_.heuristic_period == 0))
          try_rounding(rel, fixes, incumbent, best);

        double frac = rel.x[branch_col];
        double dive_val = frac >= 0.5 ? 1.0 : 0.0;

        detail::BnbNode other;
        other.fixes = fixes;
        other.fixes.emplace_back(branch_col, 1.0 - dive_val);
        other.bound = rel.objective;
        other.basis = solver_.basis();
        other.id = next_id++;
        if (!prune_value(other.bound, incumbent))
          pool.push_back(std::move(other));

        fixes.emplace_back(branch_col, dive_val);
        solver_.set_col_bounds(branch_col, dive_val, dive_val);
        dirty_.push_back(branch_col);
      }
      if (budget_hit) break;
    }

    best.nodes = nodes;
    best.lp_iterations = lp_iterations_;
    if (std::isfinite(incumbent)) {
      if (budget_hit) {
        best.status = Status::iteration_limit;
      } else {
        best.status = Status::optimal;
        // Every open node was fathomed against incumbent - slack, so that
        // is what the search actually proved.
        double slack = std::max(cfg_.rel_gap * std::abs(incumbent),
                                1e-9 * (1.0 + std::abs(incumbent)));
        best.bound = std::max(best.bound, incumbent - slack);
        bound_trace_.push_back(best.bound);
      }
    } else if (budget_hit) {
      best.status = Status::iteration_limit;
    }
    return best;
  }

  // Proven-bound history, one entry per restart; non-decreasing.
  const std::vector<double>& bound_trace() const { return bound_trace_; }

 private:
  bool prune_value(double bound, double incumbent) const {
    if (!std::isfinite(incumbent)) return false;
    double slack = std::max(cfg_.rel_gap * std::abs(incumbent),
                            1e-9 * (1.0 + std::abs(incumbent)));
    return bound >= incumbent - slack;
  }

  void record_bound(MipSolution& best, const detail::BnbNode& node,
                    const std::vector<detail::BnbNode>& pool,
                    double incumbent) {
    double lb = node.bound;
    for (const auto& n : pool) lb = std::min(lb, n.bound);
    if (std::isfinite(incumbent)) lb = std::min(lb, incumbent);
    best.bound = std::max(best.bound, lb);
    bound_trace_.push_back(best.bound);
  }

  void apply_fixes(const std::vector<std::pair<int, double>>& fixes) {
    for (int j : dirty_) solver_.set_col_bounds(j, lp_.lo[j], lp_.hi[j]);
    dirty_.clear();
    for (auto [j, v] : fixes) {
      solver_.set_col_bounds(j, v, v);
      dirty_.push_back(j);
    }
  }

  int pick_branch_column(const std::vector<double>& x) const {
    int best_col = -1;
    double best_score = tol_.integrality;
    for (int j : int_cols_) {
      double f = x[j] - std::floor(x[j]);
      double score = std::min(f, 1.0 - f);
      if (score > best_score + 1e-15) {
        best_score = score;
        best_col = j;
      }
    }
    return best_col;
  }

  void accept_incumbent(const LpSolution& rel, double& incumbent,
                        MipSolution& best) {
    if (rel.objective >= incumbent) return;
    incumbent = rel.objective;
    best.objective = rel.objective;
    best.x = rel.x;
    for (int j : int_cols_) best.x[j] = std::round(best.x[j]);
    if (best.status != Status::unbounded) best.status = Status::optimal;
  }

  // Fix every integer to its rounded LP value, solve the continuous rest.
  void try_rounding(const LpSolution& rel,
                    const std::vector<std::pair<int, double>>& fixes,
                    double& incumbent, MipSolution& best) {
    std::vector<std::pair<int, double>> trial = fixes;
    for (int j : int_cols_) trial.emplace_back(j, std::round(rel.x[j]));
    apply_fixes(trial);
    LpSolution fixed = solver_.solve();
    lp_iterations_ += fixed.iterations;
    if (fixed.status == Status::optimal)
      accept_incumbent(fixed, incumbent, best);
    apply_fixes(fixes);
    // The solver basis now reflects the heuristic solve; the caller dives on
    // with it, which is harmless: bounds are restored and the next solve's
    // dual repair starts from a nearby basis.
  }

  LinearProgram lp_;  // owned copy: the search must outlive any caller temporary
  Tolerances tol_;
  BnbConfig cfg_;
  SimplexSolver solver_;
  std::vector<int> int_cols_;
  std::vector<int> dirty_;
  std::vector<double> bound_trace_;
  long lp_iterations_ = 0;
};

inline MipSolution solve_mip(const LinearProgram& lp, Tolerances tol = {},
                             BnbConfig cfg = {}) {
  BranchAndBound bnb(lp, tol, cfg);
  return bnb.solve();
}

}  // namespace sdiom::opt
