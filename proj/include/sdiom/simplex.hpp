#pragma once

// Dense bounded-variable simplex with an explicitly maintained basis inverse.
// Cold solves run a two-phase primal; warm re-solves after bound changes
// (branch-and-bound, cut loops) go through a dual-simplex repair pass that
// reuses the incumbent basis, which is where all the speed on re-solves
// comes from.  Sized for the desk-scale instances this project targets:
// basis dimensions up to a couple of thousand.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "sdiom/error.hpp"
#include "sdiom/lp.hpp"

namespace sdiom::opt {

struct Basis {
  std::vector<int> basic;             // row -> column index
  std::vector<ColStatus> vstat;       // per internal column
  bool empty() const { return basic.empty() && vstat.empty(); }
};

class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp, Tolerances tol = {})
      : lp_(lp), tol_(tol) {
    n_ = lp.num_cols();
    m_ = lp.num_rows();
    total_ = n_ + 2 * m_;  // structural + slack + artificial
    build_columns();
    lob_.assign(total_, 0.0);
    upb_.assign(total_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lob_[j] = lp.lo[j];
      upb_[j] = lp.hi[j];
    }
    for (int i = 0; i < m_; ++i) {
      switch (lp.rows[i].sense) {
        case Sense::le: lob_[slack(i)] = 0.0; upb_[slack(i)] = kInf; break;
        case Sense::ge: lob_[slack(i)] = -kInf; upb_[slack(i)] = 0.0; break;
        case Sense::eq: lob_[slack(i)] = 0.0; upb_[slack(i)] = 0.0; break;
      }
      lob_[artificial(i)] = 0.0;
      upb_[artificial(i)] = 0.0;  // opened only during phase 1
    }
    max_iter_ = tol.max_iterations > 0
                    ? tol.max_iterations
                    : 200L * (n_ + m_) + 5000;
  }

  void set_col_bounds(int j, double lower, double upper) {
    require(j >= 0 && j < n_, "bad-column", "bound change out of range");
    lob_[j] = lower;
    upb_[j] = upper;
  }

  double col_lower(int j) const { return lob_[j]; }
  double col_upper(int j) const { return upb_[j]; }

  Basis basis() const { return {basic_, vstat_}; }

  void load_basis(const Basis& b) {
    require(int(b.basic.size()) == m_ && int(b.vstat.size()) == total_,
            "bad-basis", "basis shape does not match the model");
    basic_ = b.basic;
    vstat_ = b.vstat;
    have_state_ = true;
    inverse_valid_ = false;
  }

  // Solves from the in-core basis when one exists, cold otherwise.
  LpSolution solve() {
    iterations_ = 0;
    if (!have_state_) return solve_cold();
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (!inverse_valid_ && !refactor()) break;  // singular: fall through
      compute_xb();
      Status st = dual_repair();
      if (st == Status::infeasible) return finish_infeasible();
      if (st == Status::optimal) {
        st = primal_loop(/*phase1=*/false);
        if (st == Status::unbounded) return finish_unbounded();
        if (st == Status::optimal) {
          LpSolution sol;
          if (extract_and_verify(sol)) return sol;
        }
      }
      if (st == Status::iteration_limit) return finish_limit();
      inverse_valid_ = false;  // numerics trouble: refactor and retry
    }
    have_state_ = false;
    return solve_cold();
  }

 private:
  // ---- model layout -------------------------------------------------------
  int slack(int i) const { return n_ + i; }
  int artificial(int i) const { return n_ + m_ + i; }

  void build_columns() {
    col_rows_.assign(total_, {});
    col_vals_.assign(total_, {});
    for (int r = 0; r < m_; ++r) {
      const auto& row = lp_.rows[r];
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        col_rows_[row.cols[k]].push_back(r);
        col_vals_[row.cols[k]].push_back(row.vals[k]);
      }
      col_rows_[slack(r)] = {r};
      col_vals_[slack(r)] = {1.0};
      col_rows_[artificial(r)] = {r};
      col_vals_[artificial(r)] = {1.0};  // sign set per cold start
    }
  }

  double cost(int j) const {
    if (phase1_) return j >= n_ + m_ ? 1.0 : 0.0;
    return j < n_ ? lp_.obj[j] : 0.0;
  }

  double nonbasic_value(int j) const {
    switch (vstat_[j]) {
      case ColStatus::at_lower: return lob_[j];
      case ColStatus::at_upper: return upb_[j];
      default: return 0.0;
    }
  }

  // ---- linear algebra -----------------------------------------------------
  // binvt_ stores B^{-1} column-contiguous: column r lives at [r*m_, r*m_+m_).

  void ftran(int j, std::vector<double>& alpha) const {
    std::fill(alpha.begin(), alpha.end(), 0.0);
    const auto& rows = col_rows_[j];
    const auto& vals = col_vals_[j];
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double* col = &binvt_[std::size_t(rows[k]) * m_];
      double v = vals[k];
      for (int i = 0; i < m_; ++i) alpha[i] += v * col[i];
    }
  }

  void compute_duals(std::vector<double>& y) const {
    y.assign(m_, 0.0);
    std::vector<double> cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost(basic_[i]);
    for (int r = 0; r < m_; ++r) {
      const double* col = &binvt_[std::size_t(r) * m_];
      double acc = 0.0;
      for (int i = 0; i < m_; ++i) acc += cb[i] * col[i];
      y[r] = acc;
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost(j);
    const auto& rows = col_rows_[j];
    const auto& vals = col_vals_[j];
    for (std::size_t k = 0; k < rows.size(); ++k) d -= y[rows[k]] * vals[k];
    return d;
  }

  void compute_xb() {
    std::vector<double> r(m_);
    for (int i = 0; i < m_; ++i) r[i] = lp_.rows[i].rhs;
    for (int j = 0; j < total_; ++j) {
      if (vstat_[j] == ColStatus::basic) continue;
      double v = nonbasic_value(j);
      if (v == 0.0) continue;
      const auto& rows = col_rows_[j];
      const auto& vals = col_vals_[j];
      for (std::size_t k = 0; k < rows.size(); ++k) r[rows[k]] -= v * vals[k];
    }
    xb_.assign(m_, 0.0);
    for (int rr = 0; rr < m_; ++rr) {
      if (r[rr] == 0.0) continue;
      const double* col = &binvt_[std::size_t(rr) * m_];
      double v = r[rr];
      for (int i = 0; i < m_; ++i) xb_[i] += v * col[i];
    }
  }

  // Gauss-Jordan inverse of the basis matrix with partial pivoting.
  bool refactor() {
    std::vector<double> a(std::size_t(m_) * m_, 0.0);  // column-major
    for (int i = 0; i < m_; ++i) {
      int j = basic_[i];
      const auto& rows = col_rows_[j];
      const auto& vals = col_vals_[j];
      for (std::size_t k = 0; k < rows.size(); ++k)
        a[std::size_t(i) * m_ + rows[k]] = vals[k];
    }
    binvt_.assign(std::size_t(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binvt_[std::size_t(i) * m_ + i] = 1.0;
    std::vector<int> perm(m_);
    for (int i = 0; i < m_; ++i) perm[i] = i;

    // Eliminate on the row-echelon order; a and binvt_ share every op.
    for (int k = 0; k < m_; ++k) {
      int piv = -1;
      double best = 1e-12;
      for (int r = k; r < m_; ++r) {
        double v = std::abs(a[std::size_t(k) * m_ + perm[r]]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (piv < 0) return false;
      std::swap(perm[k], perm[piv]);
      int prow = perm[k];
      double diag = a[std::size_t(k) * m_ + prow];
      for (int c = 0; c < m_; ++c) {
        a[std::size_t(c) * m_ + prow] /= diag;
        binvt_[std::size_t(c) * m_ + prow] /= diag;
      }
      for (int r = 0; r < m_; ++r) {
        int rr = perm[r];
        if (rr == prow) continue;
        double f = a[std::size_t(k) * m_ + rr];
        if (f == 0.0) continue;
        for (int c = 0; c < m_; ++c) {
          a[std::size_t(c) * m_ + rr] -= f * a[std::size_t(c) * m_ + prow];
          binvt_[std::size_t(c) * m_ + rr] -=
              f * binvt_[std::size_t(c) * m_ + prow];
        }
      }
    }
    // The elimination produced P * B^{-1} for the pivot permutation P
    // (physical row r of the right half holds row perm^{-1}(r) of B^{-1});
    // map rows back so binvt_ holds B^{-1} itself.
    std::vector<double> tmp(m_);
    for (int c = 0; c < m_; ++c) {
      double* col = &binvt_[std::size_t(c) * m_];
      for (int q = 0; q < m_; ++q) tmp[q] = col[perm[q]];
      std::memcpy(col, tmp.data(), sizeof(double) * std::size_t(m_));
    }
    inverse_valid_ = true;
    pivots_since_refactor_ = 0;
    return true;
  }

  void eta_update(int prow, const std::vector<double>& alpha) {
    double ap = alpha[prow];
    for (int r = 0; r < m_; ++r) {
      double* col = &binvt_[std::size_t(r) * m_];
      double cp = col[prow] / ap;
      if (cp == 0.0) continue;
      for (int i = 0; i < m_; ++i) col[i] -= alpha[i] * cp;
      col[prow] = cp;
    }
    ++pivots_since_refactor_;
  }

  // ---- cold start ---------------------------------------------------------
  LpSolution solve_cold() {
    vstat_.assign(total_, ColStatus::at_lower);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lob_[j]))
        vstat_[j] = ColStatus::at_lower;
      else if (std::isfinite(upb_[j]))
        vstat_[j] = ColStatus::at_upper;
      else
        vstat_[j] = ColStatus::free_zero;
    }
    for (int i = 0; i < m_; ++i)
      vstat_[slack(i)] = lp_.rows[i].sense == Sense::ge ? ColStatus::at_upper
                                                        : ColStatus::at_lower;

    // Residual left for the artificial basis once nonbasics sit on bounds.
    std::vector<double> r(m_);
    for (int i = 0; i < m_; ++i) r[i] = lp_.rows[i].rhs;
    for (int j = 0; j < n_ + m_; ++j) {
      double v = nonbasic_value(j);
      if (v == 0.0) continue;
      const auto& rows = col_rows_[j];
      const auto& vals = col_vals_[j];
      for (std::size_t k = 0; k < rows.size(); ++k) r[rows[k]] -= v * vals[k];
    }
    basic_.resize(m_);
    binvt_.assign(std::size_t(m_) * m_, 0.0);
    xb_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double sign = r[i] >= 0.0 ? 1.0 : -1.0;
      col_vals_[artificial(i)][0] = sign;
      upb_[artificial(i)] = kInf;
      basic_[i] = artificial(i);
      vstat_[artificial(i)] = ColStatus::basic;
      binvt_[std::size_t(i) * m_ + i] = sign;
      xb_[i] = std::abs(r[i]);
    }
    inverse_valid_ = true;
    pivots_since_refactor_ = 0;
    have_state_ = true;

    phase1_ = true;
    Status st = primal_loop(/*phase1=*/true);
    phase1_ = false;
    if (st == Status::iteration_limit) return finish_limit();
    if (st != Status::optimal) return finish_numerics();

    double infeas = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= n_ + m_) infeas += std::max(0.0, xb_[i]);
    for (int i = 0; i < m_; ++i) upb_[artificial(i)] = 0.0;
    if (infeas > tol_.feasibility * (1.0 + rhs_scale()))
      return finish_infeasible();

    st = primal_loop(/*phase1=*/false);
    if (st == Status::unbounded) return finish_unbounded();
    if (st == Status::iteration_limit) return finish_limit();
    if (st != Status::optimal) return finish_numerics();

    LpSolution sol;
    if (extract_and_verify(sol)) return sol;
    if (refactor()) {
      compute_xb();
      if (primal_loop(false) == Status::optimal && extract_and_verify(sol))
        return sol;
    }
    return finish_numerics();
  }

  double rhs_scale() const {
    double s = 0.0;
    for (const auto& row : lp_.rows) s = std::max(s, std::abs(row.rhs));
    return s;
  }

  // ---- primal simplex -----------------------------------------------------
  Status primal_loop(bool phase1) {
    phase1_ = phase1;
    std::vector<double> y, alpha(m_);
    int degen_streak = 0;
    bool bland = false;
    while (true) {
      if (++iterations_ > max_iter_) return Status::iteration_limit;
      if (pivots_since_refactor_ > refactor_cadence()) {
        if (!refactor()) return Status::numerics;
        compute_xb();
      }
      compute_duals(y);

      int enter = -1;
      double best = phase1 ? tol_.pivot : dual_tol();
      int dir = +1;
      for (int j = 0; j < total_; ++j) {
        if (vstat_[j] == ColStatus::basic) continue;
        if (lob_[j] == upb_[j]) continue;  // fixed; never price
        double d = reduced_cost(j, y);
        double viol = 0.0;
        int jdir = +1;
        switch (vstat_[j]) {
          case ColStatus::at_lower: viol = -d; jdir = +1; break;
          case ColStatus::at_upper: viol = d; jdir = -1; break;
          case ColStatus::free_zero:
            viol = std::abs(d);
            jdir = d > 0.0 ? -1 : +1;
            break;
          default: break;
        }
        if (viol > best) {
          best = viol;
          enter = j;
          dir = jdir;
          if (bland) break;  // first (lowest-index) violating column
        }
      }
      if (enter < 0) return Status::optimal;

      ftran(enter, alpha);
      double limit = upb_[enter] - lob_[enter];  // own-range step
      int leave_row = -1;
      double t_star = limit;
      double best_piv = 0.0;
      for (int i = 0; i < m_; ++i) {
        double a = dir * alpha[i];
        int b = basic_[i];
        double t;
        if (a > tol_.pivot) {
          if (!std::isfinite(lob_[b])) continue;
          t = (xb_[i] - lob_[b]) / a;
        } else if (a < -tol_.pivot) {
          if (!std::isfinite(upb_[b])) continue;
          t = (upb_[b] - xb_[i]) / (-a);
        } else {
          continue;
        }
        if (t < -1e-11) t = 0.0;
        if (t < t_star - 1e-11 ||
            (t < t_star + 1e-11 &&
             (leave_row < 0 || std::abs(a) > best_piv))) {
          t_star = t;
          leave_row = i;
          best_piv = std::abs(a);
        }
      }

      if (leave_row < 0) {
        if (!std::isfinite(limit)) return Status::unbounded;
        // Bound flip: the entering variable crosses to its other bound.
        for (int i = 0; i < m_; ++i) xb_[i] -= dir * limit * alpha[i];
        vstat_[enter] = vstat_[enter] == ColStatus::at_lower
                            ? ColStatus::at_upper
                            : ColStatus::at_lower;
        continue;
      }

      if (t_star < 1e-11) {
        if (++degen_streak > 60) bland = true;
      } else {
        degen_streak = 0;
        bland = false;
      }

      pivot(enter, dir, leave_row, t_star, alpha);
    }
  }

  void pivot(int enter, int dir, int leave_row, double t,
             const std::vector<double>& alpha) {
    int leave = basic_[leave_row];
    double enter_start = nonbasic_value(enter);
    for (int i = 0; i < m_; ++i) xb_[i] -= dir * t * alpha[i];
    double leave_val = xb_[leave_row];
    // Snap the leaving variable onto whichever of its bounds it reached.
    if (std::isfinite(lob_[leave]) &&
        std::abs(leave_val - lob_[leave]) <= std::abs(leave_val - upb_[leave]))
      vstat_[leave] = ColStatus::at_lower;
    else
      vstat_[leave] = ColStatus::at_upper;
    if (!std::isfinite(lob_[leave]) && !std::isfinite(upb_[leave]))
      vstat_[leave] = ColStatus::free_zero;

    eta_update(leave_row, alpha);
    basic_[leave_row] = enter;
    vstat_[enter] = ColStatus::basic;
    xb_[leave_row] = enter_start + dir * t;
  }

  // ---- dual simplex repair ------------------------------------------------
  // Entered with a dual-feasible basis whose xb_ may violate bounds (after
  // branching or new cut rows).  Returns optimal when primal-feasible,
  // infeasible on a certificate row, numerics when it cannot make progress.
  Status dual_repair() {
    std::vector<double> y, alpha(m_), w(m_), tab(total_, 0.0);
    int stall = 0;
    while (true) {
      if (++iterations_ > max_iter_) return Status::iteration_limit;
      int p = -1;
      double worst = feas_tol();
      for (int i = 0; i < m_; ++i) {
        int b = basic_[i];
        double v = std::max(lob_[b] - xb_[i], xb_[i] - upb_[b]);
        if (v > worst) {
          worst = v;
          p = i;
        }
      }
      if (p < 0) return Status::optimal;

      compute_duals(y);
      for (int r = 0; r < m_; ++r) w[r] = binvt_[std::size_t(r) * m_ + p];

      int bp = basic_[p];
      bool too_high = xb_[p] > upb_[bp];
      double target = too_high ? upb_[bp] : lob_[bp];

      int enter = -1;
      double best_ratio = kInf;
      double best_piv = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (vstat_[j] == ColStatus::basic) continue;
        if (lob_[j] == upb_[j]) continue;
        double t = 0.0;
        const auto& rows = col_rows_[j];
        const auto& vals = col_vals_[j];
        for (std::size_t k = 0; k < rows.size(); ++k)
          t += vals[k] * w[rows[k]];
        tab[j] = t;
        if (std::abs(t) <= tol_.pivot) continue;
        bool can_up = vstat_[j] == ColStatus::at_lower ||
                      vstat_[j] == ColStatus::free_zero;
        bool can_dn = vstat_[j] == ColStatus::at_upper ||
                      vstat_[j] == ColStatus::free_zero;
        bool ok = too_high ? ((can_up && t > 0.0) || (can_dn && t < 0.0))
                           : ((can_up && t < 0.0) || (can_dn && t > 0.0));
        if (!ok) continue;
        double ratio = std::abs(reduced_cost(j, y)) / std::abs(t);
        if (stall > 60) {  // anti-cycling: first admissible column wins
          enter = j;
          break;
        }
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && std::abs(t) > best_piv)) {
          best_ratio = ratio;
          best_piv = std::abs(t);
          enter = j;
        }
      }
      if (enter < 0) return Status::infeasible;

      ftran(enter, alpha);
      if (std::abs(alpha[p]) <= tol_.pivot) {
        if (!refactor()) return Status::numerics;
        compute_xb();
        if (++stall > 80) return Status::numerics;
        continue;
      }
      double delta = (xb_[p] - target) / alpha[p];
      if (std::abs(delta) < 1e-11) ++stall; else stall = 0;

      double enter_start = nonbasic_value(enter);
      for (int i = 0; i < m_; ++i) xb_[i] -= delta * alpha[i];
      vstat_[bp] = too_high ? ColStatus::at_upper : ColStatus::at_lower;
      eta_update(p, alpha);
      basic_[p] = enter;
      vstat_[enter] = ColStatus::basic;
      xb_[p] = enter_start + delta;

      if (pivots_since_refactor_ > refactor_cadence()) {
        if (!refactor()) return Status::numerics;
        compute_xb();
      }
    }
  }

  // ---- extraction ---------------------------------------------------------
  bool extract_and_verify(LpSolution& sol) {
    sol = LpSolution{};
    sol.iterations = iterations_;
    sol.x.assign(n_, 0.0);
    sol.col_status.assign(n_, ColStatus::at_lower);
    std::vector<double> full(total_, 0.0);
    for (int j = 0; j < total_; ++j)
      if (vstat_[j] != ColStatus::basic) full[j] = nonbasic_value(j);
    for (int i = 0; i < m_; ++i) full[basic_[i]] = xb_[i];
    for (int j = 0; j < n_; ++j) {
      sol.x[j] = full[j];
      sol.col_status[j] = vstat_[j];
    }

    phase1_ = false;
    std::vector<double> y;
    compute_duals(y);
    sol.duals = y;
    sol.reduced_costs.resize(n_);
    for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = reduced_cost(j, y);

    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += lp_.obj[j] * sol.x[j];
    sol.objective = obj;

    // Dual objective: y'b plus reduced-cost contributions of nonbasic
    // variables resting on finite bounds (slacks rest on zero).
    double dual_obj = 0.0;
    for (int i = 0; i < m_; ++i) dual_obj += y[i] * lp_.rows[i].rhs;
    for (int j = 0; j < total_; ++j) {
      if (vstat_[j] == ColStatus::basic) continue;
      double v = nonbasic_value(j);
      if (v == 0.0) continue;
      dual_obj += reduced_cost(j, y) * v;
    }
    sol.dual_objective = dual_obj;

    // Honesty checks before claiming optimality.
    double scale = 1.0 + rhs_scale();
    double feas_budget = 20.0 * tol_.feasibility * scale;
    if (lp_.max_violation(sol.x) > feas_budget) return false;
    for (int j = 0; j < total_; ++j) {
      if (vstat_[j] == ColStatus::basic || lob_[j] == upb_[j]) continue;
      double d = reduced_cost(j, y);
      double slackok = 10.0 * tol_.duality * (1.0 + std::abs(cost(j)));
      if (vstat_[j] == ColStatus::at_lower && d < -slackok) return false;
      if (vstat_[j] == ColStatus::at_upper && d > slackok) return false;
      if (vstat_[j] == ColStatus::free_zero && std::abs(d) > slackok) return false;
    }
    if (std::abs(obj - dual_obj) > tol_.duality * (1.0 + std::abs(obj)) * 10.0)
      return false;
    sol.status = Status::optimal;
    return true;
  }

  LpSolution finish_infeasible() {
    LpSolution s;
    s.status = Status::infeasible;
    s.iterations = iterations_;
    return s;
  }
  LpSolution finish_unbounded() {
    LpSolution s;
    s.status = Status::unbounded;
    s.iterations = iterations_;
    return s;
  }
  LpSolution finish_limit() {
    LpSolution s;
    s.status = Status::iteration_limit;
    s.iterations = iterations_;
    return s;
  }
  LpSolution finish_numerics() {
    LpSolution s;
    s.status = Status::numerics;
    s.iterations = iterations_;
    return s;
  }

  double dual_tol() const { return std::max(1e-9, tol_.duality * 1e-2); }
  double feas_tol() const { return tol_.feasibility; }
  int refactor_cadence() const {
    return std::max(tol_.refactor_interval, m_);
  }

  LinearProgram lp_;  // owned copy: the solver must outlive any caller temporary
  Tolerances tol_;
  int n_ = 0, m_ = 0, total_ = 0;
  long max_iter_ = 0, iterations_ = 0;
  bool phase1_ = false;
  bool have_state_ = false;
  bool inverse_valid_ = false;
  int pivots_since_refactor_ = 0;

  std::vector<std::vector<int>> col_rows_;
  std::vector<std::vector<double>> col_vals_;
  std::vector<double> lob_, upb_;
  std::vector<ColStatus> vstat_;
  std::vector<int> basic_;
  std::vector<double> binvt_;  // column r of B^{-1} at offset r*m_
  std::vector<double> xb_;
};

inline LpSolution solve_lp(const LinearProgram& lp, Tolerances tol = {}) {
  SimplexSolver solver(lp, tol);
  return solver.solve();
}

}  // namespace sdiom::opt
