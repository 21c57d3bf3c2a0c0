#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdiom/error.hpp"

namespace sdiom::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { le, ge, eq };

enum class Status { optimal, infeasible, unbounded, iteration_limit, numerics };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration-limit";
    case Status::numerics: return "numerics";
  }
  return "?";
}

// One set of knobs shared by the simplex, branch-and-bound, and every caller
// that checks integrality or duality; nothing else hard-codes an epsilon.
struct Tolerances {
  double feasibility = 1e-7;
  double integrality = 1e-6;
  double duality = 1e-6;
  double pivot = 1e-9;
  int refactor_interval = 120;
  long max_iterations = 0;  // 0: derived from problem size
};

// Minimization problem over bounded columns with sparse rows.
struct LinearProgram {
  struct Row {
    std::vector<int> cols;
    std::vector<double> vals;
    Sense sense = Sense::le;
    double rhs = 0.0;
    std::string name;
  };

  std::vector<double> obj;
  std::vector<double> lo, hi;
  std::vector<bool> integer;
  std::vector<std::string> col_names;
  std::vector<Row> rows;

  int num_cols() const { return int(obj.size()); }
  int num_rows() const { return int(rows.size()); }

  int add_col(double cost, double lower, double upper, bool is_integer = false,
              std::string name = {}) {
    require(!(lower > upper), "bad-column", "lower bound above upper bound");
    obj.push_back(cost);
    lo.push_back(lower);
    hi.push_back(upper);
    integer.push_back(is_integer);
    col_names.push_back(std::move(name));
    return num_cols() - 1;
  }

  int add_row(Sense sense, double rhs,
              std::span<const std::pair<int, double>> terms,
              std::string name = {}) {
    Row r;
    r.sense = sense;
    r.rhs = rhs;
    r.name = std::move(name);
    for (auto [c, v] : terms) {
      require(c >= 0 && c < num_cols(), "bad-row", "column out of range");
      if (v == 0.0) continue;
      r.cols.push_back(c);
      r.vals.push_back(v);
    }
    rows.push_back(std::move(r));
    return num_rows() - 1;
  }

  int add_row(Sense sense, double rhs,
              std::initializer_list<std::pair<int, double>> terms,
              std::string name = {}) {
    return add_row(sense, rhs,
                   std::span<const std::pair<int, double>>(terms.begin(),
                                                           terms.size()),
                   std::move(name));
  }

  double row_activity(int r, std::span<const double> x) const {
    const Row& row = rows[r];
    double a = 0.0;
    for (std::size_t k = 0; k < row.cols.size(); ++k)
      a += row.vals[k] * x[row.cols[k]];
    return a;
  }

  // Largest constraint violation of x against rows and bounds.
  double max_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (int j = 0; j < num_cols(); ++j) {
      worst = std::max(worst, lo[j] - x[j]);
      worst = std::max(worst, x[j] - hi[j]);
    }
    for (int r = 0; r < num_rows(); ++r) {
      double a = row_activity(r, x);
      switch (rows[r].sense) {
        case Sense::le: worst = std::max(worst, a - rows[r].rhs); break;
        case Sense::ge: worst = std::max(worst, rows[r].rhs - a); break;
        case Sense::eq: worst = std::max(worst, std::abs(a - rows[r].rhs)); break;
      }
    }
    return worst;
  }
};

enum class ColStatus : unsigned char { basic, at_lower, at_upper, free_zero };

struct LpSolution {
  Status status = Status::numerics;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;          // one per row; <= 0 on "le", >= 0 on "ge"
  std::vector<double> reduced_costs;  // one per column
  std::vector<ColStatus> col_status;  // one per column
  long iterations = 0;
};

struct MipSolution {
  Status status = Status::numerics;
  double objective = 0.0;
  double bound = -kInf;  // proven lower bound
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
};

}  // namespace sdiom::opt
