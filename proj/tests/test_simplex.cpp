#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sdiom/error.hpp"
#include "sdiom/lp.hpp"
#include "sdiom/simplex.hpp"
#include "testutil.hpp"

using sdiom::opt::LinearProgram;
using sdiom::opt::LpSolution;
using sdiom::opt::Sense;
using sdiom::opt::SimplexSolver;
using sdiom::opt::Status;
using sdiom::opt::kInf;

namespace {

// Duality gap and primal feasibility checks shared by the randomized suites.
void check_certificates(const LinearProgram& lp, const LpSolution& sol) {
  REQUIRE(sol.status == Status::optimal);
  REQUIRE(lp.max_violation(sol.x) <= 1e-6);
  REQUIRE(std::abs(sol.objective - sol.dual_objective) <=
          1e-6 * (1.0 + std::abs(sol.objective)));
  for (int r = 0; r < lp.num_rows(); ++r) {
    if (lp.rows[r].sense == Sense::le) REQUIRE(sol.duals[r] <= 1e-7);
    if (lp.rows[r].sense == Sense::ge) REQUIRE(sol.duals[r] >= -1e-7);
  }
}

// Random boxed LP small enough for the vertex-enumeration oracle.  Most
// instances anchor the rows to an interior point so they are feasible by
// construction; the rest are left unanchored to exercise infeasibility.
LinearProgram random_small_lp(testutil::OracleRng& rng) {
  LinearProgram lp;
  int n = 3 + int(rng.u01() * 4.0);   // 3..6
  int m = 4 + int(rng.u01() * 7.0);   // 4..10
  std::vector<double> anchor(n);
  for (int j = 0; j < n; ++j) {
    double lo = rng.u01() < 0.3 ? -2.0 : 0.0;
    double hi = lo + 1.0 + 3.0 * rng.u01();
    lp.add_col(-5.0 + 10.0 * rng.u01(), lo, hi);
    anchor[j] = lo + (hi - lo) * rng.u01();
  }
  bool anchored = rng.u01() < 0.75;
  for (int r = 0; r < m; ++r) {
    std::vector<std::pair<int, double>> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j)
      if (rng.u01() < 0.6) {
        double v = -3.0 + 6.0 * rng.u01();
        terms.emplace_back(j, v);
        act += v * anchor[j];
      }
    if (terms.empty()) {
      terms.emplace_back(0, 1.0);
      act = anchor[0];
    }
    Sense s = rng.u01() < 0.5 ? Sense::le : Sense::ge;
    double rhs;
    if (anchored) {
      double slack = 2.0 * rng.u01();
      rhs = s == Sense::le ? act + slack : act - slack;
    } else {
      rhs = -4.0 + 12.0 * rng.u01();
    }
    lp.add_row(s, rhs, std::span<const std::pair<int, double>>(terms));
  }
  return lp;
}

// Random LP whose optimal value is known by construction: pick a point and
// multipliers satisfying the optimality conditions, then back out the
// objective vector.  The chosen point is then provably optimal, so the
// solver's objective can be compared against an exact target.
struct PlantedLp {
  LinearProgram lp;
  double opt_value = 0.0;
};

PlantedLp planted_lp(testutil::OracleRng& rng, int m, int n) {
  PlantedLp out;
  LinearProgram& lp = out.lp;
  std::vector<double> xstar(n), dj(n);
  std::vector<int> mode(n);  // 0: at lower, 1: at upper, 2: interior
  for (int j = 0; j < n; ++j) {
    double hi = 1.0 + 3.0 * rng.u01();
    lp.add_col(0.0, 0.0, hi);  // cost filled in below
    double u = rng.u01();
    mode[j] = u < 0.4 ? 0 : (u < 0.7 ? 1 : 2);
    xstar[j] = mode[j] == 0 ? 0.0 : mode[j] == 1 ? hi : hi * rng.u01();
    dj[j] = mode[j] == 0 ? 0.1 + 2.0 * rng.u01()
            : mode[j] == 1 ? -(0.1 + 2.0 * rng.u01())
                           : 0.0;
  }
  std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
  std::vector<double> y(m, 0.0);
  for (int i = 0; i < m; ++i) {
    std::vector<std::pair<int, double>> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j)
      if (rng.u01() < 0.5) {
        a[i][j] = -3.0 + 6.0 * rng.u01();
        act += a[i][j] * xstar[j];
        terms.emplace_back(j, a[i][j]);
      }
    bool active = i < m / 2;
    double rhs = active ? act : act + 0.5 + 2.0 * rng.u01();
    y[i] = active ? -(0.1 + 2.0 * rng.u01()) : 0.0;
    lp.add_row(Sense::le, rhs, std::span<const std::pair<int, double>>(terms));
  }
  for (int j = 0; j < n; ++j) {
    double c = dj[j];
    for (int i = 0; i < m; ++i) c += y[i] * a[i][j];
    lp.obj[j] = c;
    out.opt_value += c * xstar[j];
  }
  return out;
}

}  // namespace

TEST_CASE("single bounded column gives the textbook dual", "[simplex]") {
  LinearProgram lp;
  lp.add_col(-1.0, 0.0, 10.0);
  lp.add_row(Sense::le, 3.0, {{0, 1.0}});
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::optimal);
  REQUIRE_THAT(sol.objective, Catch::Matchers::WithinAbs(-3.0, 1e-9));
  REQUIRE_THAT(sol.x[0], Catch::Matchers::WithinAbs(3.0, 1e-9));
  REQUIRE_THAT(sol.duals[0], Catch::Matchers::WithinAbs(-1.0, 1e-9));
  REQUIRE_THAT(sol.dual_objective, Catch::Matchers::WithinAbs(-3.0, 1e-9));
}

TEST_CASE("binding ge row carries a nonnegative dual", "[simplex]") {
  LinearProgram lp;
  lp.add_col(1.0, 0.0, kInf);
  lp.add_row(Sense::ge, 2.0, {{0, 1.0}});
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::optimal);
  REQUIRE_THAT(sol.objective, Catch::Matchers::WithinAbs(2.0, 1e-9));
  REQUIRE_THAT(sol.duals[0], Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("equality row with a free column", "[simplex]") {
  LinearProgram lp;
  lp.add_col(1.0, -kInf, kInf);
  lp.add_col(0.5, 0.0, 4.0);
  lp.add_row(Sense::eq, 3.0, {{0, 1.0}, {1, 1.0}});
  // Pushing the second column to its upper bound leaves x0 = -1.
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::optimal);
  REQUIRE_THAT(sol.objective, Catch::Matchers::WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(sol.x[0], Catch::Matchers::WithinAbs(-1.0, 1e-9));
  REQUIRE_THAT(sol.x[1], Catch::Matchers::WithinAbs(4.0, 1e-9));
}

TEST_CASE("conflicting rows are reported infeasible", "[simplex]") {
  LinearProgram lp;
  lp.add_col(0.0, 0.0, kInf);
  lp.add_row(Sense::ge, 3.0, {{0, 1.0}});
  lp.add_row(Sense::le, 1.0, {{0, 1.0}});
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::infeasible);
}

TEST_CASE("bound conflict inside a row system is infeasible", "[simplex]") {
  LinearProgram lp;
  lp.add_col(1.0, 0.0, 1.0);
  lp.add_col(1.0, 0.0, 1.0);
  lp.add_row(Sense::ge, 3.5, {{0, 1.0}, {1, 1.0}});
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::infeasible);
}

TEST_CASE("descent along an uncapped column is unbounded", "[simplex]") {
  LinearProgram lp;
  lp.add_col(-1.0, 0.0, kInf);
  lp.add_col(0.0, 0.0, 1.0);
  lp.add_row(Sense::ge, 1.0, {{0, 1.0}, {1, 1.0}});
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::unbounded);
}

TEST_CASE("optimum reached purely through bound flips", "[simplex]") {
  LinearProgram lp;
  lp.add_col(-1.0, 0.0, 1.0);
  lp.add_col(-1.0, 0.0, 1.0);
  lp.add_row(Sense::le, 1.5, {{0, 1.0}, {1, 1.0}});
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::optimal);
  REQUIRE_THAT(sol.objective, Catch::Matchers::WithinAbs(-1.5, 1e-9));
}

TEST_CASE("free column settles at a row-implied value", "[simplex]") {
  LinearProgram lp;
  lp.add_col(1.0, -kInf, kInf);
  lp.add_row(Sense::ge, -5.0, {{0, 1.0}});
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::optimal);
  REQUIRE_THAT(sol.objective, Catch::Matchers::WithinAbs(-5.0, 1e-9));
  REQUIRE_THAT(sol.duals[0], Catch::Matchers::WithinAbs(1.0, 1e-9));
}

TEST_CASE("random boxed programs match vertex enumeration", "[simplex][oracle]") {
  testutil::OracleRng rng(0xd1cefULL);
  int optimal_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LinearProgram lp = random_small_lp(rng);
    auto oracle = testutil::enumerate_vertices(lp);
    auto sol = sdiom::opt::solve_lp(lp);
    CAPTURE(trial);
    if (!oracle.feasible) {
      REQUIRE(sol.status == Status::infeasible);
      continue;
    }
    ++optimal_seen;
    check_certificates(lp, sol);
    REQUIRE_THAT(sol.objective,
                 Catch::Matchers::WithinAbs(oracle.objective,
                                            1e-6 * (1.0 + std::abs(oracle.objective))));
  }
  // The generator must exercise the solver, not just the infeasibility path.
  REQUIRE(optimal_seen >= 70);
}

TEST_CASE("planted optima are recovered on 20x30 programs", "[simplex][oracle]") {
  testutil::OracleRng rng(0xaced5ULL);
  for (int trial = 0; trial < 30; ++trial) {
    auto planted = planted_lp(rng, 20, 30);
    auto sol = sdiom::opt::solve_lp(planted.lp);
    CAPTURE(trial);
    check_certificates(planted.lp, sol);
    REQUIRE_THAT(sol.objective,
                 Catch::Matchers::WithinAbs(planted.opt_value,
                                            1e-6 * (1.0 + std::abs(planted.opt_value))));
  }
}

TEST_CASE("warm re-solve after bound changes matches a cold solve", "[simplex]") {
  testutil::OracleRng rng(0xbeadULL);
  for (int trial = 0; trial < 20; ++trial) {
    auto planted = planted_lp(rng, 12, 18);
    SimplexSolver warm(planted.lp);
    auto first = warm.solve();
    REQUIRE(first.status == Status::optimal);

    // Tighten a handful of bounds, as branching or cut loops would.
    LinearProgram narrowed = planted.lp;
    for (int k = 0; k < 4; ++k) {
      int j = int(rng.u01() * narrowed.num_cols());
      double mid = 0.5 * (narrowed.lo[j] + narrowed.hi[j]);
      if (rng.u01() < 0.5)
        narrowed.hi[j] = mid;
      else
        narrowed.lo[j] = mid;
      warm.set_col_bounds(j, narrowed.lo[j], narrowed.hi[j]);
    }
    auto resolved = warm.solve();
    auto cold = sdiom::opt::solve_lp(narrowed);
    CAPTURE(trial);
    REQUIRE(resolved.status == cold.status);
    if (cold.status == Status::optimal) {
      REQUIRE_THAT(resolved.objective,
                   Catch::Matchers::WithinAbs(cold.objective,
                                              1e-6 * (1.0 + std::abs(cold.objective))));
      REQUIRE(narrowed.max_violation(resolved.x) <= 1e-6);
    }
  }
}

TEST_CASE("repeated solves are bit-for-bit identical", "[simplex]") {
  testutil::OracleRng rng(0x5eedULL);
  auto planted = planted_lp(rng, 15, 25);
  auto a = sdiom::opt::solve_lp(planted.lp);
  auto b = sdiom::opt::solve_lp(planted.lp);
  REQUIRE(a.status == b.status);
  REQUIRE(a.iterations == b.iterations);
  REQUIRE(a.objective == b.objective);
  REQUIRE(a.x == b.x);
  REQUIRE(a.duals == b.duals);
}

TEST_CASE("nested cube worst case still terminates", "[simplex]") {
  // Klee-Minty cube: the classic adversarial instance for greedy pricing.
  // The path may be long but the solver must arrive at 5^k exactly.
  LinearProgram lp;
  const int k = 6;
  for (int j = 0; j < k; ++j) lp.add_col(-std::pow(2.0, k - 1 - j), 0.0, kInf);
  for (int i = 0; i < k; ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < i; ++j) terms.emplace_back(j, std::pow(2.0, i - j + 1));
    terms.emplace_back(i, 1.0);
    lp.add_row(Sense::le, std::pow(5.0, i + 1),
               std::span<const std::pair<int, double>>(terms));
  }
  auto sol = sdiom::opt::solve_lp(lp);
  REQUIRE(sol.status == Status::optimal);
  REQUIRE_THAT(sol.objective,
               Catch::Matchers::WithinAbs(-std::pow(5.0, k), 1e-6 * std::pow(5.0, k)));
}
