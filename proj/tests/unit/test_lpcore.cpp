#include <doctest.h>

#include <random>

#include "../oracles/lp_oracles.hpp"
#include "mecalloc/errors.hpp"
#include "mecalloc/lp.hpp"

using namespace mecalloc;

namespace {

int add_cont(MilpModel& m, double lo, double up, double obj) {
  return m.add_variable("v" + std::to_string(m.num_variables()), VarKind::kContinuous,
                        VarRole::kOther, lo, up, obj);
}

void add_row(MilpModel& m, std::vector<int> idx, std::vector<double> coef, Sense s, double rhs) {
  m.add_row({"r" + std::to_string(m.num_rows()), RowFamily::kOther, std::move(idx),
             std::move(coef), s, rhs});
}

}  // namespace

TEST_CASE("single constraint caps the objective") {
  MilpModel m;
  const int x = add_cont(m, 0.0, 10.0, 1.0);
  add_row(m, {x}, {1.0}, Sense::kLe, 3.0);
  const LpSolution sol = solve_lp(m);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.values[x] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("contradictory rows are infeasible") {
  MilpModel m;
  const int x = add_cont(m, 0.0, 10.0, 1.0);
  add_row(m, {x}, {1.0}, Sense::kGe, 2.0);
  add_row(m, {x}, {1.0}, Sense::kLe, 1.0);
  CHECK(solve_lp(m).status == LpStatus::kInfeasible);
}

TEST_CASE("ray without upper bound is unbounded") {
  MilpModel m;
  const int x = add_cont(m, 0.0, std::numeric_limits<double>::infinity(), 1.0);
  const int z = add_cont(m, 0.0, 1.0, 0.0);
  add_row(m, {x, z}, {1.0, -1.0}, Sense::kGe, 0.0);
  CHECK(solve_lp(m).status == LpStatus::kUnbounded);
}

TEST_CASE("empty model") {
  MilpModel m;
  const LpSolution sol = solve_lp(m);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == 0.0);
}

TEST_CASE("solve_lp refuses binaries") {
  MilpModel m;
  m.add_variable("b", VarKind::kBinary, VarRole::kY, 0.0, 1.0, 1.0);
  CHECK_THROWS_AS(solve_lp(m), ContractError);
  const MilpModel r = relax(m);
  CHECK(r.num_binaries() == 0);
  CHECK(solve_lp(r).objective == doctest::Approx(1.0));
}

TEST_CASE("relax keeps rows and boxes binaries") {
  MilpModel m;
  for (int k = 0; k < 4; ++k) m.add_variable("b", VarKind::kBinary, VarRole::kX, 0.0, 1.0);
  add_cont(m, -1.0, 5.0, 0.0);
  add_row(m, {0, 1, 4}, {1.0, 2.0, 3.0}, Sense::kEq, 1.0);
  const MilpModel r = relax(m);
  CHECK(r.num_rows() == m.num_rows());
  CHECK(r.num_binaries() == 0);
  for (int k = 0; k < 4; ++k) {
    CHECK(r.variables[k].lower == 0.0);
    CHECK(r.variables[k].upper == 1.0);
  }
  CHECK(r.variables[4].lower == -1.0);

  MilpModel none;
  add_cont(none, 0.0, 2.0, 1.0);
  const MilpModel same = relax(none);
  CHECK(same.variables[0].upper == 2.0);
  CHECK(same.num_rows() == 0);
}

TEST_CASE("Beale's cycling example terminates at the optimum") {
  // max 3/4 x1 - 20 x2 + 1/2 x3 - 6 x4
  MilpModel m;
  std::vector<int> v;
  const double inf = std::numeric_limits<double>::infinity();
  for (double c : {0.75, -20.0, 0.5, -6.0}) v.push_back(add_cont(m, 0.0, inf, c));
  add_row(m, v, {0.25, -8.0, -1.0, 9.0}, Sense::kLe, 0.0);
  add_row(m, v, {0.5, -12.0, -0.5, 3.0}, Sense::kLe, 0.0);
  add_row(m, {v[2]}, {1.0}, Sense::kLe, 1.0);
  LpOptions opts;
  opts.bland_after_degenerate = 0;  // pure Bland from the start
  const LpSolution bland = solve_lp(m, opts);
  REQUIRE(bland.status == LpStatus::kOptimal);
  CHECK(bland.objective == doctest::Approx(1.25));
  const LpSolution dantzig = solve_lp(m);
  REQUIRE(dantzig.status == LpStatus::kOptimal);
  CHECK(dantzig.objective == doctest::Approx(1.25));
}

TEST_CASE("random <= LPs match the dense tableau oracle") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> coef(-1.0, 3.0);
  std::uniform_real_distribution<double> pos(0.5, 4.0);
  std::uniform_real_distribution<double> obj(-1.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 5;
    const int rows = 2 + trial % 4;
    std::vector<std::vector<double>> A(rows + n, std::vector<double>(n, 0.0));
    std::vector<double> b(rows + n), c(n), up(n);
    MilpModel m;
    for (int j = 0; j < n; ++j) {
      c[j] = obj(gen);
      up[j] = pos(gen);
      add_cont(m, 0.0, up[j], c[j]);
    }
    std::vector<int> all(n);
    for (int j = 0; j < n; ++j) all[j] = j;
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < n; ++j) A[r][j] = coef(gen);
      b[r] = pos(gen);
      add_row(m, all, A[r], Sense::kLe, b[r]);
    }
    // Oracle sees the variable bounds as explicit rows.
    for (int j = 0; j < n; ++j) {
      A[rows + j][j] = 1.0;
      b[rows + j] = up[j];
    }
    const auto expected = oracle::tableau_max(A, b, c);
    REQUIRE(expected.has_value());
    const LpSolution sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(*expected).epsilon(1e-7));
    CHECK(m.max_violation(sol.values) <= 1e-7);
  }
}

TEST_CASE("random mixed-sense LPs match vertex enumeration") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int feasible = 0;
  int infeasible = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    const int rows = 1 + trial % 4;
    MilpModel m;
    std::vector<double> lo(n), up(n), c(n);
    for (int j = 0; j < n; ++j) {
      lo[j] = -unit(gen);
      up[j] = 1.0 + unit(gen);
      c[j] = coef(gen);
      add_cont(m, lo[j], up[j], c[j]);
    }
    std::vector<oracle::Constraint> cons;
    std::vector<int> all(n);
    for (int j = 0; j < n; ++j) all[j] = j;
    for (int r = 0; r < rows; ++r) {
      std::vector<double> a(n);
      for (double& v : a) v = coef(gen);
      const int pick = static_cast<int>(gen() % 3);
      const double rhs = coef(gen);
      const Sense s = pick == 0 ? Sense::kLe : pick == 1 ? Sense::kGe : Sense::kEq;
      cons.push_back({a, pick == 0 ? -1 : pick == 1 ? 1 : 0, rhs});
      add_row(m, all, a, s, rhs);
    }
    const auto expected = oracle::vertex_max(cons, lo, up, c);
    const LpSolution sol = solve_lp(m);
    if (!expected) {
      CHECK(sol.status == LpStatus::kInfeasible);
      ++infeasible;
    } else {
      REQUIRE(sol.status == LpStatus::kOptimal);
      CHECK(sol.objective == doctest::Approx(*expected).epsilon(1e-7));
      ++feasible;
    }
  }
  CHECK(feasible > 10);
  CHECK(infeasible > 0);
}

TEST_CASE("warm start after a bound change matches a cold solve") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> coef(0.1, 2.0);
  MilpModel m;
  const int n = 8;
  std::vector<int> all(n);
  for (int j = 0; j < n; ++j) {
    all[j] = add_cont(m, 0.0, 1.0, coef(gen));
  }
  for (int r = 0; r < 4; ++r) {
    std::vector<double> a(n);
    for (double& v : a) v = coef(gen);
    add_row(m, all, a, Sense::kLe, 2.5);
  }
  SimplexSolver warm(m);
  REQUIRE(warm.solve().status == LpStatus::kOptimal);
  warm.set_bounds(0, 0.0, 0.0);
  warm.set_bounds(1, 1.0, 1.0);
  const LpSolution ws = warm.solve();

  SimplexSolver cold(m);
  cold.set_bounds(0, 0.0, 0.0);
  cold.set_bounds(1, 1.0, 1.0);
  const LpSolution cs = cold.solve();
  REQUIRE(ws.status == cs.status);
  if (cs.status == LpStatus::kOptimal) CHECK(ws.objective == doctest::Approx(cs.objective));
}

TEST_CASE("identical models give bit-identical solutions") {
  MilpModel m;
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> coef(-1.0, 2.0);
  std::vector<int> all;
  for (int j = 0; j < 10; ++j) all.push_back(add_cont(m, 0.0, 1.0, coef(gen)));
  for (int r = 0; r < 6; ++r) {
    std::vector<double> a(all.size());
    for (double& v : a) v = coef(gen);
    add_row(m, all, a, r % 2 ? Sense::kLe : Sense::kGe, r % 2 ? 1.5 : -0.5);
  }
  const LpSolution a = solve_lp(m);
  const LpSolution b = solve_lp(m);
  CHECK(a.status == b.status);
  CHECK(a.values == b.values);
  CHECK(a.iterations == b.iterations);
}
