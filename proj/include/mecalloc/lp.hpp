#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "mecalloc/milp.hpp"

namespace mecalloc {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string_view to_string(LpStatus s);

struct LpOptions {
  double feasibility_tol = 1e-7;  // on row-scaled constraints
  double optimality_tol = 1e-9;   // on reduced costs
  double pivot_tol = 1e-9;
  std::int64_t max_iterations = 1'000'000;
  int bland_after_degenerate = 50;
  int refactor_interval = 100;
  // Optional wall-clock cutoff; reported as kIterationLimit.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  std::vector<double> values;  // one per model variable
  double objective = 0.0;      // model objective (maximisation) at values
  std::int64_t iterations = 0;
};

// Copy of `m` with every binary re-declared continuous in [0, 1].
MilpModel relax(const MilpModel& m);

// Bounded-variable primal simplex (revised, sparse LU of the basis with
// product-form updates). Phase 1 minimises the sum of infeasibilities from
// whatever basis is current, so a solver can be re-used with tightened
// bounds and warm-starts from the previous optimal basis.
class SimplexSolver {
 public:
  enum class Status : std::int8_t { kBasic, kAtLower, kAtUpper, kFree };
  using Basis = std::vector<Status>;

  explicit SimplexSolver(const MilpModel& model, LpOptions options = {});

  int num_structural() const { return n_; }

  void set_bounds(int var, double lower, double upper);
  double lower(int var) const { return lo_[var]; }
  double upper(int var) const { return up_[var]; }

  LpSolution solve();

  const Basis& basis() const { return status_; }
  // Adopts a basis from an earlier solve of the same model. Falls back to the
  // slack basis if the size does not match.
  void set_basis(const Basis& b);
  void reset_basis();

  LpOptions& options() { return opts_; }

 private:
  struct Eta {
    int pos;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };

  void place_nonbasic(int j);
  bool refactor();
  void compute_basic_values();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  void column(int j, Eigen::VectorXd& out) const;
  double dot_column(int j, const Eigen::VectorXd& y) const;
  bool infeasible(int v) const;

  const MilpModel& model_;
  LpOptions opts_;
  int n_ = 0;  // structural
  int m_ = 0;  // rows
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<double> row_scale_;

  std::vector<double> lo_, up_, cost_, x_;
  std::vector<Status> status_;
  std::vector<int> head_;

  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  bool stale_ = false;  // nonbasic values moved since the last solve
};

// Solves a model with only continuous variables. Deterministic.
LpSolution solve_lp(const MilpModel& m, const LpOptions& options = {});

}  // namespace mecalloc
