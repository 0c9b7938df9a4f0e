#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "mecalloc/lp.hpp"
#include "mecalloc/milp.hpp"
#include "mecalloc/model.hpp"

namespace mecalloc {

enum class BnbStatus { kOptimal, kTimeLimit, kInfeasible };

std::string_view to_string(BnbStatus s);

struct BnbOptions {
  double time_budget_s = 60.0;  // <= 0: no limit
  std::int64_t node_limit = -1;  // < 0: no limit
  // Recorded for reproducibility only; the search itself has no random choices.
  std::uint64_t seed = 0;
  // Feasible starting incumbent, e.g. from a heuristic. Ignored if infeasible.
  std::optional<Allocation> initial;
  // Nodes whose bound exceeds the incumbent by no more than this are pruned.
  double prune_tol = 1e-9;
  // Primal heuristic run on the LP point of the root and of every
  // heuristic_every-th node after it. Infeasible results are ignored.
  std::function<std::optional<Allocation>(std::span<const double>)> heuristic;
  int heuristic_every = 25;
  LpOptions lp;
};

struct BnbReport {
  Allocation incumbent;
  double incumbent_objective = 0.0;
  double best_bound = 0.0;
  double root_bound = 0.0;
  double gap = 0.0;  // (best_bound - incumbent) / max(1, |incumbent|)
  std::int64_t nodes_explored = 0;
  std::int64_t lp_iterations = 0;
  BnbStatus status = BnbStatus::kInfeasible;
  // Largest amount by which a child LP bound exceeded its parent's.
  double max_bound_increase = 0.0;
  int heuristic_improvements = 0;
};

// Best-bound branch-and-bound with depth-first plunging over the binaries of
// build_milp(s, req). Children re-solve the parent's LP from its basis.
// Branching: most fractional y, then x, then theta; ties to the lowest id.
// Incumbents are rounded LP points, re-evaluated with extract_frequencies,
// check_feasibility and objective().
BnbReport branch_and_bound(const Scenario& s, Requests req, const BnbOptions& options = {});
BnbReport branch_and_bound(const Scenario& s, Requests req, const MilpModel& m,
                           const BnbOptions& options = {});

struct EnumerationResult {
  Allocation allocation;
  double objective = 0.0;
  std::int64_t candidates = 0;  // feasible combinations evaluated
};

inline constexpr int kEnumerationMaxSlots = 8;            // hosts x services
inline constexpr int kEnumerationMaxCellResources = 3;    // per scope cell

// Exhaustive oracle for tiny instances: every admission subset, host choice
// and per-cell resource choice. Ties go to the lexicographically smallest
// (y, x). Throws ContractError beyond the size guard.
EnumerationResult enumerate_optimum(const Scenario& s, Requests req);

}  // namespace mecalloc
