#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "mecalloc/exact.hpp"

namespace mecalloc {

std::string_view to_string(BnbStatus s) {
  switch (s) {
    case BnbStatus::kOptimal: return "OPTIMAL";
    case BnbStatus::kTimeLimit: return "TIME_LIMIT";
    case BnbStatus::kInfeasible: return "INFEASIBLE";
  }
  return "?";
}

namespace {

constexpr double kIntegralTol = 1e-6;

struct Node {
  std::vector<std::pair<int, double>> fixes;  // binary var -> 0 or 1
  double bound = 0.0;                         // parent's LP bound
  int depth = 0;
  std::int64_t order = 0;
  std::shared_ptr<const SimplexSolver::Basis> basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.order > b.order;
  }
};

// Most fractional binary of the first role that has one; -1 if integral.
int pick_branch_var(const MilpModel& m, const std::vector<double>& v) {
  for (VarRole role : {VarRole::kY, VarRole::kX, VarRole::kTheta}) {
    int best = -1;
    double best_dist = 1.0;
    for (int k = 0; k < m.num_variables(); ++k) {
      const Variable& var = m.variables[k];
      if (var.kind != VarKind::kBinary || var.role != role) continue;
      const double frac = v[k] - std::floor(v[k]);
      if (frac <= kIntegralTol || frac >= 1.0 - kIntegralTol) continue;
      const double dist = std::abs(v[k] - 0.5);
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    if (best >= 0) return best;
  }
  return -1;
}

}  // namespace

BnbReport branch_and_bound(const Scenario& s, Requests req, const BnbOptions& options) {
  return branch_and_bound(s, req, build_milp(s, req), options);
}

BnbReport branch_and_bound(const Scenario& s, Requests req, const MilpModel& m,
                           const BnbOptions& options) {
  using Clock = std::chrono::steady_clock;
  const Clock::time_point start = Clock::now();
  LpOptions lp = options.lp;
  if (options.time_budget_s > 0.0) {
    lp.deadline = start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(options.time_budget_s));
  }

  BnbReport rep;
  rep.incumbent = empty_allocation(s, req);
  rep.incumbent_objective = 0.0;  // nothing placed is always feasible
  if (options.initial && check_feasibility(s, req, *options.initial).empty()) {
    const double j = objective(s, req, *options.initial).j;
    if (j > rep.incumbent_objective) {
      rep.incumbent = *options.initial;
      rep.incumbent_objective = j;
    }
  }

  const MilpModel relaxed = relax(m);
  SimplexSolver solver(relaxed, lp);
  std::vector<double> root_lo(static_cast<std::size_t>(m.num_variables()));
  std::vector<double> root_up(root_lo.size());
  for (int k = 0; k < m.num_variables(); ++k) {
    root_lo[k] = relaxed.variables[k].lower;
    root_up[k] = relaxed.variables[k].upper;
  }
  std::vector<int> applied;

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  std::int64_t created = 0;
  bool out_of_time = false;
  bool root_done = false;

  auto offer = [&](Allocation&& a) {
    if (!check_feasibility(s, req, a).empty()) return false;
    const double j = objective(s, req, a).j;
    if (j <= rep.incumbent_objective) return false;
    rep.incumbent = std::move(a);
    rep.incumbent_objective = j;
    return true;
  };
  auto try_incumbent = [&](const std::vector<double>& values) {
    Allocation a = allocation_from_point(m, values);
    a.f() = extract_frequencies(s, req, a);
    offer(std::move(a));
  };
  auto run_heuristic = [&](const std::vector<double>& values) {
    if (!options.heuristic) return;
    const int every = std::max(1, options.heuristic_every);
    if ((rep.nodes_explored - 1) % every != 0) return;
    if (std::optional<Allocation> a = options.heuristic(values)) {
      rep.heuristic_improvements += offer(std::move(*a));
    }
  };

  std::optional<Node> next = Node{{}, std::numeric_limits<double>::infinity(), 0, created++, {}};
  while (next || !open.empty()) {
    Node node;
    if (next) {
      node = std::move(*next);
      next.reset();
    } else {
      node = open.top();
      open.pop();
    }
    if (node.bound <= rep.incumbent_objective + options.prune_tol) continue;
    if ((options.node_limit >= 0 && rep.nodes_explored >= options.node_limit) ||
        (lp.deadline && Clock::now() >= *lp.deadline)) {
      open.push(std::move(node));
      out_of_time = true;
      break;
    }

    for (int k : applied) solver.set_bounds(k, root_lo[k], root_up[k]);
    applied.clear();
    for (const auto& [k, v] : node.fixes) {
      solver.set_bounds(k, v, v);
      applied.push_back(k);
    }
    if (node.basis) solver.set_basis(*node.basis);

    const LpSolution sol = solver.solve();
    ++rep.nodes_explored;
    rep.lp_iterations += sol.iterations;
    if (sol.status == LpStatus::kIterationLimit) {
      open.push(std::move(node));
      out_of_time = true;
      break;
    }
    if (!root_done) {
      root_done = true;
      if (sol.status != LpStatus::kOptimal) {
        rep.status = BnbStatus::kInfeasible;
        rep.best_bound = rep.root_bound = -std::numeric_limits<double>::infinity();
        rep.gap = 0.0;
        return rep;
      }
      rep.root_bound = sol.objective;
    }
    if (sol.status != LpStatus::kOptimal) continue;
    if (std::isfinite(node.bound)) {
      rep.max_bound_increase = std::max(rep.max_bound_increase, sol.objective - node.bound);
    }
    const double bound = std::min(sol.objective, node.bound);
    if (bound <= rep.incumbent_objective + options.prune_tol) continue;

    const int var = pick_branch_var(m, sol.values);
    if (var < 0) {
      try_incumbent(sol.values);
      continue;
    }
    run_heuristic(sol.values);
    if (bound <= rep.incumbent_objective + options.prune_tol) continue;

    auto basis = std::make_shared<const SimplexSolver::Basis>(solver.basis());
    const double first = sol.values[var] >= 0.5 ? 1.0 : 0.0;
    Node dive{node.fixes, bound, node.depth + 1, created++, basis};
    dive.fixes.emplace_back(var, first);
    Node other{std::move(node.fixes), bound, node.depth + 1, created++, basis};
    other.fixes.emplace_back(var, 1.0 - first);
    open.push(std::move(other));
    next = std::move(dive);
  }

  double bound = rep.incumbent_objective;
  if (out_of_time) {
    rep.status = BnbStatus::kTimeLimit;
    // Open nodes carry their parent's bound; the root may be unsolved.
    while (!open.empty()) {
      bound = std::max(bound, open.top().bound);
      open.pop();
    }
    if (!root_done) rep.root_bound = bound;
  } else {
    rep.status = BnbStatus::kOptimal;
  }
  rep.best_bound = bound;
  rep.gap = (rep.best_bound - rep.incumbent_objective) /
            std::max(1.0, std::abs(rep.incumbent_objective));
  return rep;
}

}  // namespace mecalloc
