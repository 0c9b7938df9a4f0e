#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mecalloc/lp.hpp"
#include "mecalloc/milp.hpp"
#include "mecalloc/model.hpp"
#include "mecalloc/rng.hpp"

namespace mecalloc {

enum class RejectCause { kNone, kCpu, kStorage, kFronthaul, kBackhaul };

std::string_view to_string(RejectCause c);

struct ServiceOutcome {
  bool deployed = false;
  RejectCause cause = RejectCause::kNone;
};

// Work counters, per service maxima over a run.
struct PolicyCounters {
  int max_host_tests = 0;      // hosts whose capacities were tested for one service
  int max_resource_tests = 0;  // (cell, resource) activation tests for one service
};

// Working state shared by the placement policies. The ledger always equals
// compute_flows() of the partial allocation: it is recomputed after each
// committed service and restored from a snapshot after a failed attempt.
struct PolicyState {
  PolicyState(const Scenario& s, Requests req, std::uint64_t seed);

  const Scenario& scenario;
  Requests requests;
  Allocation alloc;
  FlowLedger ledger;
  std::vector<char> tested;  // services already visited
  Rng rng;
  PolicyCounters counters;
  int host_tests = 0;      // for the service being visited
  int resource_tests = 0;  // for the service being visited

  bool fits_cpu(int m, int j) const;
  bool fits_storage(int m, int j) const;

  // Rolls the counters of the current service into the maxima.
  void finish_service();
};

struct PolicyReport {
  std::string policy;
  Allocation allocation;
  std::vector<ServiceOutcome> outcomes;
  ObjectiveTerms objective;
  double runtime_s = 0.0;
  PolicyCounters counters;
  bool lp_integral = false;  // LR only: the relaxation was already integral

  int deployed() const;
};

inline constexpr double kDefaultMu = 0.01;

// Sensor allocation for service j on host m (y tentatively set by the caller).
// Cells are visited in random order; in each cell the eligible resources with
// x_ij > mu are tried by decreasing x value, ties to the lower id, and the
// first one that keeps uplink, fronthaul and backhaul within capacity is
// activated at rate max(f_i, lambda_j). On an uncoverable cell every change
// made here is undone and false is returned.
bool allocate_sensors(PolicyState& state, int m, int j, const MilpModel& model,
                      std::span<const double> relaxed, double mu);

// Rounding heuristic on a solved relaxation of `model` = build_milp(s, req).
PolicyReport lr_round(const Scenario& s, Requests req, const MilpModel& model,
                      const LpSolution& relaxed, double mu = kDefaultMu,
                      std::uint64_t seed = 0);

// Builds and solves the relaxation, then rounds. Runtime covers both.
PolicyReport lr_solve(const Scenario& s, Requests req, double mu = kDefaultMu,
                      std::uint64_t seed = 0);

PolicyReport greedy_first_fit(const Scenario& s, Requests req, std::uint64_t seed);
PolicyReport greedy_best_fit(const Scenario& s, Requests req, std::uint64_t seed);
PolicyReport dsp_place(const Scenario& s, Requests req);

// Why service j cannot be deployed on top of `state`: no candidate host with
// CPU room, then none with CPU and storage room, then some scope cell that
// cannot be covered within uplink and fronthaul capacity; otherwise BACKHAUL.
// Candidates are the hosts the policy was willing to try; empty means all.
// Throws ContractError if j is deployed in state.
RejectCause classify_reject(const Scenario& s, Requests req, const PolicyState& state, int j,
                            std::span<const int> candidates = {});

}  // namespace mecalloc
