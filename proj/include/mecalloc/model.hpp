#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mecalloc/scenario.hpp"

namespace mecalloc {

using Requests = std::span<const ServiceRequest>;

// Decision triple: resource->service assignment x, service->host placement y,
// per-resource sampling rate f. Dense storage so that the feasibility checker
// can see (and report) anything, including double placements.
class Allocation {
 public:
  Allocation() = default;
  Allocation(int num_resources, int num_services, int num_hosts);

  int num_resources() const { return num_resources_; }
  int num_services() const { return num_services_; }
  int num_hosts() const { return num_hosts_; }

  bool x(int i, int j) const { return x_[index_x(i, j)] != 0; }
  void set_x(int i, int j, bool v) { x_[index_x(i, j)] = v ? 1 : 0; }
  bool y(int m, int j) const { return y_[index_y(m, j)] != 0; }
  void set_y(int m, int j, bool v) { y_[index_y(m, j)] = v ? 1 : 0; }

  std::vector<double>& f() { return f_; }
  const std::vector<double>& f() const { return f_; }

  // First host with y = 1, or -1.
  int host_of(int j) const;
  bool placed(int j) const { return host_of(j) >= 0; }
  int placed_count() const;
  // Resources assigned to service j, ascending id.
  std::vector<int> resources_of(int j) const;
  // Clears x and y entries of service j (rates untouched).
  void clear_service(int j);

  bool operator==(const Allocation&) const = default;

 private:
  std::size_t index_x(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(num_services_) +
           static_cast<std::size_t>(j);
  }
  std::size_t index_y(int m, int j) const {
    return static_cast<std::size_t>(m) * static_cast<std::size_t>(num_services_) +
           static_cast<std::size_t>(j);
  }

  int num_resources_ = 0;
  int num_services_ = 0;
  int num_hosts_ = 0;
  std::vector<std::uint8_t> x_;
  std::vector<std::uint8_t> y_;
  std::vector<double> f_;
};

Allocation empty_allocation(const Scenario& s, Requests req);

// x_ij may be 1 only when l(i) = l_j and c(i) lies in the scope of j.
bool eligible(const Scenario& s, const ServiceRequest& r, int i);

// How host-to-host streams are counted. kPerService follows the model: one
// stream per (service, resource) at the service rate. kDeduplicated sends a
// resource at most once per destination host, at the largest rate needed
// there; exploratory only, the MILP and all policies use kPerService.
enum class BackhaulAccounting { kPerService, kDeduplicated };

struct FlowLedger {
  std::vector<double> uplink;                   // F_h per SBS
  std::vector<double> fronthaul;                // F_m per host
  std::vector<std::vector<double>> backhaul;    // F_{m1,m2}, diagonal 0
  std::vector<double> used_cpu;                 // per host
  std::vector<double> used_storage;             // per host

  static FlowLedger zeros(const Scenario& s);
  bool operator==(const FlowLedger&) const = default;
};

FlowLedger compute_flows(const Scenario& s, Requests req, const Allocation& a,
                         BackhaulAccounting mode = BackhaulAccounting::kPerService);

enum class ViolationKind {
  kCpu,
  kStorage,
  kSingleHost,
  kCoverage,
  kFreqLower,
  kFreqUpper,
  kUplink,
  kFronthaul,
  kBackhaul,
};

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::vector<int> subjects;
  double lhs = 0.0;
  double rhs = 0.0;
};

inline constexpr double kDefaultFeasibilityTol = 1e-6;

// Every constraint family of the placement model. A capacity constraint
// lhs <= rhs is violated when lhs > rhs + tol * max(1, |rhs|).
std::vector<Violation> check_feasibility(const Scenario& s, Requests req, const Allocation& a,
                                         double tol = kDefaultFeasibilityTol);

std::string violations_json(std::span<const Violation> v);

// f_i = max{lambda_j : x_ij = 1}, 0 for unused resources.
std::vector<double> extract_frequencies(const Scenario& s, Requests req, const Allocation& a);

struct ObjectiveTerms {
  double j_r = 0.0;     // number of placed services
  double j_edge = 0.0;  // leased-resource cost
  double j = 0.0;       // j_r - gamma * j_edge
};

ObjectiveTerms objective(const Scenario& s, Requests req, const Allocation& a,
                         const FlowLedger& ledger);
ObjectiveTerms objective(const Scenario& s, Requests req, const Allocation& a);

}  // namespace mecalloc
