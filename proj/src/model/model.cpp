#include "mecalloc/model.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace mecalloc {

Allocation::Allocation(int num_resources, int num_services, int num_hosts)
    : num_resources_(num_resources),
      num_services_(num_services),
      num_hosts_(num_hosts),
      x_(static_cast<std::size_t>(num_resources) * static_cast<std::size_t>(num_services), 0),
      y_(static_cast<std::size_t>(num_hosts) * static_cast<std::size_t>(num_services), 0),
      f_(static_cast<std::size_t>(num_resources), 0.0) {}

int Allocation::host_of(int j) const {
  for (int m = 0; m < num_hosts_; ++m) {
    if (y(m, j)) return m;
  }
  return -1;
}

int Allocation::placed_count() const {
  int n = 0;
  for (int j = 0; j < num_services_; ++j) n += placed(j) ? 1 : 0;
  return n;
}

std::vector<int> Allocation::resources_of(int j) const {
  std::vector<int> out;
  for (int i = 0; i < num_resources_; ++i) {
    if (x(i, j)) out.push_back(i);
  }
  return out;
}

void Allocation::clear_service(int j) {
  for (int i = 0; i < num_resources_; ++i) set_x(i, j, false);
  for (int m = 0; m < num_hosts_; ++m) set_y(m, j, false);
}

Allocation empty_allocation(const Scenario& s, Requests req) {
  return Allocation(s.num_resources(), static_cast<int>(req.size()), s.num_hosts());
}

bool eligible(const Scenario& s, const ServiceRequest& r, int i) {
  const SensingResource& res = s.resources[i];
  return res.data_type == r.data_type &&
         std::binary_search(r.scope.begin(), r.scope.end(), res.cell);
}

FlowLedger FlowLedger::zeros(const Scenario& s) {
  FlowLedger l;
  const auto hosts = static_cast<std::size_t>(s.num_hosts());
  l.uplink.assign(static_cast<std::size_t>(s.num_sbs()), 0.0);
  l.fronthaul.assign(hosts, 0.0);
  l.backhaul.assign(hosts, std::vector<double>(hosts, 0.0));
  l.used_cpu.assign(hosts, 0.0);
  l.used_storage.assign(hosts, 0.0);
  return l;
}

FlowLedger compute_flows(const Scenario& s, Requests req, const Allocation& a,
                         BackhaulAccounting mode) {
  FlowLedger l = FlowLedger::zeros(s);
  for (int i = 0; i < s.num_resources(); ++i) {
    if (a.f()[i] != 0.0) l.uplink[s.sbs_of_resource(i)] += a.f()[i] * s.payload_of_resource(i);
  }
  for (const MecHost& m : s.hosts) {
    for (int h : m.served_sbs) l.fronthaul[m.id] += l.uplink[h];
  }

  const int num_services = static_cast<int>(req.size());
  if (mode == BackhaulAccounting::kPerService) {
    for (int j = 0; j < num_services; ++j) {
      for (int m2 = 0; m2 < s.num_hosts(); ++m2) {
        if (!a.y(m2, j)) continue;
        for (int i = 0; i < s.num_resources(); ++i) {
          if (!a.x(i, j) || s.resources[i].data_type != req[j].data_type) continue;
          const int m1 = s.host_of_resource(i);
          if (m1 != m2) l.backhaul[m1][m2] += req[j].frequency * s.payload_of_resource(i);
        }
      }
    }
  } else {
    std::vector<double> peak(static_cast<std::size_t>(s.num_resources()));
    for (int m2 = 0; m2 < s.num_hosts(); ++m2) {
      std::fill(peak.begin(), peak.end(), 0.0);
      for (int j = 0; j < num_services; ++j) {
        if (!a.y(m2, j)) continue;
        for (int i = 0; i < s.num_resources(); ++i) {
          if (a.x(i, j) && s.resources[i].data_type == req[j].data_type) {
            peak[i] = std::max(peak[i], req[j].frequency);
          }
        }
      }
      for (int i = 0; i < s.num_resources(); ++i) {
        const int m1 = s.host_of_resource(i);
        if (peak[i] > 0.0 && m1 != m2) l.backhaul[m1][m2] += peak[i] * s.payload_of_resource(i);
      }
    }
  }

  for (int j = 0; j < num_services; ++j) {
    for (int m = 0; m < s.num_hosts(); ++m) {
      if (!a.y(m, j)) continue;
      l.used_cpu[m] += req[j].cpu_demand;
      l.used_storage[m] += storage_demand(s, req[j]);
    }
  }
  return l;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kCpu: return "CPU";
    case ViolationKind::kStorage: return "STORAGE";
    case ViolationKind::kSingleHost: return "SINGLE_HOST";
    case ViolationKind::kCoverage: return "COVERAGE";
    case ViolationKind::kFreqLower: return "FREQ_LOWER";
    case ViolationKind::kFreqUpper: return "FREQ_UPPER";
    case ViolationKind::kUplink: return "UPLINK";
    case ViolationKind::kFronthaul: return "FRONTHAUL";
    case ViolationKind::kBackhaul: return "BACKHAUL";
  }
  return "?";
}

std::vector<Violation> check_feasibility(const Scenario& s, Requests req, const Allocation& a,
                                         double tol) {
  std::vector<Violation> out;
  auto exceeds = [tol](double lhs, double rhs) {
    return lhs > rhs + tol * std::max(1.0, std::abs(rhs));
  };
  const FlowLedger l = compute_flows(s, req, a);
  const int num_services = static_cast<int>(req.size());

  for (const MecHost& m : s.hosts) {
    if (exceeds(l.used_cpu[m.id], m.cpu_capacity)) {
      out.push_back({ViolationKind::kCpu, {m.id}, l.used_cpu[m.id], m.cpu_capacity});
    }
    if (exceeds(l.used_storage[m.id], m.storage_capacity)) {
      out.push_back({ViolationKind::kStorage, {m.id}, l.used_storage[m.id], m.storage_capacity});
    }
  }

  for (int j = 0; j < num_services; ++j) {
    const ServiceRequest& r = req[j];
    int hosts = 0;
    for (int m = 0; m < s.num_hosts(); ++m) hosts += a.y(m, j) ? 1 : 0;
    if (hosts > 1) out.push_back({ViolationKind::kSingleHost, {j}, double(hosts), 1.0});
    for (int k : r.scope) {
      int covered = 0;
      for (int i : s.resources_in(k, r.data_type)) covered += a.x(i, j) ? 1 : 0;
      if (covered != hosts) {
        out.push_back({ViolationKind::kCoverage, {j, k}, double(covered), double(hosts)});
      }
    }
    for (int i = 0; i < s.num_resources(); ++i) {
      if (a.x(i, j) && !eligible(s, r, i)) {
        // Assignment outside the type/scope of the service.
        out.push_back({ViolationKind::kCoverage, {j, -1, i}, 1.0, 0.0});
      }
    }
  }

  for (int i = 0; i < s.num_resources(); ++i) {
    const double f = a.f()[i];
    double upper = 0.0;
    double lower = 0.0;
    for (int j = 0; j < num_services; ++j) {
      if (!a.x(i, j)) continue;
      lower = std::max(lower, req[j].frequency);
      if (eligible(s, req[j], i)) upper += req[j].frequency;
    }
    if (f < 0.0 || lower - f > tol * std::max(1.0, lower)) {
      out.push_back({ViolationKind::kFreqLower, {i}, f, lower});
    }
    if (exceeds(f, upper)) out.push_back({ViolationKind::kFreqUpper, {i}, f, upper});
  }

  for (const BaseStation& b : s.base_stations) {
    if (exceeds(l.uplink[b.id], b.uplink_capacity)) {
      out.push_back({ViolationKind::kUplink, {b.id}, l.uplink[b.id], b.uplink_capacity});
    }
  }
  for (const MecHost& m : s.hosts) {
    if (exceeds(l.fronthaul[m.id], m.fronthaul_capacity)) {
      out.push_back({ViolationKind::kFronthaul, {m.id}, l.fronthaul[m.id], m.fronthaul_capacity});
    }
  }
  for (int m1 = 0; m1 < s.num_hosts(); ++m1) {
    for (int m2 = 0; m2 < s.num_hosts(); ++m2) {
      if (m1 == m2) continue;
      if (exceeds(l.backhaul[m1][m2], s.backhaul_capacity[m1][m2])) {
        out.push_back(
            {ViolationKind::kBackhaul, {m1, m2}, l.backhaul[m1][m2], s.backhaul_capacity[m1][m2]});
      }
    }
  }
  return out;
}

std::string violations_json(std::span<const Violation> v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Violation& x : v) {
    arr.push_back({{"kind", std::string(to_string(x.kind))},
                   {"subjects", x.subjects},
                   {"lhs", x.lhs},
                   {"rhs", x.rhs}});
  }
  return arr.dump();
}

std::vector<double> extract_frequencies(const Scenario& s, Requests req, const Allocation& a) {
  std::vector<double> f(static_cast<std::size_t>(s.num_resources()), 0.0);
  for (int i = 0; i < s.num_resources(); ++i) {
    for (int j = 0; j < static_cast<int>(req.size()); ++j) {
      if (a.x(i, j)) f[i] = std::max(f[i], req[j].frequency);
    }
  }
  return f;
}

ObjectiveTerms objective(const Scenario& s, Requests req, const Allocation& a,
                         const FlowLedger& l) {
  const CostModel& c = s.cost_model;
  ObjectiveTerms t;
  for (int j = 0; j < static_cast<int>(req.size()); ++j) {
    for (int m = 0; m < s.num_hosts(); ++m) t.j_r += a.y(m, j) ? 1.0 : 0.0;
  }
  for (double fh : l.uplink) t.j_edge += c.c_bw1 * fh;
  for (int m = 0; m < s.num_hosts(); ++m) {
    double wired = l.fronthaul[m];
    for (int n = 0; n < s.num_hosts(); ++n) {
      if (n != m) wired += l.backhaul[m][n];
    }
    t.j_edge += c.c_cpu * l.used_cpu[m] + c.c_mem * l.used_storage[m] + c.c_bw2 * wired;
  }
  t.j = t.j_r - c.gamma * t.j_edge;
  return t;
}

ObjectiveTerms objective(const Scenario& s, Requests req, const Allocation& a) {
  return objective(s, req, a, compute_flows(s, req, a));
}

}  // namespace mecalloc
