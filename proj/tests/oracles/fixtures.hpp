#pragma once

// Shared test fixtures: small scenarios and random allocations.

#include <random>
#include <vector>

#include "mecalloc/model.hpp"
#include "mecalloc/scenario.hpp"
#include "mecalloc/units.hpp"

namespace fixture {

using namespace mecalloc;

// Two hosts, each serving one SBS; a 2x2 cell grid with the left column
// under SBS 0 and the right column under SBS 1. One data type, 2 Mb samples,
// one resource per terminal and `per_cell` terminals per cell.
inline Scenario two_host_line(int per_cell = 1) {
  Scenario s;
  s.area_side = 40.0;
  s.cell_side = 20.0;
  s.data_types = {{0, 2 * units::kMb, 40.0}};
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 2; ++col) {
      s.cells.push_back({row * 2 + col, row, col, {col * 20.0 + 10.0, row * 20.0 + 10.0}});
    }
  }
  s.base_stations = {{0, {10.0, 20.0}, 30.0, 10 * units::kMbps},
                     {1, {30.0, 20.0}, 30.0, 10 * units::kMbps}};
  for (const Cell& c : s.cells) {
    for (int q = 0; q < per_cell; ++q) {
      IoTTerminal t;
      t.id = s.num_terminals();
      t.position = {c.center.x + 0.1 * q, c.center.y};
      t.associated_sbs = c.col;
      t.resources = {s.num_resources()};
      s.resources.push_back({s.num_resources(), 0, c.id, t.id});
      s.terminals.push_back(t);
    }
  }
  s.hosts = {{0, {0}, 2 * units::kGHz, 10 * units::kGB, 10 * units::kMbps},
             {1, {1}, 2 * units::kGHz, 10 * units::kGB, 10 * units::kMbps}};
  s.backhaul_capacity = {{0.0, 4 * units::kMbps}, {4 * units::kMbps, 0.0}};
  s.cost_model = default_cost_model();
  s.cost_model.gamma = 1.0;
  s.cost_model.gamma = default_gamma(s);
  s.finalize();
  return s;
}

inline ServiceRequest request(const Scenario& s, int id, std::vector<int> scope, double lambda,
                              double storage_gb = 1.0) {
  ServiceRequest r;
  r.id = id;
  r.data_type = 0;
  r.scope = std::move(scope);
  r.frequency = lambda;
  r.persistent_storage = storage_gb * units::kGB;
  const DataTypeSpec& d = s.data_types[0];
  r.cpu_demand = lambda * d.payload * d.cycles_per_bit * static_cast<double>(r.scope.size());
  r.class_tag = "VR";
  return r;
}

// Each service is placed with probability `p_place` on a uniform host and
// covered by a uniform eligible resource per scope cell; rates follow the
// max rule. Capacities are ignored.
inline Allocation random_allocation(const Scenario& s, Requests req, std::mt19937_64& gen,
                                    double p_place = 0.6) {
  Allocation a = empty_allocation(s, req);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int j = 0; j < static_cast<int>(req.size()); ++j) {
    if (u(gen) >= p_place) continue;
    bool ok = true;
    for (int k : req[j].scope) ok = ok && !s.resources_in(k, req[j].data_type).empty();
    if (!ok) continue;
    a.set_y(static_cast<int>(gen() % static_cast<unsigned>(s.num_hosts())), j, true);
    for (int k : req[j].scope) {
      const auto cand = s.resources_in(k, req[j].data_type);
      a.set_x(cand[gen() % cand.size()], j, true);
    }
  }
  a.f() = extract_frequencies(s, req, a);
  return a;
}

}  // namespace fixture
