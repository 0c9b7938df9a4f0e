#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mecalloc {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

struct Cell {
  int id = 0;
  int row = 0;
  int col = 0;
  Point center;
  bool operator==(const Cell&) const = default;
};

struct DataTypeSpec {
  int id = 0;
  double payload = 0.0;         // bits per sample
  double cycles_per_bit = 0.0;  // CPU cycles per payload bit
  bool operator==(const DataTypeSpec&) const = default;
};

struct SensingResource {
  int id = 0;
  int data_type = 0;
  int cell = 0;
  int terminal = 0;
  bool operator==(const SensingResource&) const = default;
};

struct IoTTerminal {
  int id = 0;
  Point position;
  std::vector<int> resources;
  int associated_sbs = 0;
  bool operator==(const IoTTerminal&) const = default;
};

struct BaseStation {
  int id = 0;
  Point position;
  double coverage_radius = 0.0;  // meters
  double uplink_capacity = 0.0;  // bits/second
  bool operator==(const BaseStation&) const = default;
};

struct MecHost {
  int id = 0;
  std::vector<int> served_sbs;
  double cpu_capacity = 0.0;        // cycles/second
  double storage_capacity = 0.0;    // bits
  double fronthaul_capacity = 0.0;  // bits/second
  bool operator==(const MecHost&) const = default;
};

// Unit prices of leased resources plus the cost weight of the objective.
struct CostModel {
  double c_bw1 = 0.0;  // per bit/second of wireless uplink
  double c_bw2 = 0.0;  // per bit/second of wired link
  double c_cpu = 0.0;  // per cycle/second
  double c_mem = 0.0;  // per bit of storage
  double gamma = 1.0;
  bool operator==(const CostModel&) const = default;
};

// Immutable world model. Construct through generate_grid_scenario(),
// read_scenario() or by filling the fields and calling finalize(); the
// lookup tables at the bottom are derived and not part of equality.
struct Scenario {
  std::vector<Cell> cells;
  std::vector<DataTypeSpec> data_types;
  std::vector<SensingResource> resources;
  std::vector<IoTTerminal> terminals;
  std::vector<BaseStation> base_stations;
  std::vector<MecHost> hosts;
  // backhaul_capacity[m1][m2], bits/second; diagonal unused and kept at 0.
  std::vector<std::vector<double>> backhaul_capacity;
  CostModel cost_model;
  double area_side = 0.0;
  double cell_side = 0.0;
  std::uint64_t rng_seed = 0;

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_types() const { return static_cast<int>(data_types.size()); }
  int num_resources() const { return static_cast<int>(resources.size()); }
  int num_terminals() const { return static_cast<int>(terminals.size()); }
  int num_sbs() const { return static_cast<int>(base_stations.size()); }
  int num_hosts() const { return static_cast<int>(hosts.size()); }

  int sbs_of_resource(int i) const { return resource_sbs_[i]; }
  int host_of_resource(int i) const { return resource_host_[i]; }
  int host_of_sbs(int h) const { return sbs_host_[h]; }
  double payload_of_resource(int i) const {
    return data_types[resources[i].data_type].payload;
  }
  // Resources of data type l located in cell k, ascending id.
  std::span<const int> resources_in(int k, int l) const {
    return cell_type_resources_[static_cast<std::size_t>(k) * data_types.size() +
                                static_cast<std::size_t>(l)];
  }

  // Validates every invariant and rebuilds the lookup tables. Throws
  // ParseError naming the offending field.
  void finalize();

  bool operator==(const Scenario& other) const;

 private:
  std::vector<int> resource_sbs_;
  std::vector<int> resource_host_;
  std::vector<int> sbs_host_;
  std::vector<std::vector<int>> cell_type_resources_;
};

struct ServiceRequest {
  int id = 0;
  int data_type = 0;
  std::vector<int> scope;           // cell ids, ascending, distinct
  double frequency = 0.0;           // Hz
  double cpu_demand = 0.0;          // cycles/second
  double persistent_storage = 0.0;  // bits
  std::string class_tag;
  bool operator==(const ServiceRequest&) const = default;
};

// Storage footprint of a placed service: persistent state plus one sample
// buffer per scope cell.
double storage_demand(const Scenario& s, const ServiceRequest& r);

// Throws ParseError if the request violates its invariants against s.
void validate_request(const Scenario& s, const ServiceRequest& r);

// --- generation -----------------------------------------------------------

struct SliceCapacities {
  double cpu = 0.0;        // per host, cycles/second
  double storage = 0.0;    // per host, bits
  double uplink = 0.0;     // per SBS, bits/second
  double backhaul = 0.0;   // per ordered host pair, bits/second
  double fronthaul = 0.0;  // per host; 0 means sum of served SBS uplinks
};

SliceCapacities scen_a_slice();
SliceCapacities scen_b_slice();

// Video (2 Mb frames, 40 cycles/bit) and audio (1 Mb, 30 cycles/bit).
std::vector<DataTypeSpec> default_data_types();

struct GridParams {
  double area_side = 400.0;
  double cell_side = 20.0;
  int sbs_rows = 3;
  int sbs_cols = 4;
  double coverage_radius = 120.0;
  int num_terminals = 1200;
  // Stratified placement: this many terminals are first dropped uniformly
  // inside every cell, the rest uniformly over the whole area.
  int min_terminals_per_cell = 0;
  int resources_per_type = 1;
  std::vector<DataTypeSpec> data_types = default_data_types();
  SliceCapacities slice = scen_a_slice();
  CostModel cost_model;  // gamma <= 0 selects default_gamma()
};

// Unit prices: 1 per Mbps (wireless and wired), 1 per GHz, 1 per GB.
CostModel default_cost_model();

// Cost of the whole slice at saturation of every capacity.
double saturation_cost(const Scenario& s);

// 0.9 / saturation_cost: one more admitted service always outweighs cost.
double default_gamma(const Scenario& s);

GridParams paper_params();
GridParams desk_params();

Scenario generate_grid_scenario(const GridParams& params, std::uint64_t seed);

// Nearest SBS per terminal, ties to the lowest SBS id. Throws GenerationError
// if a terminal lies outside the coverage radius of its nearest SBS.
std::vector<int> associate_terminals(std::span<const IoTTerminal> terminals,
                                     std::span<const BaseStation> sbs);

// --- workload ---------------------------------------------------------------

struct ServiceTemplate {
  std::string class_tag;
  int data_type = 0;
  double frequency_min = 0.0;
  double frequency_max = 0.0;
  double storage_min = 0.0;  // bits
  double storage_max = 0.0;  // bits
  int scope_size = 0;
};

ServiceTemplate vr_template();
ServiceTemplate ac_template();

// Cells nearest to (1/4, 1/4) and (3/4, 3/4) of the area.
std::vector<int> default_pois(const Scenario& s);

// Per-PoI Zipf over distance rank (rank 1 = PoI cell), superimposed and
// renormalised. alpha = 0 gives the uniform distribution.
std::vector<double> zipf_cell_popularity(std::span<const int> pois, double alpha,
                                         std::span<const Cell> cells);

// Draws `count` requests; request j uses catalog[j % catalog.size()]. Scope
// cells are drawn without replacement from cell_popularity; cpu_demand is
// frequency * payload * cycles_per_bit * |scope|.
std::vector<ServiceRequest> sample_service_requests(
    const Scenario& s, std::span<const ServiceTemplate> catalog, int count,
    std::span<const double> cell_popularity, std::uint64_t seed);

struct Instance {
  Scenario scenario;
  std::vector<ServiceRequest> requests;
};

// Small enough for exhaustive enumeration: 40 m area with 4 cells, 2 SBSs
// and 2 hosts, 4 to 6 single-resource terminals of one data type, and
// randomised tight capacities so that admission decisions matter.
Instance tiny_instance(std::uint64_t seed, int num_services = 3);

}  // namespace mecalloc
