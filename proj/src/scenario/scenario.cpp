#include "mecalloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mecalloc/errors.hpp"
#include "mecalloc/rng.hpp"
#include "mecalloc/units.hpp"

namespace mecalloc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParseError(what);
}

std::string at(const char* field, std::size_t idx) {
  return std::string(field) + "[" + std::to_string(idx) + "]";
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void Scenario::finalize() {
  require(area_side > 0.0, "area_side: must be > 0");
  require(cell_side > 0.0, "cell_side: must be > 0");
  require(!data_types.empty(), "data_types: must not be empty");

  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Cell& c = cells[k];
    require(c.id == static_cast<int>(k), at("cells", k) + ".id: ids must be dense");
    require(c.center.x >= 0.0 && c.center.x <= area_side && c.center.y >= 0.0 &&
                c.center.y <= area_side,
            at("cells", k) + ".center: outside the reference area");
  }
  for (std::size_t l = 0; l < data_types.size(); ++l) {
    const DataTypeSpec& d = data_types[l];
    require(d.id == static_cast<int>(l), at("data_types", l) + ".id: ids must be dense");
    require(d.payload > 0.0, at("data_types", l) + ".payload: must be > 0");
    require(d.cycles_per_bit >= 0.0, at("data_types", l) + ".cycles_per_bit: must be >= 0");
  }
  for (std::size_t h = 0; h < base_stations.size(); ++h) {
    const BaseStation& b = base_stations[h];
    require(b.id == static_cast<int>(h), at("base_stations", h) + ".id: ids must be dense");
    require(b.coverage_radius > 0.0, at("base_stations", h) + ".coverage_radius: must be > 0");
    require(b.uplink_capacity >= 0.0, at("base_stations", h) + ".uplink_capacity: must be >= 0");
  }
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const SensingResource& r = resources[i];
    require(r.id == static_cast<int>(i), at("resources", i) + ".id: ids must be dense");
    require(r.data_type >= 0 && r.data_type < num_types(),
            at("resources", i) + ".data_type: unknown data type");
    require(r.cell >= 0 && r.cell < num_cells(), at("resources", i) + ".cell: unknown cell");
    require(r.terminal >= 0 && r.terminal < num_terminals(),
            at("resources", i) + ".terminal: unknown terminal");
  }
  std::vector<int> owner_count(resources.size(), 0);
  for (std::size_t t = 0; t < terminals.size(); ++t) {
    const IoTTerminal& term = terminals[t];
    require(term.id == static_cast<int>(t), at("terminals", t) + ".id: ids must be dense");
    require(term.associated_sbs >= 0 && term.associated_sbs < num_sbs(),
            at("terminals", t) + ".associated_sbs: unknown base station");
    const BaseStation& b = base_stations[term.associated_sbs];
    require(distance(term.position, b.position) <= b.coverage_radius * (1.0 + 1e-12),
            at("terminals", t) + ".associated_sbs: terminal outside coverage");
    for (int i : term.resources) {
      require(i >= 0 && i < num_resources(), at("terminals", t) + ".resources: unknown resource");
      require(resources[i].terminal == static_cast<int>(t),
              at("terminals", t) + ".resources: resource owned by another terminal");
      ++owner_count[i];
    }
  }
  for (std::size_t i = 0; i < resources.size(); ++i) {
    require(owner_count[i] == 1, at("resources", i) + ".terminal: not listed exactly once by its terminal");
  }

  sbs_host_.assign(base_stations.size(), -1);
  for (std::size_t m = 0; m < hosts.size(); ++m) {
    const MecHost& host = hosts[m];
    require(host.id == static_cast<int>(m), at("hosts", m) + ".id: ids must be dense");
    require(host.cpu_capacity >= 0.0, at("hosts", m) + ".cpu_capacity: must be >= 0");
    require(host.storage_capacity >= 0.0, at("hosts", m) + ".storage_capacity: must be >= 0");
    require(host.fronthaul_capacity >= 0.0, at("hosts", m) + ".fronthaul_capacity: must be >= 0");
    for (int h : host.served_sbs) {
      require(h >= 0 && h < num_sbs(), at("hosts", m) + ".served_sbs: unknown base station");
      require(sbs_host_[h] < 0, at("hosts", m) + ".served_sbs: base station served twice");
      sbs_host_[h] = static_cast<int>(m);
    }
  }
  for (std::size_t h = 0; h < base_stations.size(); ++h) {
    require(sbs_host_[h] >= 0, at("base_stations", h) + ": not served by any host");
  }

  require(backhaul_capacity.size() == hosts.size(),
          "backhaul_capacity: expected one row per host");
  for (std::size_t a = 0; a < hosts.size(); ++a) {
    require(backhaul_capacity[a].size() == hosts.size(),
            at("backhaul_capacity", a) + ": expected one entry per host");
    for (std::size_t b = 0; b < hosts.size(); ++b) {
      if (a == b) continue;
      const double v = backhaul_capacity[a][b];
      require(std::isfinite(v) && v >= 0.0,
              at("backhaul_capacity", a) + "[" + std::to_string(b) + "]: must be >= 0");
    }
  }

  const CostModel& c = cost_model;
  require(c.c_bw1 >= 0.0, "cost_model.c_bw1: must be >= 0");
  require(c.c_bw2 >= 0.0, "cost_model.c_bw2: must be >= 0");
  require(c.c_cpu >= 0.0, "cost_model.c_cpu: must be >= 0");
  require(c.c_mem >= 0.0, "cost_model.c_mem: must be >= 0");
  require(c.gamma > 0.0, "cost_model.gamma: must be > 0");

  resource_sbs_.resize(resources.size());
  resource_host_.resize(resources.size());
  cell_type_resources_.assign(cells.size() * data_types.size(), {});
  for (const SensingResource& r : resources) {
    const int h = terminals[r.terminal].associated_sbs;
    resource_sbs_[r.id] = h;
    resource_host_[r.id] = sbs_host_[h];
    cell_type_resources_[static_cast<std::size_t>(r.cell) * data_types.size() +
                         static_cast<std::size_t>(r.data_type)]
        .push_back(r.id);
  }
}

bool Scenario::operator==(const Scenario& o) const {
  return cells == o.cells && data_types == o.data_types && resources == o.resources &&
         terminals == o.terminals && base_stations == o.base_stations && hosts == o.hosts &&
         backhaul_capacity == o.backhaul_capacity && cost_model == o.cost_model &&
         area_side == o.area_side && cell_side == o.cell_side && rng_seed == o.rng_seed;
}

double storage_demand(const Scenario& s, const ServiceRequest& r) {
  return r.persistent_storage +
         s.data_types[r.data_type].payload * static_cast<double>(r.scope.size());
}

void validate_request(const Scenario& s, const ServiceRequest& r) {
  const std::string tag = "requests[" + std::to_string(r.id) + "]";
  require(r.data_type >= 0 && r.data_type < s.num_types(), tag + ".data_type: unknown data type");
  require(!r.scope.empty(), tag + ".scope: must not be empty");
  for (std::size_t q = 0; q < r.scope.size(); ++q) {
    require(r.scope[q] >= 0 && r.scope[q] < s.num_cells(), tag + ".scope: unknown cell");
    require(q == 0 || r.scope[q - 1] < r.scope[q], tag + ".scope: must be ascending and distinct");
  }
  require(r.frequency > 0.0, tag + ".frequency: must be > 0");
  require(r.cpu_demand >= 0.0, tag + ".cpu_demand: must be >= 0");
  require(r.persistent_storage >= 0.0, tag + ".persistent_storage: must be >= 0");
}

// ---------------------------------------------------------------------------

SliceCapacities scen_a_slice() {
  return {4 * units::kGHz, 20 * units::kGB, 60 * units::kMbps, 10 * units::kMbps, 0.0};
}

SliceCapacities scen_b_slice() {
  return {2 * units::kGHz, 15 * units::kGB, 30 * units::kMbps, 5 * units::kMbps, 0.0};
}

std::vector<DataTypeSpec> default_data_types() {
  return {{0, 2 * units::kMb, 40.0}, {1, 1 * units::kMb, 30.0}};
}

CostModel default_cost_model() {
  return {1.0 / units::kMbps, 1.0 / units::kMbps, 1.0 / units::kGHz, 1.0 / units::kGB, 0.0};
}

double saturation_cost(const Scenario& s) {
  const CostModel& c = s.cost_model;
  double total = 0.0;
  for (const BaseStation& b : s.base_stations) total += c.c_bw1 * b.uplink_capacity;
  for (const MecHost& m : s.hosts) {
    double wired = m.fronthaul_capacity;
    for (int n = 0; n < s.num_hosts(); ++n) {
      if (n != m.id) wired += s.backhaul_capacity[m.id][n];
    }
    total += c.c_cpu * m.cpu_capacity + c.c_mem * m.storage_capacity + c.c_bw2 * wired;
  }
  return total;
}

double default_gamma(const Scenario& s) {
  const double cost = saturation_cost(s);
  return cost > 0.0 ? 0.9 / cost : 1.0;
}

GridParams paper_params() {
  GridParams p;
  p.min_terminals_per_cell = 1;
  p.cost_model = default_cost_model();
  return p;
}

GridParams desk_params() {
  GridParams p = paper_params();
  p.area_side = 160.0;
  p.sbs_rows = 2;
  p.sbs_cols = 2;
  p.num_terminals = 120;
  return p;
}

std::vector<int> associate_terminals(std::span<const IoTTerminal> terminals,
                                     std::span<const BaseStation> sbs) {
  std::vector<int> psi(terminals.size(), -1);
  for (std::size_t t = 0; t < terminals.size(); ++t) {
    double best = 0.0;
    for (std::size_t h = 0; h < sbs.size(); ++h) {
      const double d = distance(terminals[t].position, sbs[h].position);
      if (psi[t] < 0 || d < best) {
        best = d;
        psi[t] = static_cast<int>(h);
      }
    }
    if (psi[t] < 0 || best > sbs[psi[t]].coverage_radius) {
      throw GenerationError("terminal " + std::to_string(t) +
                            " is outside the coverage of every base station");
    }
  }
  return psi;
}

namespace {

void check_params(const GridParams& p) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(p.area_side > 0.0)) fail("area_side must be > 0");
  if (!(p.cell_side > 0.0)) fail("cell_side must be > 0");
  const double per_side = p.area_side / p.cell_side;
  if (std::abs(per_side - std::round(per_side)) > 1e-9) {
    fail("area_side must be a multiple of cell_side");
  }
  if (p.sbs_rows < 1 || p.sbs_cols < 1) fail("SBS grid dimensions must be >= 1");
  if (!(p.coverage_radius > 0.0)) fail("coverage_radius must be > 0");
  if (p.num_terminals < 0) fail("num_terminals must be >= 0");
  if (p.min_terminals_per_cell < 0 || p.resources_per_type < 0) {
    fail("terminal and resource counts must be >= 0");
  }
  const double cells = per_side * per_side;
  if (static_cast<double>(p.min_terminals_per_cell) * cells > p.num_terminals) {
    fail("num_terminals too small for min_terminals_per_cell");
  }
  if (p.data_types.empty()) fail("at least one data type is required");
  for (std::size_t l = 0; l < p.data_types.size(); ++l) {
    if (!(p.data_types[l].payload > 0.0) || p.data_types[l].cycles_per_bit < 0.0) {
      fail("data type " + std::to_string(l) + " has invalid payload or cycles_per_bit");
    }
  }
  const SliceCapacities& c = p.slice;
  if (c.cpu < 0 || c.storage < 0 || c.uplink < 0 || c.backhaul < 0 || c.fronthaul < 0) {
    fail("slice capacities must be >= 0");
  }
  // Farthest point of an SBS sub-rectangle is its corner.
  const double half_w = p.area_side / p.sbs_cols / 2.0;
  const double half_h = p.area_side / p.sbs_rows / 2.0;
  if (std::hypot(half_w, half_h) > p.coverage_radius) {
    fail("SBS grid does not cover the reference area");
  }
}

int cell_of(Point pos, double cell_side, int per_side) {
  const int col = std::clamp(static_cast<int>(pos.x / cell_side), 0, per_side - 1);
  const int row = std::clamp(static_cast<int>(pos.y / cell_side), 0, per_side - 1);
  return row * per_side + col;
}

}  // namespace

Scenario generate_grid_scenario(const GridParams& p, std::uint64_t seed) {
  check_params(p);
  Scenario s;
  s.area_side = p.area_side;
  s.cell_side = p.cell_side;
  s.rng_seed = seed;
  s.data_types = p.data_types;
  for (std::size_t l = 0; l < s.data_types.size(); ++l) s.data_types[l].id = static_cast<int>(l);

  const int per_side = static_cast<int>(std::lround(p.area_side / p.cell_side));
  for (int row = 0; row < per_side; ++row) {
    for (int col = 0; col < per_side; ++col) {
      s.cells.push_back({row * per_side + col, row, col,
                         {(col + 0.5) * p.cell_side, (row + 0.5) * p.cell_side}});
    }
  }

  for (int r = 0; r < p.sbs_rows; ++r) {
    for (int c = 0; c < p.sbs_cols; ++c) {
      BaseStation b;
      b.id = r * p.sbs_cols + c;
      b.position = {(c + 0.5) * p.area_side / p.sbs_cols, (r + 0.5) * p.area_side / p.sbs_rows};
      b.coverage_radius = p.coverage_radius;
      b.uplink_capacity = p.slice.uplink;
      s.base_stations.push_back(b);
    }
  }

  Rng rng(derive_seed(seed, 1));
  std::vector<Point> positions;
  positions.reserve(static_cast<std::size_t>(p.num_terminals));
  for (const Cell& cell : s.cells) {
    for (int q = 0; q < p.min_terminals_per_cell; ++q) {
      positions.push_back({cell.col * p.cell_side + rng.uniform() * p.cell_side,
                           cell.row * p.cell_side + rng.uniform() * p.cell_side});
    }
  }
  while (static_cast<int>(positions.size()) < p.num_terminals) {
    positions.push_back({rng.uniform() * p.area_side, rng.uniform() * p.area_side});
  }

  for (std::size_t t = 0; t < positions.size(); ++t) {
    IoTTerminal term;
    term.id = static_cast<int>(t);
    term.position = positions[t];
    const int cell = cell_of(term.position, p.cell_side, per_side);
    for (int l = 0; l < s.num_types(); ++l) {
      for (int q = 0; q < p.resources_per_type; ++q) {
        const int id = s.num_resources();
        s.resources.push_back({id, l, cell, term.id});
        term.resources.push_back(id);
      }
    }
    s.terminals.push_back(std::move(term));
  }

  const std::vector<int> psi = associate_terminals(s.terminals, s.base_stations);
  for (std::size_t t = 0; t < psi.size(); ++t) s.terminals[t].associated_sbs = psi[t];

  // One host collocated with each SBS.
  for (const BaseStation& b : s.base_stations) {
    MecHost m;
    m.id = b.id;
    m.served_sbs = {b.id};
    m.cpu_capacity = p.slice.cpu;
    m.storage_capacity = p.slice.storage;
    m.fronthaul_capacity = p.slice.fronthaul > 0.0 ? p.slice.fronthaul : b.uplink_capacity;
    s.hosts.push_back(std::move(m));
  }
  const std::size_t hosts = s.hosts.size();
  s.backhaul_capacity.assign(hosts, std::vector<double>(hosts, 0.0));
  for (std::size_t a = 0; a < hosts; ++a) {
    for (std::size_t b = 0; b < hosts; ++b) {
      if (a != b) s.backhaul_capacity[a][b] = p.slice.backhaul;
    }
  }

  s.cost_model = p.cost_model;
  if (s.cost_model.gamma <= 0.0) {
    s.cost_model.gamma = 1.0;  // placeholder so saturation_cost sees a valid model
    s.cost_model.gamma = default_gamma(s);
  }
  s.finalize();
  return s;
}

// ---------------------------------------------------------------------------

ServiceTemplate vr_template() {
  return {"VR", 0, 0.125, 1.0, 1 * units::kGB, 4 * units::kGB, 10};
}

ServiceTemplate ac_template() {
  return {"AC", 1, 0.125, 1.0, 1 * units::kGB, 2 * units::kGB, 10};
}

std::vector<int> default_pois(const Scenario& s) {
  std::vector<int> pois;
  for (double frac : {0.25, 0.75}) {
    const Point target{frac * s.area_side, frac * s.area_side};
    int best = 0;
    double best_d = distance(s.cells.at(0).center, target);
    for (const Cell& c : s.cells) {
      const double d = distance(c.center, target);
      if (d < best_d) {
        best_d = d;
        best = c.id;
      }
    }
    pois.push_back(best);
  }
  return pois;
}

std::vector<double> zipf_cell_popularity(std::span<const int> pois, double alpha,
                                         std::span<const Cell> cells) {
  if (pois.empty()) throw ConfigError("zipf_cell_popularity: at least one PoI is required");
  if (!(alpha >= 0.0)) throw ConfigError("zipf_cell_popularity: alpha must be >= 0");
  if (cells.empty()) throw ConfigError("zipf_cell_popularity: no cells");
  const std::size_t num = cells.size();
  std::vector<double> total(num, 0.0);
  std::vector<std::size_t> order(num);
  std::vector<double> weight(num);
  for (int poi : pois) {
    if (poi < 0 || static_cast<std::size_t>(poi) >= num) {
      throw ConfigError("zipf_cell_popularity: unknown PoI cell " + std::to_string(poi));
    }
    const Point center = cells[poi].center;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return distance(cells[a].center, center) < distance(cells[b].center, center);
    });
    double sum = 0.0;
    for (std::size_t r = 0; r < num; ++r) {
      weight[order[r]] = std::pow(static_cast<double>(r + 1), -alpha);
      sum += weight[order[r]];
    }
    for (std::size_t k = 0; k < num; ++k) total[k] += weight[k] / sum;
  }
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  for (double& v : total) v /= sum;
  return total;
}

std::vector<ServiceRequest> sample_service_requests(const Scenario& s,
                                                    std::span<const ServiceTemplate> catalog,
                                                    int count,
                                                    std::span<const double> cell_popularity,
                                                    std::uint64_t seed) {
  std::vector<ServiceRequest> out;
  if (count <= 0) return out;
  if (catalog.empty()) throw ConfigError("sample_service_requests: empty catalog");
  if (cell_popularity.size() != s.cells.size()) {
    throw ConfigError("sample_service_requests: popularity vector does not match cell count");
  }
  const auto positive = static_cast<int>(std::count_if(
      cell_popularity.begin(), cell_popularity.end(), [](double w) { return w > 0.0; }));
  for (const ServiceTemplate& t : catalog) {
    if (t.scope_size < 1 || t.scope_size > positive) {
      throw ConfigError("template " + t.class_tag + ": scope size exceeds available cells");
    }
    if (t.data_type < 0 || t.data_type >= s.num_types()) {
      throw ConfigError("template " + t.class_tag + ": unknown data type");
    }
  }

  Rng rng(seed);
  std::vector<double> weights;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const ServiceTemplate& t = catalog[static_cast<std::size_t>(j) % catalog.size()];
    ServiceRequest r;
    r.id = j;
    r.data_type = t.data_type;
    r.class_tag = t.class_tag;
    r.frequency = rng.uniform(t.frequency_min, t.frequency_max);
    r.persistent_storage = rng.uniform(t.storage_min, t.storage_max);
    weights.assign(cell_popularity.begin(), cell_popularity.end());
    for (int q = 0; q < t.scope_size; ++q) {
      const std::size_t k = rng.weighted(weights);
      r.scope.push_back(static_cast<int>(k));
      weights[k] = 0.0;
    }
    std::sort(r.scope.begin(), r.scope.end());
    const DataTypeSpec& d = s.data_types[t.data_type];
    r.cpu_demand = r.frequency * d.payload * d.cycles_per_bit * static_cast<double>(r.scope.size());
    out.push_back(std::move(r));
  }
  return out;
}

Instance tiny_instance(std::uint64_t seed, int num_services) {
  Rng rng(derive_seed(seed, 7));
  GridParams p;
  p.area_side = 40.0;
  p.cell_side = 20.0;
  p.sbs_rows = 1;
  p.sbs_cols = 2;
  p.coverage_radius = 30.0;
  p.min_terminals_per_cell = 1;
  p.num_terminals = 4 + static_cast<int>(rng.below(3));
  p.data_types = {default_data_types()[0]};
  p.cost_model = default_cost_model();
  Instance in{generate_grid_scenario(p, seed), {}};
  Scenario& s = in.scenario;

  for (BaseStation& b : s.base_stations) b.uplink_capacity = rng.uniform(1.0, 6.0) * units::kMbps;
  for (MecHost& m : s.hosts) {
    m.cpu_capacity = rng.uniform(0.05, 0.4) * units::kGHz;
    m.storage_capacity = rng.uniform(2.0, 8.0) * units::kGB;
    m.fronthaul_capacity = s.base_stations[m.served_sbs[0]].uplink_capacity;
  }
  for (int a = 0; a < s.num_hosts(); ++a) {
    for (int b = 0; b < s.num_hosts(); ++b) {
      if (a != b) s.backhaul_capacity[a][b] = rng.uniform(0.5, 4.0) * units::kMbps;
    }
  }
  s.cost_model.gamma = 1.0;
  s.cost_model.gamma = default_gamma(s);
  s.finalize();

  ServiceTemplate t = vr_template();
  t.scope_size = 1;
  const std::vector<double> uniform(s.cells.size(), 1.0);
  for (int j = 0; j < num_services; ++j) {
    t.scope_size = 1 + static_cast<int>(rng.below(4));
    const std::vector<ServiceTemplate> one = {t};
    auto r = sample_service_requests(s, one, 1, uniform, derive_seed(seed, 100 + j));
    r[0].id = j;
    in.requests.push_back(std::move(r[0]));
  }
  return in;
}

}  // namespace mecalloc
