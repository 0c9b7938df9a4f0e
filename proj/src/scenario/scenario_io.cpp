#include "mecalloc/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mecalloc/errors.hpp"

namespace mecalloc {

using nlohmann::json;

namespace {

json point_json(Point p) { return json::array({p.x, p.y}); }

json scenario_json(const Scenario& s) {
  json j;
  j["area_side"] = s.area_side;
  j["cell_side"] = s.cell_side;
  j["rng_seed"] = s.rng_seed;
  for (const char* key : {"cells", "data_types", "resources", "terminals", "base_stations", "hosts"}) {
    j[key] = json::array();
  }
  for (const Cell& c : s.cells) {
    j["cells"].push_back({{"id", c.id}, {"row", c.row}, {"col", c.col}, {"center", point_json(c.center)}});
  }
  for (const DataTypeSpec& d : s.data_types) {
    j["data_types"].push_back({{"id", d.id}, {"payload", d.payload}, {"cycles_per_bit", d.cycles_per_bit}});
  }
  for (const SensingResource& r : s.resources) {
    j["resources"].push_back(
        {{"id", r.id}, {"data_type", r.data_type}, {"cell", r.cell}, {"terminal", r.terminal}});
  }
  for (const IoTTerminal& t : s.terminals) {
    j["terminals"].push_back({{"id", t.id},
                              {"position", point_json(t.position)},
                              {"resources", t.resources},
                              {"associated_sbs", t.associated_sbs}});
  }
  for (const BaseStation& b : s.base_stations) {
    j["base_stations"].push_back({{"id", b.id},
                                  {"position", point_json(b.position)},
                                  {"coverage_radius", b.coverage_radius},
                                  {"uplink_capacity", b.uplink_capacity}});
  }
  for (const MecHost& m : s.hosts) {
    j["hosts"].push_back({{"id", m.id},
                          {"served_sbs", m.served_sbs},
                          {"cpu_capacity", m.cpu_capacity},
                          {"storage_capacity", m.storage_capacity},
                          {"fronthaul_capacity", m.fronthaul_capacity}});
  }
  j["backhaul_capacity"] = s.backhaul_capacity;
  const CostModel& c = s.cost_model;
  j["cost_model"] = {{"c_bw1", c.c_bw1}, {"c_bw2", c.c_bw2}, {"c_cpu", c.c_cpu},
                     {"c_mem", c.c_mem}, {"gamma", c.gamma}};
  return j;
}

json request_json(const ServiceRequest& r) {
  return {{"id", r.id},
          {"data_type", r.data_type},
          {"scope", r.scope},
          {"frequency", r.frequency},
          {"cpu_demand", r.cpu_demand},
          {"persistent_storage", r.persistent_storage},
          {"class_tag", r.class_tag}};
}

// Field access that reports the JSON path of whatever went wrong.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& raw(const char* key) const {
    if (!node_.is_object()) throw ParseError(path_ + ": expected an object");
    auto it = node_.find(key);
    if (it == node_.end()) throw ParseError(path_ + "." + key + ": missing field");
    return *it;
  }

  template <typename T>
  T get(const char* key) const {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ParseError(path_ + "." + key + ": " + e.what());
    }
  }

  Point point(const char* key) const {
    const auto v = get<std::vector<double>>(key);
    if (v.size() != 2) throw ParseError(path_ + "." + key + ": expected [x, y]");
    return {v[0], v[1]};
  }

  Reader child(const char* key) const { return Reader(raw(key), path_ + "." + key); }

  template <typename F>
  void each(const char* key, F&& fn) const {
    const json& arr = raw(key);
    if (!arr.is_array()) throw ParseError(path_ + "." + key + ": expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      fn(Reader(arr[i], path_ + "." + key + "[" + std::to_string(i) + "]"));
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
};

Scenario parse_scenario(const Reader& in) {
  Scenario s;
  s.area_side = in.get<double>("area_side");
  s.cell_side = in.get<double>("cell_side");
  s.rng_seed = in.get<std::uint64_t>("rng_seed");
  in.each("cells", [&](const Reader& c) {
    s.cells.push_back({c.get<int>("id"), c.get<int>("row"), c.get<int>("col"), c.point("center")});
  });
  in.each("data_types", [&](const Reader& d) {
    s.data_types.push_back(
        {d.get<int>("id"), d.get<double>("payload"), d.get<double>("cycles_per_bit")});
  });
  in.each("resources", [&](const Reader& r) {
    s.resources.push_back(
        {r.get<int>("id"), r.get<int>("data_type"), r.get<int>("cell"), r.get<int>("terminal")});
  });
  in.each("terminals", [&](const Reader& t) {
    s.terminals.push_back({t.get<int>("id"), t.point("position"),
                           t.get<std::vector<int>>("resources"), t.get<int>("associated_sbs")});
  });
  in.each("base_stations", [&](const Reader& b) {
    s.base_stations.push_back({b.get<int>("id"), b.point("position"),
                               b.get<double>("coverage_radius"), b.get<double>("uplink_capacity")});
  });
  in.each("hosts", [&](const Reader& m) {
    s.hosts.push_back({m.get<int>("id"), m.get<std::vector<int>>("served_sbs"),
                       m.get<double>("cpu_capacity"), m.get<double>("storage_capacity"),
                       m.get<double>("fronthaul_capacity")});
  });
  // Diagonal entries may be null; every off-diagonal pair must be a number.
  const json& bh = in.raw("backhaul_capacity");
  const std::string bh_path = in.path() + ".backhaul_capacity";
  if (!bh.is_array()) throw ParseError(bh_path + ": expected a matrix");
  for (std::size_t a = 0; a < bh.size(); ++a) {
    if (!bh[a].is_array()) throw ParseError(bh_path + "[" + std::to_string(a) + "]: expected a row");
    std::vector<double> row;
    for (std::size_t b = 0; b < bh[a].size(); ++b) {
      const json& v = bh[a][b];
      if (a == b && v.is_null()) {
        row.push_back(0.0);
      } else if (v.is_number()) {
        row.push_back(v.get<double>());
      } else {
        throw ParseError(bh_path + "[" + std::to_string(a) + "][" + std::to_string(b) +
                         "]: missing backhaul capacity");
      }
    }
    s.backhaul_capacity.push_back(std::move(row));
  }
  const Reader c = in.child("cost_model");
  s.cost_model = {c.get<double>("c_bw1"), c.get<double>("c_bw2"), c.get<double>("c_cpu"),
                  c.get<double>("c_mem"), c.get<double>("gamma")};
  try {
    s.finalize();
  } catch (const ParseError& e) {
    throw ParseError(in.path() + "." + e.what());
  }
  return s;
}

ServiceRequest parse_request(const Reader& r) {
  ServiceRequest q;
  q.id = r.get<int>("id");
  q.data_type = r.get<int>("data_type");
  q.scope = r.get<std::vector<int>>("scope");
  q.frequency = r.get<double>("frequency");
  q.cpu_demand = r.get<double>("cpu_demand");
  q.persistent_storage = r.get<double>("persistent_storage");
  q.class_tag = r.get<std::string>("class_tag");
  return q;
}

}  // namespace

std::string dump_instance(const Scenario* s, const std::vector<ServiceRequest>* requests) {
  json doc;
  doc["version"] = kInstanceFormatVersion;
  if (s != nullptr) doc["scenario"] = scenario_json(*s);
  if (requests != nullptr) {
    doc["requests"] = json::array();
    for (const ServiceRequest& r : *requests) doc["requests"].push_back(request_json(r));
  }
  return doc.dump(1) + "\n";
}

InstanceFile parse_instance(const std::string& text, const Scenario* context) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  const Reader root(doc, "$");
  const int version = root.get<int>("version");
  if (version != kInstanceFormatVersion) {
    throw ParseError("$.version: unsupported version " + std::to_string(version));
  }
  InstanceFile out;
  if (doc.contains("scenario")) out.scenario = parse_scenario(root.child("scenario"));
  if (doc.contains("requests")) {
    const Scenario* against = out.scenario ? &*out.scenario : context;
    std::vector<ServiceRequest> reqs;
    root.each("requests", [&](const Reader& r) {
      reqs.push_back(parse_request(r));
      if (reqs.back().id != static_cast<int>(reqs.size()) - 1) {
        throw ParseError(r.path() + ".id: ids must be dense");
      }
      if (against != nullptr) validate_request(*against, reqs.back());
    });
    out.requests = std::move(reqs);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_scenario(const Scenario& s, const std::filesystem::path& path) {
  write_text_file(path, dump_instance(&s, nullptr));
}

Scenario read_scenario(const std::filesystem::path& path) {
  InstanceFile f = parse_instance(read_text_file(path));
  if (!f.scenario) throw ParseError("$.scenario: missing field");
  return std::move(*f.scenario);
}

void write_instance(const std::filesystem::path& path, const Scenario* s,
                    const std::vector<ServiceRequest>* requests) {
  write_text_file(path, dump_instance(s, requests));
}

InstanceFile read_instance(const std::filesystem::path& path, const Scenario* context) {
  return parse_instance(read_text_file(path), context);
}

}  // namespace mecalloc
