#include "mecalloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mecalloc/errors.hpp"
#include "mecalloc/model.hpp"
#include "mecalloc/rng.hpp"
#include "mecalloc/scenario_io.hpp"

namespace mecalloc {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kRequestStream = 1'000'000;
constexpr int kMaxRegenerations = 100;

std::string lower_alnum(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kServiceCount: return "service_count";
    case SweepAxis::kAlpha: return "alpha";
    case SweepAxis::kCpuCapacity: return "cpu_capacity";
    case SweepAxis::kStorageCapacity: return "storage_capacity";
    case SweepAxis::kFronthaul: return "fronthaul";
    case SweepAxis::kBackhaul: return "backhaul";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::kServiceCount, SweepAxis::kAlpha, SweepAxis::kCpuCapacity,
                      SweepAxis::kStorageCapacity, SweepAxis::kFronthaul, SweepAxis::kBackhaul}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

std::string canonical_policy(std::string_view name) {
  const std::string k = lower_alnum(name);
  if (k == "lr") return "LR";
  if (k == "gff") return "G-FF";
  if (k == "gbf") return "G-BF";
  if (k == "dsp") return "DSP";
  if (k == "exact" || k == "opt") return "EXACT";
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (cfg.preset != "paper" && cfg.preset != "paper-desk" && cfg.preset != "tiny") {
    fail("preset must be paper, paper-desk or tiny");
  }
  if (cfg.replications < 1) fail("replications must be >= 1");
  if (cfg.values.empty()) fail("values must not be empty");
  for (std::size_t k = 1; k < cfg.values.size(); ++k) {
    if (!(cfg.values[k] > cfg.values[k - 1])) fail("values must be strictly increasing");
  }
  if (cfg.policies.empty()) fail("policies must not be empty");
  for (const std::string& p : cfg.policies) canonical_policy(p);
  if (cfg.templates.empty()) fail("templates must not be empty");
  if (cfg.service_count < 0) fail("service_count must be >= 0");
  if (!(cfg.alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(cfg.mu >= 0.0 && cfg.mu <= 1.0)) fail("mu must be in [0, 1]");
  for (double v : cfg.values) {
    if (!(v >= 0.0)) fail("axis values must be >= 0");
    if (cfg.axis == SweepAxis::kServiceCount && v != std::floor(v)) {
      fail("service_count values must be integers");
    }
  }
  if (cfg.preset == "tiny" && cfg.axis != SweepAxis::kServiceCount) {
    fail("the tiny preset only sweeps service_count");
  }
}

// ---------------------------------------------------------------- config io

namespace {

SliceCapacities slice_from_json(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "A") return scen_a_slice();
    if (name == "B") return scen_b_slice();
    throw ConfigError("slice must be \"A\", \"B\" or an object");
  }
  if (!j.is_object()) throw ConfigError("slice must be \"A\", \"B\" or an object");
  SliceCapacities c = scen_a_slice();
  c.fronthaul = 0.0;
  for (auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("slice." + key + " must be a number");
    const double v = value.get<double>();
    if (key == "cpu") c.cpu = v;
    else if (key == "storage") c.storage = v;
    else if (key == "uplink") c.uplink = v;
    else if (key == "backhaul") c.backhaul = v;
    else if (key == "fronthaul") c.fronthaul = v;
    else throw ConfigError("unknown field slice." + key);
  }
  return c;
}

ServiceTemplate template_from_json(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "VR") return vr_template();
    if (name == "AC") return ac_template();
    throw ConfigError("unknown template '" + name + "'");
  }
  if (!j.is_object()) throw ConfigError("templates entries must be names or objects");
  ServiceTemplate t;
  try {
    t.class_tag = j.at("class_tag").get<std::string>();
    t.data_type = j.at("data_type").get<int>();
    t.frequency_min = j.at("frequency_min").get<double>();
    t.frequency_max = j.at("frequency_max").get<double>();
    t.storage_min = j.at("storage_min").get<double>();
    t.storage_max = j.at("storage_max").get<double>();
    t.scope_size = j.at("scope_size").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("template: ") + e.what());
  }
  return t;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    for (auto& [key, v] : j.items()) {
      if (key == "name") cfg.name = v.get<std::string>();
      else if (key == "preset") cfg.preset = v.get<std::string>();
      else if (key == "scenario_file") cfg.scenario_file = v.get<std::string>();
      else if (key == "slice") cfg.slice = slice_from_json(v);
      else if (key == "templates") {
        cfg.templates.clear();
        for (const json& t : v) cfg.templates.push_back(template_from_json(t));
      } else if (key == "service_count") cfg.service_count = v.get<int>();
      else if (key == "alpha") cfg.alpha = v.get<double>();
      else if (key == "axis") cfg.axis = parse_axis(v.get<std::string>());
      else if (key == "values") cfg.values = v.get<std::vector<double>>();
      else if (key == "policies") {
        cfg.policies.clear();
        for (const json& p : v) cfg.policies.push_back(canonical_policy(p.get<std::string>()));
      } else if (key == "replications") cfg.replications = v.get<int>();
      else if (key == "base_seed") cfg.base_seed = v.get<std::uint64_t>();
      else if (key == "mu") cfg.mu = v.get<double>();
      else if (key == "exact_time_budget_s") cfg.exact_time_budget_s = v.get<double>();
      else if (key == "exact_node_limit") cfg.exact_node_limit = v.get<std::int64_t>();
      else throw ConfigError("unknown config field '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

std::string config_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["preset"] = cfg.preset;
  if (cfg.scenario_file) j["scenario_file"] = *cfg.scenario_file;
  j["slice"] = {{"cpu", cfg.slice.cpu},
                {"storage", cfg.slice.storage},
                {"uplink", cfg.slice.uplink},
                {"backhaul", cfg.slice.backhaul},
                {"fronthaul", cfg.slice.fronthaul}};
  j["templates"] = json::array();
  for (const ServiceTemplate& t : cfg.templates) {
    j["templates"].push_back({{"class_tag", t.class_tag},
                              {"data_type", t.data_type},
                              {"frequency_min", t.frequency_min},
                              {"frequency_max", t.frequency_max},
                              {"storage_min", t.storage_min},
                              {"storage_max", t.storage_max},
                              {"scope_size", t.scope_size}});
  }
  j["service_count"] = cfg.service_count;
  j["alpha"] = cfg.alpha;
  j["axis"] = std::string(to_string(cfg.axis));
  j["values"] = cfg.values;
  j["policies"] = cfg.policies;
  j["replications"] = cfg.replications;
  j["base_seed"] = cfg.base_seed;
  j["mu"] = cfg.mu;
  j["exact_time_budget_s"] = cfg.exact_time_budget_s;
  j["exact_node_limit"] = cfg.exact_node_limit;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- instances

GridParams preset_params(std::string_view preset, const SliceCapacities& slice) {
  GridParams p;
  if (preset == "paper") p = paper_params();
  else if (preset == "paper-desk") p = desk_params();
  else throw ConfigError("no grid parameters for preset '" + std::string(preset) + "'");
  p.slice = slice;
  return p;
}

std::uint64_t replication_seed(const ExperimentConfig& cfg, int replication) {
  return derive_seed(cfg.base_seed, static_cast<std::uint64_t>(replication));
}

namespace {

// Capacity axes act on the slice of generated scenarios and directly on the
// elements of a scenario read from file.
void apply_capacity(SweepAxis axis, double v, SliceCapacities& slice) {
  switch (axis) {
    case SweepAxis::kCpuCapacity: slice.cpu = v; break;
    case SweepAxis::kStorageCapacity: slice.storage = v; break;
    case SweepAxis::kFronthaul:
      slice.uplink = v;
      slice.fronthaul = 0.0;
      break;
    case SweepAxis::kBackhaul: slice.backhaul = v; break;
    default: break;
  }
}

void apply_capacity(SweepAxis axis, double v, Scenario& s) {
  switch (axis) {
    case SweepAxis::kCpuCapacity:
      for (MecHost& m : s.hosts) m.cpu_capacity = v;
      break;
    case SweepAxis::kStorageCapacity:
      for (MecHost& m : s.hosts) m.storage_capacity = v;
      break;
    case SweepAxis::kFronthaul:
      for (BaseStation& b : s.base_stations) b.uplink_capacity = v;
      for (MecHost& m : s.hosts) m.fronthaul_capacity = v * static_cast<double>(m.served_sbs.size());
      break;
    case SweepAxis::kBackhaul:
      for (int a = 0; a < s.num_hosts(); ++a) {
        for (int b = 0; b < s.num_hosts(); ++b) s.backhaul_capacity[a][b] = a == b ? 0.0 : v;
      }
      break;
    default: return;
  }
  s.finalize();
}

}  // namespace

Instance make_instance(const ExperimentConfig& cfg, double axis_value, int replication,
                       std::ostream* log) {
  const std::uint64_t seed = replication_seed(cfg, replication);
  int count = cfg.service_count;
  double alpha = cfg.alpha;
  if (cfg.axis == SweepAxis::kServiceCount) count = static_cast<int>(axis_value);
  if (cfg.axis == SweepAxis::kAlpha) alpha = axis_value;

  if (cfg.preset == "tiny") return tiny_instance(seed, count);

  Instance in;
  if (cfg.scenario_file) {
    in.scenario = read_scenario(*cfg.scenario_file);
    apply_capacity(cfg.axis, axis_value, in.scenario);
  } else {
    SliceCapacities slice = cfg.slice;
    apply_capacity(cfg.axis, axis_value, slice);
    const GridParams params = preset_params(cfg.preset, slice);
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t sub = attempt == 0 ? seed : derive_seed(seed, attempt);
      try {
        in.scenario = generate_grid_scenario(params, sub);
        break;
      } catch (const GenerationError& e) {
        if (attempt + 1 >= kMaxRegenerations) throw;
        if (log) {
          *log << "replication " << replication << ": " << e.what()
               << "; regenerating with sub-seed " << attempt + 1 << "\n";
        }
      }
    }
  }
  const std::vector<double> pop =
      zipf_cell_popularity(default_pois(in.scenario), alpha, in.scenario.cells);
  in.requests = sample_service_requests(in.scenario, cfg.templates, count, pop,
                                        derive_seed(seed, kRequestStream));
  return in;
}

// ---------------------------------------------------------------- policies

ExactRun run_exact(const Scenario& s, Requests req, double mu, std::uint64_t seed,
                   double time_budget_s, std::int64_t node_limit) {
  using Clock = std::chrono::steady_clock;
  const Clock::time_point t0 = Clock::now();
  const MilpModel model = build_milp(s, req);

  PolicyReport warm = lr_solve(s, req, mu, seed);
  for (PolicyReport r : {greedy_best_fit(s, req, seed), dsp_place(s, req)}) {
    if (r.objective.j > warm.objective.j) warm = std::move(r);
  }

  BnbOptions opts;
  opts.time_budget_s = time_budget_s;
  opts.node_limit = node_limit;
  opts.seed = seed;
  opts.initial = warm.allocation;
  opts.heuristic = [&](std::span<const double> values) -> std::optional<Allocation> {
    LpSolution sol;
    sol.status = LpStatus::kOptimal;
    sol.values.assign(values.begin(), values.end());
    return lr_round(s, req, model, sol, mu, seed).allocation;
  };

  ExactRun run;
  run.bnb = branch_and_bound(s, req, model, opts);

  PolicyState st(s, req, seed);
  st.alloc = run.bnb.incumbent;
  st.ledger = compute_flows(s, req, st.alloc);
  PolicyReport& r = run.report;
  r.policy = "EXACT";
  r.allocation = st.alloc;
  r.outcomes.resize(req.size());
  for (int j = 0; j < static_cast<int>(req.size()); ++j) {
    r.outcomes[j].deployed = st.alloc.placed(j);
    if (!r.outcomes[j].deployed) r.outcomes[j].cause = classify_reject(s, req, st, j);
  }
  r.objective = objective(s, req, st.alloc, st.ledger);
  r.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return run;
}

PolicyReport run_policy(const std::string& policy, const Scenario& s, Requests req,
                        const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::string p = canonical_policy(policy);
  if (p == "LR") return lr_solve(s, req, cfg.mu, seed);
  if (p == "G-FF") return greedy_first_fit(s, req, seed);
  if (p == "G-BF") return greedy_best_fit(s, req, seed);
  if (p == "DSP") return dsp_place(s, req);
  return run_exact(s, req, cfg.mu, seed, cfg.exact_time_budget_s, cfg.exact_node_limit).report;
}

// ---------------------------------------------------------------- rows

namespace {

double ratio(double used, double cap) { return cap > 0.0 ? used / cap : 0.0; }

}  // namespace

ResultRow make_row(const Scenario& s, Requests req, const PolicyReport& report) {
  const std::vector<Violation> v = check_feasibility(s, req, report.allocation);
  if (!v.empty()) {
    throw ContractError(report.policy + " produced an infeasible allocation: " +
                        violations_json(v));
  }
  ResultRow row;
  row.policy = report.policy;
  row.requests = static_cast<int>(req.size());
  row.deployed = report.deployed();
  row.deployed_frac = req.empty() ? 1.0 : static_cast<double>(row.deployed) / row.requests;
  int vr = 0, vr_ok = 0, ac = 0, ac_ok = 0;
  for (std::size_t j = 0; j < req.size(); ++j) {
    const bool ok = report.outcomes[j].deployed;
    if (req[j].class_tag == "VR") {
      ++vr;
      vr_ok += ok;
    } else if (req[j].class_tag == "AC") {
      ++ac;
      ac_ok += ok;
    }
    switch (report.outcomes[j].cause) {
      case RejectCause::kCpu: ++row.rej_cpu; break;
      case RejectCause::kStorage: ++row.rej_storage; break;
      case RejectCause::kFronthaul: ++row.rej_fronthaul; break;
      case RejectCause::kBackhaul: ++row.rej_backhaul; break;
      case RejectCause::kNone: break;
    }
  }
  row.deployed_frac_vr = vr ? static_cast<double>(vr_ok) / vr : 1.0;
  row.deployed_frac_ac = ac ? static_cast<double>(ac_ok) / ac : 1.0;
  row.objective = report.objective;
  row.runtime_s = report.runtime_s;

  const FlowLedger l = compute_flows(s, req, report.allocation);
  for (int h = 0; h < s.num_sbs(); ++h) {
    row.util_uplink.push_back(ratio(l.uplink[h], s.base_stations[h].uplink_capacity));
  }
  for (int m = 0; m < s.num_hosts(); ++m) {
    const MecHost& host = s.hosts[m];
    row.util_cpu.push_back(ratio(l.used_cpu[m], host.cpu_capacity));
    row.util_storage.push_back(ratio(l.used_storage[m], host.storage_capacity));
    double in = l.fronthaul[m], in_cap = host.fronthaul_capacity;
    double out = 0.0, out_cap = 0.0;
    for (int n = 0; n < s.num_hosts(); ++n) {
      if (n == m) continue;
      in += l.backhaul[n][m];
      in_cap += s.backhaul_capacity[n][m];
      out += l.backhaul[m][n];
      out_cap += s.backhaul_capacity[m][n];
    }
    row.util_in.push_back(ratio(in, in_cap));
    row.util_out.push_back(ratio(out, out_cap));
  }
  if (s.num_hosts() > 0) {
    row.slice.cpu = s.hosts[0].cpu_capacity;
    row.slice.storage = s.hosts[0].storage_capacity;
    row.slice.fronthaul = s.hosts[0].fronthaul_capacity;
  }
  if (s.num_sbs() > 0) row.slice.uplink = s.base_stations[0].uplink_capacity;
  if (s.num_hosts() > 1) row.slice.backhaul = s.backhaul_capacity[0][1];
  return row;
}

int thread_count() {
  if (const char* env = std::getenv("MEC_ALLOC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ResultRow> run_suite(const ExperimentConfig& cfg, std::ostream* log) {
  validate(cfg);
  std::vector<std::string> policies;
  for (const std::string& p : cfg.policies) policies.push_back(canonical_policy(p));

  const int cells = static_cast<int>(cfg.values.size()) * cfg.replications;
  std::vector<std::vector<ResultRow>> out(static_cast<std::size_t>(cells));
  std::vector<std::exception_ptr> errors(out.size());
  std::mutex log_mutex;
  std::atomic<int> next{0};

  auto work = [&] {
    for (int c = next++; c < cells; c = next++) {
      const int v = c / cfg.replications;
      const int rep = c % cfg.replications;
      try {
        std::ostringstream local;
        const Instance in = make_instance(cfg, cfg.values[v], rep, &local);
        if (log && !local.str().empty()) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *log << local.str();
        }
        const std::uint64_t seed = replication_seed(cfg, rep);
        for (const std::string& p : policies) {
          ResultRow row;
          if (p == "EXACT") {
            const ExactRun e = run_exact(in.scenario, in.requests, cfg.mu, seed,
                                         cfg.exact_time_budget_s, cfg.exact_node_limit);
            row = make_row(in.scenario, in.requests, e.report);
            row.exact_status = std::string(to_string(e.bnb.status));
          } else {
            row = make_row(in.scenario, in.requests,
                           run_policy(p, in.scenario, in.requests, cfg, seed));
          }
          row.axis_name = std::string(to_string(cfg.axis));
          row.axis_value = cfg.values[v];
          row.seed = seed;
          out[c].push_back(std::move(row));
        }
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };

  const int workers = std::min(thread_count(), cells);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ResultRow> rows;
  for (std::vector<ResultRow>& group : out) {
    for (ResultRow& r : group) rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------- csv

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Record to_record(const ResultRow& row) {
  Record r{row.policy, row.axis_name, row.axis_value, row.seed, {}};
  auto add = [&](std::string name, double v) { r.metrics.emplace_back(std::move(name), v); };
  add("deployed_frac", row.deployed_frac);
  add("deployed_frac_VR", row.deployed_frac_vr);
  add("deployed_frac_AC", row.deployed_frac_ac);
  add("rej_cpu", row.rej_cpu);
  add("rej_storage", row.rej_storage);
  add("rej_fronthaul", row.rej_fronthaul);
  add("rej_backhaul", row.rej_backhaul);
  add("J_r", row.objective.j_r);
  add("J_edge", row.objective.j_edge);
  add("J", row.objective.j);
  add("runtime_s", row.runtime_s);
  for (std::size_t h = 0; h < row.util_uplink.size(); ++h) {
    add("util_uplink_h" + std::to_string(h), row.util_uplink[h]);
  }
  for (std::size_t m = 0; m < row.util_cpu.size(); ++m) {
    add("util_cpu_m" + std::to_string(m), row.util_cpu[m]);
  }
  for (std::size_t m = 0; m < row.util_storage.size(); ++m) {
    add("util_storage_m" + std::to_string(m), row.util_storage[m]);
  }
  for (std::size_t m = 0; m < row.util_in.size(); ++m) {
    add("util_in_m" + std::to_string(m), row.util_in[m]);
  }
  for (std::size_t m = 0; m < row.util_out.size(); ++m) {
    add("util_out_m" + std::to_string(m), row.util_out[m]);
  }
  return r;
}

std::string csv_header(int num_sbs, int num_hosts) {
  std::string h =
      "policy,axis_name,axis_value,seed,deployed_frac,deployed_frac_VR,deployed_frac_AC,"
      "rej_cpu,rej_storage,rej_fronthaul,rej_backhaul,J_r,J_edge,J,runtime_s";
  for (int k = 0; k < num_sbs; ++k) h += ",util_uplink_h" + std::to_string(k);
  for (const char* name : {"cpu", "storage", "in", "out"}) {
    for (int m = 0; m < num_hosts; ++m) h += ",util_" + std::string(name) + "_m" + std::to_string(m);
  }
  return h;
}

std::string rows_csv(const std::vector<ResultRow>& rows) {
  std::size_t sbs = 0, hosts = 0;
  for (const ResultRow& r : rows) {
    sbs = std::max(sbs, r.util_uplink.size());
    hosts = std::max(hosts, r.util_cpu.size());
  }
  std::string out = csv_header(static_cast<int>(sbs), static_cast<int>(hosts)) + "\n";
  for (const ResultRow& row : rows) {
    if (row.util_uplink.size() != sbs || row.util_cpu.size() != hosts) {
      throw ContractError("rows_csv: rows describe scenarios of different sizes");
    }
    const Record r = to_record(row);
    out += r.policy + "," + r.axis_name + "," + format_number(r.axis_value) + "," +
           std::to_string(r.seed);
    for (const auto& [name, v] : r.metrics) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line) + ", column " + column + ": '" + s +
                     "' is not a number");
  }
  return v;
}

}  // namespace

std::vector<Record> parse_rows_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  const std::vector<std::string> fixed = {"policy", "axis_name", "axis_value", "seed"};
  if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw ParseError("CSV header must start with policy,axis_name,axis_value,seed");
  }
  std::vector<Record> records;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(n) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    Record r;
    r.policy = cells[0];
    r.axis_name = cells[1];
    r.axis_value = parse_double(cells[2], n, "axis_value");
    const auto res = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), r.seed);
    if (res.ec != std::errc() || res.ptr != cells[3].data() + cells[3].size()) {
      throw ParseError("line " + std::to_string(n) + ", column seed: not an integer");
    }
    for (std::size_t c = fixed.size(); c < cells.size(); ++c) {
      r.metrics.emplace_back(header[c], parse_double(cells[c], n, header[c]));
    }
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------- summary

double nearest_rank(std::vector<double> sample, double p) {
  if (sample.empty()) throw ContractError("nearest_rank: empty sample");
  if (!(p > 0.0 && p <= 100.0)) throw ContractError("nearest_rank: p must be in (0, 100]");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  // Rounded before the ceiling so that 95% of 20 is rank 19, not 20.
  const double exact = std::round(p / 100.0 * n * 1e9) / 1e9;
  const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(exact)));
  return sample[std::min(rank, sample.size()) - 1];
}

std::vector<Aggregate> summarize(const std::vector<Record>& records) {
  struct Group {
    std::string policy;
    std::string axis_name;
    double axis_value;
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> values;
  };
  std::vector<Group> groups;
  for (const Record& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.policy == r.policy && g.axis_name == r.axis_name && g.axis_value == r.axis_value;
    });
    if (it == groups.end()) {
      groups.push_back({r.policy, r.axis_name, r.axis_value, {}, {}});
      it = std::prev(groups.end());
    }
    for (const auto& [name, v] : r.metrics) {
      auto& vals = it->values[name];
      if (vals.empty()) it->order.push_back(name);
      vals.push_back(v);
    }
  }
  std::vector<Aggregate> out;
  for (const Group& g : groups) {
    for (const std::string& metric : g.order) {
      const std::vector<double>& v = g.values.at(metric);
      Aggregate a{g.policy, g.axis_name, g.axis_value, metric, static_cast<int>(v.size()), 0.0,
                  nearest_rank(v, 5.0), nearest_rank(v, 95.0)};
      double sum = 0.0;
      for (double x : v) sum += x;
      a.mean = sum / static_cast<double>(v.size());
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::string summary_csv(const std::vector<Aggregate>& aggregates) {
  std::string out = "policy,axis_name,axis_value,metric,n,mean,p5,p95\n";
  for (const Aggregate& a : aggregates) {
    out += a.policy + "," + a.axis_name + "," + format_number(a.axis_value) + "," + a.metric +
           "," + std::to_string(a.n) + "," + format_number(a.mean) + "," + format_number(a.p5) +
           "," + format_number(a.p95) + "\n";
  }
  return out;
}

}  // namespace mecalloc
