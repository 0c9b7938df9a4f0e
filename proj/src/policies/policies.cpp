#include "mecalloc/policies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "mecalloc/errors.hpp"

namespace mecalloc {

std::string_view to_string(RejectCause c) {
  switch (c) {
    case RejectCause::kNone: return "NONE";
    case RejectCause::kCpu: return "CPU";
    case RejectCause::kStorage: return "STORAGE";
    case RejectCause::kFronthaul: return "FRONTHAUL";
    case RejectCause::kBackhaul: return "BACKHAUL";
  }
  return "?";
}

PolicyState::PolicyState(const Scenario& s, Requests req, std::uint64_t seed)
    : scenario(s),
      requests(req),
      alloc(empty_allocation(s, req)),
      ledger(FlowLedger::zeros(s)),
      tested(req.size(), 0),
      rng(seed) {}

bool PolicyState::fits_cpu(int m, int j) const {
  return ledger.used_cpu[m] + requests[j].cpu_demand <= scenario.hosts[m].cpu_capacity;
}

bool PolicyState::fits_storage(int m, int j) const {
  return ledger.used_storage[m] + storage_demand(scenario, requests[j]) <=
         scenario.hosts[m].storage_capacity;
}

void PolicyState::finish_service() {
  counters.max_host_tests = std::max(counters.max_host_tests, host_tests);
  counters.max_resource_tests = std::max(counters.max_resource_tests, resource_tests);
  host_tests = 0;
  resource_tests = 0;
}

int PolicyReport::deployed() const {
  return static_cast<int>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const ServiceOutcome& o) {
        return o.deployed;
      }));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Everything a failed attempt on one service may have touched.
struct Snapshot {
  FlowLedger ledger;
  std::vector<double> f;
};

Snapshot take(const PolicyState& st) { return {st.ledger, st.alloc.f()}; }

void restore(PolicyState& st, int j, Snapshot&& snap) {
  st.ledger = std::move(snap.ledger);
  st.alloc.f() = std::move(snap.f);
  st.alloc.clear_service(j);
}

void commit(PolicyState& st) {
  st.ledger = compute_flows(st.scenario, st.requests, st.alloc);
}

// Tentatively activates resource i for service j. Checks the uplink of the
// resource's SBS, and optionally the fronthaul of that SBS's host and the
// backhaul from the resource's host to `host` (skipped when host < 0).
bool try_activate(PolicyState& st, int i, int j, bool check_fronthaul, int host) {
  const Scenario& s = st.scenario;
  ++st.resource_tests;
  const double lambda = st.requests[j].frequency;
  const double payload = s.payload_of_resource(i);
  const double f_old = st.alloc.f()[i];
  const double f_new = std::max(f_old, lambda);
  const double added = (f_new - f_old) * payload;
  const int h = s.sbs_of_resource(i);
  const int mh = s.host_of_sbs(h);
  const int from = s.host_of_resource(i);
  if (st.ledger.uplink[h] + added > s.base_stations[h].uplink_capacity) return false;
  if (check_fronthaul && st.ledger.fronthaul[mh] + added > s.hosts[mh].fronthaul_capacity) {
    return false;
  }
  const bool remote = host >= 0 && from != host;
  if (remote && st.ledger.backhaul[from][host] + lambda * payload > s.backhaul_capacity[from][host]) {
    return false;
  }
  st.alloc.f()[i] = f_new;
  st.alloc.set_x(i, j, true);
  st.ledger.uplink[h] += added;
  st.ledger.fronthaul[mh] += added;
  if (remote) st.ledger.backhaul[from][host] += lambda * payload;
  return true;
}

// Relaxed values closer than this count as ties.
constexpr double kTieTol = 1e-9;

bool near(double a, double b) { return std::abs(a - b) <= kTieTol; }

double traffic_of(const Scenario& s, const ServiceRequest& r) {
  return r.frequency * s.data_types[r.data_type].payload * static_cast<double>(r.scope.size());
}

std::vector<int> shuffled(std::vector<int> v, Rng& rng) {
  for (std::size_t k = v.size(); k > 1; --k) {
    std::swap(v[k - 1], v[rng.below(k)]);
  }
  return v;
}

PolicyReport finish(const char* name, PolicyState& st, Clock::time_point t0,
                    std::vector<ServiceOutcome> outcomes) {
  PolicyReport r;
  r.runtime_s = seconds_since(t0);
  r.policy = name;
  r.allocation = st.alloc;
  r.outcomes = std::move(outcomes);
  r.objective = objective(st.scenario, st.requests, st.alloc, st.ledger);
  r.counters = st.counters;
  return r;
}

// Greedy per-cell sensor pick shared by G-FF, G-BF and DSP: in every scope
// cell the lowest-id eligible resource that fits the uplink. Returns false on
// an uncoverable cell, leaving the tentative changes in place for the caller
// to restore.
bool greedy_sensors(PolicyState& st, int j) {
  const ServiceRequest& r = st.requests[j];
  for (int k : r.scope) {
    bool found = false;
    for (int i : st.scenario.resources_in(k, r.data_type)) {
      if (try_activate(st, i, j, false, -1)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

// Remaining checks for hosting j on m once its sensors are tentatively
// active: compute, storage, fronthaul everywhere and backhaul into m.
bool host_accepts(const PolicyState& st, int m, int j) {
  const Scenario& s = st.scenario;
  if (!st.fits_cpu(m, j) || !st.fits_storage(m, j)) return false;
  for (int n = 0; n < s.num_hosts(); ++n) {
    if (st.ledger.fronthaul[n] > s.hosts[n].fronthaul_capacity) return false;
  }
  std::vector<double> add(static_cast<std::size_t>(s.num_hosts()), 0.0);
  for (int i : st.alloc.resources_of(j)) {
    const int from = s.host_of_resource(i);
    if (from != m) add[from] += st.requests[j].frequency * s.payload_of_resource(i);
  }
  for (int n = 0; n < s.num_hosts(); ++n) {
    if (add[n] > 0.0 && st.ledger.backhaul[n][m] + add[n] > s.backhaul_capacity[n][m]) {
      return false;
    }
  }
  return true;
}

// Hosts by decreasing number of j's active sensors they collect, ties to the
// lower id.
std::vector<int> coverage_rank(const PolicyState& st, int j) {
  const Scenario& s = st.scenario;
  std::vector<int> count(static_cast<std::size_t>(s.num_hosts()), 0);
  for (int i : st.alloc.resources_of(j)) ++count[s.host_of_resource(i)];
  std::vector<int> order(static_cast<std::size_t>(s.num_hosts()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return count[a] > count[b]; });
  return order;
}

PolicyReport greedy(const char* name, const Scenario& s, Requests req, std::uint64_t seed,
                    bool best_fit) {
  const Clock::time_point t0 = Clock::now();
  PolicyState st(s, req, seed);
  std::vector<int> ids(req.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<ServiceOutcome> out(req.size());
  for (int j : shuffled(ids, st.rng)) {
    Snapshot snap = take(st);
    bool placed = false;
    // Ranked on whatever sensors were picked, so a coverage failure still
    // names the host G-FF would have tried.
    const bool covered = greedy_sensors(st, j);
    std::vector<int> hosts = coverage_rank(st, j);
    if (!best_fit) hosts.resize(1);
    if (covered) {
      for (int m : hosts) {
        ++st.host_tests;
        if (host_accepts(st, m, j)) {
          st.alloc.set_y(m, j, true);
          placed = true;
          break;
        }
      }
    }
    if (placed) {
      commit(st);
      out[j].deployed = true;
    } else {
      restore(st, j, std::move(snap));
      out[j].cause = classify_reject(s, req, st, j, hosts);
    }
    st.tested[j] = 1;
    st.finish_service();
  }
  return finish(name, st, t0, std::move(out));
}

}  // namespace

bool allocate_sensors(PolicyState& st, int m, int j, const MilpModel& model,
                      std::span<const double> relaxed, double mu) {
  const ServiceRequest& r = st.requests[j];
  Snapshot snap = take(st);
  const std::vector<int> cells = shuffled(r.scope, st.rng);
  std::vector<std::pair<double, int>> cand;
  for (int k : cells) {
    cand.clear();
    for (int i : st.scenario.resources_in(k, r.data_type)) {
      const int v = model.x_var(i, j);
      if (v >= 0 && relaxed[v] > mu) cand.emplace_back(relaxed[v], i);
    }
    // Ties prefer resources collected by m itself, which need no backhaul,
    // then streams already running fast enough to be shared.
    auto extra = [&](int i) { return std::max(0.0, r.frequency - st.alloc.f()[i]); };
    std::sort(cand.begin(), cand.end(), [&](const auto& a, const auto& b) {
      if (!near(a.first, b.first)) return a.first > b.first;
      const bool la = st.scenario.host_of_resource(a.second) == m;
      const bool lb = st.scenario.host_of_resource(b.second) == m;
      if (la != lb) return la;
      const double ea = extra(a.second);
      const double eb = extra(b.second);
      if (ea != eb) return ea < eb;
      return a.second < b.second;
    });
    bool found = false;
    for (const auto& c : cand) {
      if (try_activate(st, c.second, j, true, m)) {
        found = true;
        break;
      }
    }
    if (!found) {
      const bool placed_here = st.alloc.y(m, j);
      restore(st, j, std::move(snap));
      if (placed_here) st.alloc.set_y(m, j, true);  // the caller owns y
      return false;
    }
  }
  commit(st);
  return true;
}

PolicyReport lr_round(const Scenario& s, Requests req, const MilpModel& model,
                      const LpSolution& relaxed, double mu, std::uint64_t seed) {
  const Clock::time_point t0 = Clock::now();
  const std::span<const double> v = relaxed.values;
  const int S = static_cast<int>(req.size());
  const int H = s.num_hosts();
  PolicyState st(s, req, seed);
  std::vector<ServiceOutcome> out(req.size());

  bool integral = relaxed.status == LpStatus::kOptimal;
  for (int k = 0; integral && k < model.num_variables(); ++k) {
    if (model.variables[k].kind != VarKind::kBinary) continue;
    integral = std::abs(v[k] - std::round(v[k])) <= 1e-6;
  }
  if (integral) {
    Allocation a = allocation_from_point(model, v);
    a.f() = extract_frequencies(s, req, a);
    if (check_feasibility(s, req, a).empty()) {
      st.alloc = std::move(a);
      commit(st);
      for (int j = 0; j < S; ++j) out[j].deployed = st.alloc.placed(j);
      for (int j = 0; j < S; ++j) {
        if (!out[j].deployed) out[j].cause = classify_reject(s, req, st, j);
      }
      PolicyReport rep = finish("LR", st, t0, std::move(out));
      rep.lp_integral = true;
      return rep;
    }
  }

  auto y_of = [&](int m, int j) { return v[model.y_var[m * S + j]]; };
  std::vector<double> peak(static_cast<std::size_t>(S), 0.0);
  for (int j = 0; j < S; ++j) {
    for (int m = 0; m < H; ++m) peak[j] = std::max(peak[j], y_of(m, j));
  }
  // Ties on y go to the lighter service, then the lower id.
  std::vector<int> order(static_cast<std::size_t>(S));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (!near(peak[a], peak[b])) return peak[a] > peak[b];
    return traffic_of(s, req[a]) < traffic_of(s, req[b]);
  });

  // Relaxed coverage mass each host collects for service j; ranks hosts with
  // equal y, since a host near the data needs less backhaul.
  std::vector<double> local(static_cast<std::size_t>(H));
  std::vector<int> hosts;
  for (int j : order) {
    std::fill(local.begin(), local.end(), 0.0);
    for (int k : req[j].scope) {
      for (int i : s.resources_in(k, req[j].data_type)) {
        const int xv = model.x_var(i, j);
        if (xv >= 0) local[s.host_of_resource(i)] += v[xv];
      }
    }
    hosts.clear();
    for (int m = 0; m < H; ++m) {
      if (y_of(m, j) > mu) hosts.push_back(m);
    }
    std::stable_sort(hosts.begin(), hosts.end(), [&](int a, int b) {
      if (!near(y_of(a, j), y_of(b, j))) return y_of(a, j) > y_of(b, j);
      return local[a] > local[b];
    });
    for (int m : hosts) {
      ++st.host_tests;
      if (!st.fits_cpu(m, j) || !st.fits_storage(m, j)) continue;
      st.alloc.set_y(m, j, true);
      if (allocate_sensors(st, m, j, model, v, mu)) {
        out[j].deployed = true;
        break;
      }
      st.alloc.set_y(m, j, false);
    }
    if (!out[j].deployed) out[j].cause = classify_reject(s, req, st, j, hosts);
    st.tested[j] = 1;
    st.finish_service();
  }
  return finish("LR", st, t0, std::move(out));
}

PolicyReport lr_solve(const Scenario& s, Requests req, double mu, std::uint64_t seed) {
  const Clock::time_point t0 = Clock::now();
  const MilpModel model = build_milp(s, req);
  const LpSolution lp = solve_lp(relax(model));
  PolicyReport rep = lr_round(s, req, model, lp, mu, seed);
  rep.runtime_s = seconds_since(t0);
  return rep;
}

PolicyReport greedy_first_fit(const Scenario& s, Requests req, std::uint64_t seed) {
  return greedy("G-FF", s, req, seed, false);
}

PolicyReport greedy_best_fit(const Scenario& s, Requests req, std::uint64_t seed) {
  return greedy("G-BF", s, req, seed, true);
}

PolicyReport dsp_place(const Scenario& s, Requests req) {
  const Clock::time_point t0 = Clock::now();
  PolicyState st(s, req, 0);
  const int S = static_cast<int>(req.size());
  std::vector<double> traffic(static_cast<std::size_t>(S));
  for (int j = 0; j < S; ++j) traffic[j] = traffic_of(s, req[j]);
  std::vector<int> order(static_cast<std::size_t>(S));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return traffic[a] < traffic[b]; });

  const double c_bw2 = s.cost_model.c_bw2;
  std::vector<ServiceOutcome> out(req.size());
  for (int j : order) {
    Snapshot snap = take(st);
    int best = -1;
    if (greedy_sensors(st, j)) {
      double fronthaul_added = 0.0;
      for (int n = 0; n < s.num_hosts(); ++n) {
        fronthaul_added += st.ledger.fronthaul[n] - snap.ledger.fronthaul[n];
      }
      double best_cost = 0.0;
      for (int m = 0; m < s.num_hosts(); ++m) {
        ++st.host_tests;
        if (!host_accepts(st, m, j)) continue;
        double backhaul_added = 0.0;
        for (int i : st.alloc.resources_of(j)) {
          if (s.host_of_resource(i) != m) backhaul_added += req[j].frequency * s.payload_of_resource(i);
        }
        const double cost = c_bw2 * (fronthaul_added + backhaul_added);
        if (best < 0 || cost < best_cost) {
          best = m;
          best_cost = cost;
        }
      }
    }
    if (best >= 0) {
      st.alloc.set_y(best, j, true);
      commit(st);
      out[j].deployed = true;
    } else {
      restore(st, j, std::move(snap));
      out[j].cause = classify_reject(s, req, st, j);
    }
    st.tested[j] = 1;
    st.finish_service();
  }
  return finish("DSP", st, t0, std::move(out));
}

RejectCause classify_reject(const Scenario& s, Requests req, const PolicyState& st, int j,
                            std::span<const int> candidates) {
  if (st.alloc.placed(j)) {
    throw ContractError("classify_reject: service " + std::to_string(j) + " is deployed");
  }
  std::vector<int> all;
  if (candidates.empty()) {
    all.resize(static_cast<std::size_t>(s.num_hosts()));
    std::iota(all.begin(), all.end(), 0);
    candidates = all;
  }
  bool cpu = false;
  bool both = false;
  for (int m : candidates) {
    const bool c = st.fits_cpu(m, j);
    cpu = cpu || c;
    both = both || (c && st.fits_storage(m, j));
  }
  if (!cpu) return RejectCause::kCpu;
  if (!both) return RejectCause::kStorage;

  // Greedy coverage against wireless uplink and fronthaul only.
  std::vector<double> uplink = st.ledger.uplink;
  std::vector<double> fronthaul = st.ledger.fronthaul;
  std::vector<double> f = st.alloc.f();
  const ServiceRequest& r = req[j];
  for (int k : r.scope) {
    bool found = false;
    for (int i : s.resources_in(k, r.data_type)) {
      const double added = (std::max(f[i], r.frequency) - f[i]) * s.payload_of_resource(i);
      const int h = s.sbs_of_resource(i);
      const int mh = s.host_of_sbs(h);
      if (uplink[h] + added > s.base_stations[h].uplink_capacity ||
          fronthaul[mh] + added > s.hosts[mh].fronthaul_capacity) {
        continue;
      }
      uplink[h] += added;
      fronthaul[mh] += added;
      f[i] = std::max(f[i], r.frequency);
      found = true;
      break;
    }
    if (!found) return RejectCause::kFronthaul;
  }
  return RejectCause::kBackhaul;
}

}  // namespace mecalloc
