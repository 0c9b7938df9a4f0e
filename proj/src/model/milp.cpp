#include "mecalloc/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mecalloc/scenario_io.hpp"

namespace mecalloc {

namespace {

std::string name_of(const char* prefix, std::initializer_list<int> ids) {
  std::string out(prefix);
  for (int id : ids) {
    out += '_';
    out += std::to_string(id);
  }
  return out;
}

}  // namespace

int MilpModel::num_binaries() const {
  return static_cast<int>(std::count_if(variables.begin(), variables.end(), [](const Variable& v) {
    return v.kind == VarKind::kBinary;
  }));
}

int MilpModel::add_variable(std::string name, VarKind kind, VarRole role, double lower,
                            double upper, double obj) {
  variables.push_back({std::move(name), kind, role, lower, upper});
  objective.push_back(obj);
  return static_cast<int>(variables.size()) - 1;
}

void MilpModel::add_row(Row row) { rows.push_back(std::move(row)); }

int MilpModel::x_var(int i, int j) const {
  if (j < 0 || static_cast<std::size_t>(j) >= x_lookup_.size()) return -1;
  const auto& list = x_lookup_[j];
  auto it = std::lower_bound(list.begin(), list.end(), std::make_pair(i, -1));
  return (it != list.end() && it->first == i) ? it->second : -1;
}

double MilpModel::activity(const Row& r, std::span<const double> values) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < r.index.size(); ++k) sum += r.coef[k] * values[r.index[k]];
  return sum;
}

double MilpModel::objective_value(std::span<const double> values) const {
  double sum = objective_offset;
  for (std::size_t k = 0; k < objective.size(); ++k) sum += objective[k] * values[k];
  return sum;
}

double MilpModel::max_violation(std::span<const double> values) const {
  double worst = 0.0;
  for (const Row& r : rows) {
    double scale = 1.0;
    for (double c : r.coef) scale = std::max(scale, std::abs(c));
    const double act = activity(r, values);
    double v = 0.0;
    if (r.sense != Sense::kGe) v = std::max(v, act - r.rhs);
    if (r.sense != Sense::kLe) v = std::max(v, r.rhs - act);
    worst = std::max(worst, v / scale);
  }
  for (std::size_t k = 0; k < variables.size(); ++k) {
    worst = std::max(worst, variables[k].lower - values[k]);
    worst = std::max(worst, values[k] - variables[k].upper);
  }
  return worst;
}

MilpModel build_milp(const Scenario& s, Requests req) {
  MilpModel m;
  const int S = static_cast<int>(req.size());
  const int H = s.num_hosts();
  const int R = s.num_resources();
  m.num_resources = R;
  m.num_services = S;
  m.num_hosts = H;
  const CostModel& c = s.cost_model;
  const double gamma = c.gamma;

  m.y_var.assign(static_cast<std::size_t>(H) * S, -1);
  for (int j = 0; j < S; ++j) {
    const double cost = c.c_cpu * req[j].cpu_demand + c.c_mem * storage_demand(s, req[j]);
    for (int h = 0; h < H; ++h) {
      m.y_var[h * S + j] =
          m.add_variable(name_of("y", {h, j}), VarKind::kBinary, VarRole::kY, 0.0, 1.0,
                         1.0 - gamma * cost);
    }
  }

  m.x_lookup_.assign(static_cast<std::size_t>(S), {});
  for (int j = 0; j < S; ++j) {
    std::vector<int> cand;
    for (int k : req[j].scope) {
      for (int i : s.resources_in(k, req[j].data_type)) cand.push_back(i);
    }
    std::sort(cand.begin(), cand.end());
    for (int i : cand) {
      const int v = m.add_variable(name_of("x", {i, j}), VarKind::kBinary, VarRole::kX, 0.0, 1.0);
      m.x_vars.push_back({i, j, v});
      m.x_lookup_[j].emplace_back(i, v);
    }
  }

  m.theta_var.assign(m.x_vars.size() * static_cast<std::size_t>(H), -1);
  for (std::size_t p = 0; p < m.x_vars.size(); ++p) {
    const XVar& xv = m.x_vars[p];
    const double stream = req[xv.service].frequency * s.payload_of_resource(xv.resource);
    for (int h = 0; h < H; ++h) {
      const double obj = h != s.host_of_resource(xv.resource) ? -gamma * c.c_bw2 * stream : 0.0;
      m.theta_var[p * H + h] = m.add_variable(name_of("th", {h, xv.resource, xv.service}),
                                              VarKind::kBinary, VarRole::kTheta, 0.0, 1.0, obj);
    }
  }

  double max_rate = 0.0;
  for (const ServiceRequest& r : req) max_rate = std::max(max_rate, r.frequency);
  m.f_var.resize(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) {
    m.f_var[i] = m.add_variable(name_of("f", {i}), VarKind::kContinuous, VarRole::kF, 0.0, max_rate,
                                -gamma * (c.c_bw1 + c.c_bw2) * s.payload_of_resource(i));
  }

  auto push = [&m](Row r) {
    if (!r.index.empty()) m.add_row(std::move(r));
  };

  // Edge capacity per host.
  for (int h = 0; h < H; ++h) {
    Row cpu{name_of("cpu", {h}), RowFamily::kCpu, {}, {}, Sense::kLe, s.hosts[h].cpu_capacity};
    Row mem{name_of("mem", {h}), RowFamily::kStorage, {}, {}, Sense::kLe,
            s.hosts[h].storage_capacity};
    for (int j = 0; j < S; ++j) {
      cpu.index.push_back(m.y_var[h * S + j]);
      cpu.coef.push_back(req[j].cpu_demand);
      mem.index.push_back(m.y_var[h * S + j]);
      mem.coef.push_back(storage_demand(s, req[j]));
    }
    push(std::move(cpu));
    push(std::move(mem));
  }

  // At most one host per service.
  for (int j = 0; j < S; ++j) {
    Row one{name_of("one", {j}), RowFamily::kSingleHost, {}, {}, Sense::kLe, 1.0};
    for (int h = 0; h < H; ++h) {
      one.index.push_back(m.y_var[h * S + j]);
      one.coef.push_back(1.0);
    }
    push(std::move(one));
  }

  // One eligible resource per scope cell of every placed service.
  for (int j = 0; j < S; ++j) {
    for (int k : req[j].scope) {
      Row cov{name_of("cov", {j, k}), RowFamily::kCoverage, {}, {}, Sense::kEq, 0.0};
      for (int i : s.resources_in(k, req[j].data_type)) {
        cov.index.push_back(m.x_var(i, j));
        cov.coef.push_back(1.0);
      }
      for (int h = 0; h < H; ++h) {
        cov.index.push_back(m.y_var[h * S + j]);
        cov.coef.push_back(-1.0);
      }
      push(std::move(cov));
    }
  }

  // f_i >= lambda_j x_ij and f_i <= sum_j lambda_j x_ij.
  std::vector<Row> upper(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) {
    upper[i] = {name_of("fhi", {i}), RowFamily::kFreqUpper, {m.f_var[i]}, {1.0}, Sense::kLe, 0.0};
  }
  for (const XVar& xv : m.x_vars) {
    const double lambda = req[xv.service].frequency;
    push({name_of("flo", {xv.resource, xv.service}), RowFamily::kFreqLower,
          {m.f_var[xv.resource], xv.var}, {1.0, -lambda}, Sense::kGe, 0.0});
    upper[xv.resource].index.push_back(xv.var);
    upper[xv.resource].coef.push_back(-lambda);
  }
  for (Row& r : upper) push(std::move(r));

  // Wireless uplink per SBS and fronthaul per host.
  std::vector<Row> up(static_cast<std::size_t>(s.num_sbs()));
  for (int b = 0; b < s.num_sbs(); ++b) {
    up[b] = {name_of("up", {b}), RowFamily::kUplink, {}, {}, Sense::kLe,
             s.base_stations[b].uplink_capacity};
  }
  std::vector<Row> fh(static_cast<std::size_t>(H));
  for (int h = 0; h < H; ++h) {
    fh[h] = {name_of("fh", {h}), RowFamily::kFronthaul, {}, {}, Sense::kLe,
             s.hosts[h].fronthaul_capacity};
  }
  for (int i = 0; i < R; ++i) {
    const double payload = s.payload_of_resource(i);
    up[s.sbs_of_resource(i)].index.push_back(m.f_var[i]);
    up[s.sbs_of_resource(i)].coef.push_back(payload);
    fh[s.host_of_resource(i)].index.push_back(m.f_var[i]);
    fh[s.host_of_resource(i)].coef.push_back(payload);
  }
  for (Row& r : up) push(std::move(r));
  for (Row& r : fh) push(std::move(r));

  // theta_mij = x_ij * y_mj.
  for (std::size_t p = 0; p < m.x_vars.size(); ++p) {
    const XVar& xv = m.x_vars[p];
    for (int h = 0; h < H; ++h) {
      const int th = m.theta_var[p * H + h];
      const int y = m.y_var[h * S + xv.service];
      const auto ids = {h, xv.resource, xv.service};
      push({name_of("tx", ids), RowFamily::kThetaX, {th, xv.var}, {1.0, -1.0}, Sense::kLe, 0.0});
      push({name_of("ty", ids), RowFamily::kThetaY, {th, y}, {1.0, -1.0}, Sense::kLe, 0.0});
      push({name_of("txy", ids), RowFamily::kThetaXY, {th, xv.var, y}, {1.0, -1.0, -1.0},
            Sense::kGe, -1.0});
    }
  }

  // Linearised host-to-host load.
  std::vector<Row> bh(static_cast<std::size_t>(H) * H);
  for (int a = 0; a < H; ++a) {
    for (int b = 0; b < H; ++b) {
      bh[a * H + b] = {name_of("bh", {a, b}), RowFamily::kBackhaul, {}, {}, Sense::kLe,
                       a == b ? 0.0 : s.backhaul_capacity[a][b]};
    }
  }
  for (std::size_t p = 0; p < m.x_vars.size(); ++p) {
    const XVar& xv = m.x_vars[p];
    const int from = s.host_of_resource(xv.resource);
    const double stream = req[xv.service].frequency * s.payload_of_resource(xv.resource);
    for (int h = 0; h < H; ++h) {
      if (h == from) continue;
      bh[from * H + h].index.push_back(m.theta_var[p * H + h]);
      bh[from * H + h].coef.push_back(stream);
    }
  }
  for (int a = 0; a < H; ++a) {
    for (int b = 0; b < H; ++b) {
      if (a != b) push(std::move(bh[a * H + b]));
    }
  }
  return m;
}

std::vector<double> milp_point(const MilpModel& m, const Allocation& a) {
  std::vector<double> v(static_cast<std::size_t>(m.num_variables()), 0.0);
  const int S = m.num_services;
  for (int h = 0; h < m.num_hosts; ++h) {
    for (int j = 0; j < S; ++j) v[m.y_var[h * S + j]] = a.y(h, j) ? 1.0 : 0.0;
  }
  for (std::size_t p = 0; p < m.x_vars.size(); ++p) {
    const XVar& xv = m.x_vars[p];
    const bool x = a.x(xv.resource, xv.service);
    v[xv.var] = x ? 1.0 : 0.0;
    for (int h = 0; h < m.num_hosts; ++h) {
      v[m.theta_var[p * m.num_hosts + h]] = (x && a.y(h, xv.service)) ? 1.0 : 0.0;
    }
  }
  for (int i = 0; i < m.num_resources; ++i) v[m.f_var[i]] = a.f()[i];
  return v;
}

Allocation allocation_from_point(const MilpModel& m, std::span<const double> values) {
  Allocation a(m.num_resources, m.num_services, m.num_hosts);
  const int S = m.num_services;
  for (int h = 0; h < m.num_hosts; ++h) {
    for (int j = 0; j < S; ++j) a.set_y(h, j, values[m.y_var[h * S + j]] > 0.5);
  }
  for (const XVar& xv : m.x_vars) a.set_x(xv.resource, xv.service, values[xv.var] > 0.5);
  for (int i = 0; i < m.num_resources; ++i) a.f()[i] = values[m.f_var[i]];
  return a;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_term(std::string& out, double coef, const std::string& var) {
  out += coef < 0.0 ? " - " : " + ";
  append_number(out, std::abs(coef));
  out += ' ';
  out += var;
}

}  // namespace

std::string lp_text(const MilpModel& m) {
  std::string out;
  out += "\\ placement model: " + std::to_string(m.num_variables()) + " variables, " +
         std::to_string(m.num_rows()) + " constraints\n";
  out += "Maximize\n obj:";
  for (int k = 0; k < m.num_variables(); ++k) {
    if (m.objective[k] != 0.0) append_term(out, m.objective[k], m.variables[k].name);
  }
  out += "\nSubject To\n";
  for (const Row& r : m.rows) {
    out += ' ';
    out += r.name;
    out += ':';
    for (std::size_t k = 0; k < r.index.size(); ++k) {
      append_term(out, r.coef[k], m.variables[r.index[k]].name);
    }
    out += r.sense == Sense::kLe ? " <= " : r.sense == Sense::kGe ? " >= " : " = ";
    append_number(out, r.rhs);
    out += '\n';
  }
  out += "Bounds\n";
  for (const Variable& v : m.variables) {
    if (v.kind == VarKind::kBinary) continue;
    out += ' ';
    append_number(out, v.lower);
    out += " <= " + v.name + " <= ";
    append_number(out, v.upper);
    out += '\n';
  }
  out += "Binaries\n";
  for (const Variable& v : m.variables) {
    if (v.kind == VarKind::kBinary) out += ' ' + v.name + '\n';
  }
  out += "End\n";
  return out;
}

void export_lp(const MilpModel& m, const std::filesystem::path& path) {
  write_text_file(path, lp_text(m));
}

}  // namespace mecalloc
