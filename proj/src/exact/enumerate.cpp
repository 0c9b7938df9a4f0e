#include <string>

#include "mecalloc/errors.hpp"
#include "mecalloc/exact.hpp"

namespace mecalloc {

namespace {

// One way of serving a request: host (-1 = rejected) and one resource per
// scope cell.
struct Option {
  int host = -1;
  std::vector<int> resources;
};

std::vector<Option> options_for(const Scenario& s, const ServiceRequest& r) {
  std::vector<Option> out{{}};
  std::vector<std::span<const int>> cells;
  for (int k : r.scope) {
    cells.push_back(s.resources_in(k, r.data_type));
    if (cells.back().empty()) return out;  // uncoverable: reject only
  }
  std::vector<std::size_t> pick(cells.size(), 0);
  for (int m = 0; m < s.num_hosts(); ++m) {
    std::fill(pick.begin(), pick.end(), 0);
    for (;;) {
      Option o{m, {}};
      for (std::size_t q = 0; q < cells.size(); ++q) o.resources.push_back(cells[q][pick[q]]);
      out.push_back(std::move(o));
      std::size_t q = 0;
      while (q < cells.size() && ++pick[q] == cells[q].size()) pick[q++] = 0;
      if (q == cells.size()) break;
    }
  }
  return out;
}

// Lexicographic order over (y, x) in their dense layouts, 0 before 1.
bool lex_less(const Allocation& a, const Allocation& b) {
  for (int m = 0; m < a.num_hosts(); ++m) {
    for (int j = 0; j < a.num_services(); ++j) {
      if (a.y(m, j) != b.y(m, j)) return !a.y(m, j);
    }
  }
  for (int i = 0; i < a.num_resources(); ++i) {
    for (int j = 0; j < a.num_services(); ++j) {
      if (a.x(i, j) != b.x(i, j)) return !a.x(i, j);
    }
  }
  return false;
}

}  // namespace

EnumerationResult enumerate_optimum(const Scenario& s, Requests req) {
  const int S = static_cast<int>(req.size());
  if (s.num_hosts() * S > kEnumerationMaxSlots) {
    throw ContractError("enumerate_optimum: " + std::to_string(s.num_hosts()) + " hosts x " +
                        std::to_string(S) + " services exceeds the enumeration guard");
  }
  for (const ServiceRequest& r : req) {
    for (int k : r.scope) {
      if (static_cast<int>(s.resources_in(k, r.data_type).size()) >
          kEnumerationMaxCellResources) {
        throw ContractError("enumerate_optimum: cell " + std::to_string(k) +
                            " has too many eligible resources");
      }
    }
  }

  std::vector<std::vector<Option>> opts;
  for (const ServiceRequest& r : req) opts.push_back(options_for(s, r));

  EnumerationResult best{empty_allocation(s, req), 0.0, 0};
  bool have = false;
  Allocation a = empty_allocation(s, req);
  std::vector<std::size_t> choice(static_cast<std::size_t>(S), 0);

  for (;;) {
    for (int j = 0; j < S; ++j) {
      a.clear_service(j);
      const Option& o = opts[j][choice[j]];
      if (o.host < 0) continue;
      a.set_y(o.host, j, true);
      for (int i : o.resources) a.set_x(i, j, true);
    }
    a.f() = extract_frequencies(s, req, a);
    if (check_feasibility(s, req, a).empty()) {
      ++best.candidates;
      const double j = objective(s, req, a).j;
      if (!have || j > best.objective || (j == best.objective && lex_less(a, best.allocation))) {
        best.allocation = a;
        best.objective = j;
        have = true;
      }
    }
    int j = 0;
    while (j < S && ++choice[j] == opts[j].size()) choice[j++] = 0;
    if (j == S) break;
  }
  return best;
}

}  // namespace mecalloc
