#include <doctest.h>

#include "../oracles/fixtures.hpp"
#include "mecalloc/errors.hpp"
#include "mecalloc/exact.hpp"

using namespace mecalloc;

TEST_CASE("tiny instances respect the enumeration guard") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance in = tiny_instance(seed);
    CHECK(in.scenario.num_hosts() == 2);
    CHECK(in.scenario.num_cells() == 4);
    CHECK(in.scenario.num_resources() <= 6);
    CHECK(in.requests.size() == 3);
    CHECK_NOTHROW(enumerate_optimum(in.scenario, in.requests));
  }
}

TEST_CASE("enumeration admits a lone service when it fits") {
  const Scenario s = fixture::two_host_line();
  const std::vector<ServiceRequest> req = {fixture::request(s, 0, {0}, 0.5)};
  const EnumerationResult e = enumerate_optimum(s, req);
  REQUIRE(e.allocation.placed(0));
  // The local host avoids the backhaul stream.
  CHECK(e.allocation.host_of(0) == 0);
  const ObjectiveTerms t = objective(s, req, e.allocation);
  CHECK(e.objective == doctest::Approx(1.0 - s.cost_model.gamma * t.j_edge));
  CHECK(e.objective > 0.0);
}

TEST_CASE("zero capacities give the empty allocation") {
  Scenario s = fixture::two_host_line();
  for (MecHost& m : s.hosts) m.cpu_capacity = 0.0;
  s.finalize();
  const std::vector<ServiceRequest> req = {fixture::request(s, 0, {0}, 0.5),
                                           fixture::request(s, 1, {1, 2}, 0.25)};
  const EnumerationResult e = enumerate_optimum(s, req);
  CHECK(e.allocation.placed_count() == 0);
  CHECK(e.objective == 0.0);
  const BnbReport b = branch_and_bound(s, req);
  CHECK(b.status == BnbStatus::kOptimal);
  CHECK(b.incumbent.placed_count() == 0);
  CHECK(b.incumbent_objective == 0.0);
}

TEST_CASE("enumeration guard") {
  const Scenario s = fixture::two_host_line();
  std::vector<ServiceRequest> req;
  for (int j = 0; j < 5; ++j) req.push_back(fixture::request(s, j, {0}, 0.5));
  CHECK_THROWS_AS(enumerate_optimum(s, req), ContractError);

  const Scenario crowded = fixture::two_host_line(4);
  const std::vector<ServiceRequest> one = {fixture::request(crowded, 0, {0}, 0.5)};
  CHECK_THROWS_AS(enumerate_optimum(crowded, one), ContractError);
}

TEST_CASE("integral root closes the search at one node") {
  const Scenario s = fixture::two_host_line();
  const std::vector<ServiceRequest> none;
  const BnbReport empty = branch_and_bound(s, none);
  CHECK(empty.status == BnbStatus::kOptimal);
  CHECK(empty.nodes_explored == 1);

  const std::vector<ServiceRequest> req = {fixture::request(s, 0, {0}, 0.5)};
  const BnbReport r = branch_and_bound(s, req);
  CHECK(r.status == BnbStatus::kOptimal);
  CHECK(r.nodes_explored == 1);
  CHECK(r.incumbent.placed(0));
}

TEST_CASE("branch and bound matches enumeration on tiny instances") {
  int admitted_some = 0;
  int rejected_some = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Instance in = tiny_instance(seed);
    const Scenario& s = in.scenario;
    const EnumerationResult e = enumerate_optimum(s, in.requests);
    const BnbReport b = branch_and_bound(s, in.requests);
    CAPTURE(seed);
    REQUIRE(b.status == BnbStatus::kOptimal);
    CHECK(b.incumbent_objective == doctest::Approx(e.objective).epsilon(1e-6));
    CHECK(check_feasibility(s, in.requests, b.incumbent).empty());
    CHECK(b.best_bound >= b.incumbent_objective - 1e-9);
    CHECK(b.root_bound >= e.objective - 1e-6);
    CHECK(b.max_bound_increase <= 1e-7);
    admitted_some += e.allocation.placed_count() > 0;
    rejected_some += e.allocation.placed_count() < 3;
  }
  // The generator produces both easy and contended instances.
  CHECK(admitted_some > 10);
  CHECK(rejected_some > 10);
}

TEST_CASE("relaxation bounds every feasible allocation") {
  std::mt19937_64 gen(3);
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const Instance in = tiny_instance(seed);
    const MilpModel m = build_milp(in.scenario, in.requests);
    const LpSolution lp = solve_lp(relax(m));
    REQUIRE(lp.status == LpStatus::kOptimal);
    for (int t = 0; t < 20; ++t) {
      const Allocation a = fixture::random_allocation(in.scenario, in.requests, gen, 0.5);
      if (!check_feasibility(in.scenario, in.requests, a).empty()) continue;
      CHECK(lp.objective >= objective(in.scenario, in.requests, a).j - 1e-9);
    }
  }
}

TEST_CASE("time budget yields a feasible incumbent and a valid bound") {
  Instance in{generate_grid_scenario(desk_params(), 4), {}};
  const auto pop = zipf_cell_popularity(default_pois(in.scenario), 0.6, in.scenario.cells);
  const std::vector<ServiceTemplate> catalog = {vr_template()};
  in.requests = sample_service_requests(in.scenario, catalog, 20, pop, 5);
  BnbOptions opts;
  opts.node_limit = 3;
  const BnbReport r = branch_and_bound(in.scenario, in.requests, opts);
  CHECK(r.nodes_explored <= 3);
  CHECK(check_feasibility(in.scenario, in.requests, r.incumbent).empty());
  CHECK(r.best_bound >= r.incumbent_objective - 1e-9);
  if (r.status == BnbStatus::kTimeLimit) CHECK(r.gap >= 0.0);

  // A supplied incumbent is kept when nothing better is found.
  BnbOptions warm;
  warm.node_limit = 0;
  warm.initial = r.incumbent;
  const BnbReport w = branch_and_bound(in.scenario, in.requests, warm);
  CHECK(w.incumbent_objective == doctest::Approx(r.incumbent_objective));
  CHECK(w.status == BnbStatus::kTimeLimit);
}

TEST_CASE("search is deterministic") {
  const Instance in = tiny_instance(11, 4);
  const BnbReport a = branch_and_bound(in.scenario, in.requests);
  const BnbReport b = branch_and_bound(in.scenario, in.requests);
  CHECK(a.incumbent == b.incumbent);
  CHECK(a.nodes_explored == b.nodes_explored);
  CHECK(a.lp_iterations == b.lp_iterations);
}
