#include <random>

#include "doctest.h"
#include "../support/check.hpp"
#include "../support/fixtures.hpp"
#include "signalopt/assignment.hpp"
#include "signalopt/signals.hpp"

using namespace signalopt;
using doctest::Approx;

namespace {

Link make_link(double t0, double cap) {
  Link l;
  l.id = "x";
  l.free_flow_time = t0;
  l.capacity = cap;
  return l;
}

std::vector<double> ones(const Network& net) { return std::vector<double>(net.links().size(), 1.0); }

}  // namespace

TEST_CASE("link travel time is BPR on green capacity") {
  const auto l = make_link(30, 3600);
  CHECK(link_travel_time(l, 0, 0.5, {}) == 30.0);
  CHECK(link_travel_time(l, 1800, 0.5, {}) == Approx(30 * 1.15).epsilon(1e-14));
  CHECK(link_travel_time(l, 3600, 0.5, {}) == Approx(30 * (1 + 0.15 * 16)).epsilon(1e-14));
  CHECK(link_travel_time(l, 1000, 0.3, {0.5, 2}) ==
        Approx(oracle::bpr(30, 3600, 1000, 0.3, 0.5, 2)).epsilon(1e-14));
  CHECK_THROWS_AS(link_travel_time(l, 10, 0.0, {}), InputError);
}

TEST_CASE("beckmann term matches quadrature") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const auto l = make_link(5 + 60 * u(rng), 500 + 4000 * u(rng));
    const double lam = 0.05 + 0.95 * u(rng), v = 5000 * u(rng);
    const CostParams p{0.05 + 0.5 * u(rng), 1.0 + 4.0 * u(rng)};
    const double q = oracle::simpson(
        [&](double x) { return oracle::bpr(l.free_flow_time, l.capacity, x, lam, p.alpha, p.beta); },
        0.0, v, 4000);
    CHECK(beckmann_term(l, v, lam, p) == Approx(q).epsilon(1e-9));
  }
  CHECK(beckmann_term(make_link(30, 100), 0, 1, {}) == 0.0);
}

TEST_CASE("equilibrium on two parallel links") {
  SUBCASE("symmetric links split evenly") {
    for (double demand : {100.0, 3000.0, 9000.0}) {
      const auto net = fixture::two_link(demand, 30, 1800, 30, 1800);
      const auto r = solve_ue(net, ones(net), {}, {1e-12, 500, false});
      CHECK(std::abs(r.link_flows[0] - demand / 2) <= 1e-6 * demand);
      CHECK(std::abs(r.link_flows[1] - demand / 2) <= 1e-6 * demand);
    }
  }
  SUBCASE("asymmetric links follow the scalar oracle") {
    for (double demand : {500.0, 3000.0, 6000.0}) {
      const auto net = fixture::two_link(demand, 30, 1800, 60, 1800);
      const auto r = solve_ue(net, ones(net), {}, {1e-10, 500, false});
      const double x = oracle::two_link_split(demand, 30, 1800, 60, 1800);
      CHECK(r.converged);
      CHECK(r.link_flows[0] == Approx(x).epsilon(1e-3));
      CHECK(r.link_flows[1] == Approx(demand - x).epsilon(1e-3));
    }
  }
  SUBCASE("a link that stays too slow gets nothing") {
    const auto net = fixture::two_link(100, 30, 1800, 600, 1800);
    const auto r = solve_ue(net, ones(net));
    CHECK(r.link_flows[0] == 100.0);
    CHECK(r.link_flows[1] == 0.0);
    CHECK(r.relative_gap == 0.0);
  }
}

TEST_CASE("shortest paths break ties by link id") {
  const auto net = fixture::two_link(100, 30, 1800, 30, 1800);
  const auto tree = shortest_paths(net, std::vector<double>{30, 30}, net.node_index("O"));
  CHECK(extract_path(net, tree, net.node_index("D")) == std::vector<std::size_t>{0});
  const auto flows = all_or_nothing(net, std::vector<double>{30, 30}, net.od());
  CHECK(flows == std::vector<double>{100, 0});
}

TEST_CASE("property: all-or-nothing conserves flow and uses cheapest paths") {
  const auto net = build_testbed();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> costs(net.links().size());
    for (auto& c : costs) c = u(rng);
    const auto flows = all_or_nothing(net, costs, net.od());
    const auto b = oracle::net_outflow(net, flows);
    for (std::size_t n = 0; n < net.nodes().size(); ++n) {
      const double expected = net.node(n).kind == NodeKind::centroid
                                  ? net.od().row_total(n) - net.od().column_total(n)
                                  : 0.0;
      CHECK(b[n] == expected);  // sums of whole demands: exact
    }
    for (double f : flows) CHECK(f >= 0.0);
    // total cost equals demand times oracle cheapest cost
    double loaded = 0.0, cheapest = 0.0;
    for (std::size_t a = 0; a < costs.size(); ++a) loaded += costs[a] * flows[a];
    for (auto o : net.centroids()) {
      const auto best = oracle::min_costs(net, costs, o);
      for (auto d : net.centroids())
        if (o != d) cheapest += net.od().demand(o, d) * best[d];
    }
    CHECK(loaded == Approx(cheapest).epsilon(1e-12));
  }
  std::vector<double> bad(net.links().size(), 1.0);
  bad[3] = 0.0;
  CHECK_THROWS_AS(all_or_nothing(net, bad, net.od()), InputError);
}

TEST_CASE("testbed equilibrium") {
  const auto net = build_testbed();
  const auto lambdas = link_green_splits(net, initial_plans(net));
  SolverOptions opts;
  opts.gap_tolerance = 1e-8;
  opts.track_routes = true;
  const auto r = solve_ue(net, lambdas, {}, opts);
  CHECK(r.converged);
  CHECK(r.relative_gap <= 1e-8);
  CHECK(r.total_travel_time == Approx(oracle::ttt(net, r.link_flows, lambdas)).epsilon(1e-12));
  for (std::size_t i = 1; i < r.beckmann_history.size(); ++i)
    CHECK(r.beckmann_history[i] <= r.beckmann_history[i - 1] * (1 + 1e-12));

  // conservation at equilibrium
  const auto b = oracle::net_outflow(net, r.link_flows);
  for (std::size_t n = 0; n < net.nodes().size(); ++n) {
    const double expected = net.node(n).kind == NodeKind::centroid
                                ? net.od().row_total(n) - net.od().column_total(n)
                                : 0.0;
    CHECK(b[n] == Approx(expected).epsilon(1e-9).scale(1000));
  }

  // Wardrop: every used route costs no more than the cheapest one
  const auto times = link_travel_times(net, r.link_flows, lambdas, {});
  const auto positive = net.od().positive();
  REQUIRE(r.route_flows.size() == positive.size());
  std::vector<double> from_routes(net.links().size(), 0.0);
  for (std::size_t i = 0; i < positive.size(); ++i) {
    const auto best = oracle::min_costs(net, times, positive[i].origin)[positive[i].destination];
    double total = 0.0;
    for (const auto& rf : r.route_flows[i]) {
      total += rf.flow;
      for (auto a : rf.links) from_routes[a] += rf.flow;
      if (rf.flow > 1e-3 * positive[i].demand)
        CHECK(oracle::path_cost(rf.links, times) <= best * (1 + 1e-3));
    }
    CHECK(total == Approx(positive[i].demand).epsilon(1e-9));
  }
  for (std::size_t a = 0; a < net.links().size(); ++a)
    CHECK(from_routes[a] == Approx(r.link_flows[a]).epsilon(1e-6).scale(1));
}

TEST_CASE("solver reports non-convergence instead of throwing") {
  const auto net = build_testbed();
  const auto lambdas = link_green_splits(net, initial_plans(net));
  const auto r = solve_ue(net, lambdas, {}, {1e-14, 3, false});
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}

TEST_CASE("zero demand gives zero travel time") {
  auto doc = fixture::two_link_doc(0, 30, 1800, 60, 1800);
  const auto net = load_network(doc.dump());
  const auto r = solve_ue(net, ones(net));
  CHECK(r.total_travel_time == 0.0);
  CHECK(r.converged);
}

TEST_CASE("capacity check is strict") {
  const auto net = fixture::two_link(100, 30, 1000, 60, 1000);
  const std::vector<double> flows{500, 501};
  const std::vector<double> lambdas{0.5, 0.5};
  const auto v = capacity_check(net, flows, lambdas);
  REQUIRE(v.size() == 1);
  CHECK(v[0].link == 1);
  CHECK(v[0].green_capacity == 500.0);
  CHECK(v[0].ratio == Approx(1.002));
}
