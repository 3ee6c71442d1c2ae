#include "doctest.h"
#include "../support/check.hpp"
#include "../support/fixtures.hpp"
#include "signalopt/scenarios.hpp"

using namespace signalopt;
using doctest::Approx;

TEST_CASE("incident scales exactly one link") {
  const auto net = build_testbed();
  const auto inc = testbed_incident(net);
  CHECK(net.link(inc.link).capacity == 3600.0);
  CHECK(capacity_multiplier(net, inc) == 0.5);
  const auto hit = apply_incident(net, inc);
  CHECK(hit.link(inc.link).capacity == 1800.0);
  CHECK(net.link(inc.link).capacity == 3600.0);  // original untouched
  std::size_t changed = 0;
  for (std::size_t a = 0; a < net.links().size(); ++a) {
    const auto& x = net.link(a);
    const auto& y = hit.link(a);
    CHECK(x.id == y.id);
    CHECK(x.free_flow_time == y.free_flow_time);
    CHECK(x.lanes == y.lanes);
    CHECK(y.capacity <= x.capacity);
    changed += x.capacity != y.capacity;
  }
  CHECK(changed == 1);
  // nothing else moves
  auto a = nlohmann::json::parse(dump_network(net));
  auto b = nlohmann::json::parse(dump_network(hit));
  for (auto* d : {&a, &b}) (*d)["links"][inc.link].erase("capacity_vph");
  CHECK(a == b);

  CHECK(dump_network(apply_incident(net, {inc.link, 0})) == dump_network(net));
  CHECK_THROWS_CONTAINING(InputError, apply_incident(net, {inc.link, 2}), "full closures");
  CHECK_THROWS_AS(apply_incident(net, {inc.link, -1}), InputError);
}

TEST_CASE("incident documents") {
  const auto net = build_testbed();
  const auto spec = parse_incident(net, R"({"link": "I4-I2:T", "lanes_blocked": 1})");
  CHECK(spec.link == net.link_index("I4-I2:T"));
  CHECK(spec.lanes_blocked == 1);
  CHECK_THROWS_AS(parse_incident(net, R"({"link": "nope"})"), InputError);
  CHECK_THROWS_AS(parse_incident(net, R"({"lanes_blocked": 1})"), InputError);
  CHECK_THROWS_AS(parse_incident(net, R"({"link": "7-I3:L", "lanes_blocked": 1})"), InputError);
  CHECK_THROWS_AS(parse_incident(net, "nope"), InputError);
}

TEST_CASE("scenario 2 needs the scenario-1 plan") {
  const auto net = build_testbed();
  CHECK_THROWS_AS(run_scenario(ScenarioKind::incident_unoptimized, net, {}), PreconditionError);
}

TEST_CASE("compare") {
  const auto d = compare(47.37, 22.41);
  CHECK(*d.percent_increase == Approx(111.38).epsilon(1e-4));
  CHECK(*compare(28.24, 47.37).percent_saving == Approx(40.38).epsilon(1e-3));
  CHECK_FALSE(compare(1.0, 0.0).percent_increase.has_value());
}

TEST_CASE("three scenarios on the testbed") {
  const auto net = build_testbed();
  ScenarioSetup setup;
  setup.ga.population_size = 16;
  setup.ga.max_generations = 4;
  setup.route_pair = {{net.node_index("7"), net.node_index("3")}};
  const auto inc = testbed_incident(net);
  const auto suite = run_all_scenarios(net, inc, setup);

  // the fixed plan cannot do better once a lane is lost
  CHECK(suite.incident_fixed_plan.plan.size() == 4);
  CHECK(suite.incident_fixed_plan.genes == suite.no_incident.genes);
  CHECK(suite.incident_fixed_plan.ttt > suite.no_incident.ttt);
  // scenario 3 starts from the scenario-1 plan, so it is at least as good
  CHECK(suite.incident_optimized.ttt <= suite.incident_fixed_plan.ttt + 1e-9);
  CHECK(suite.incident_optimized.ga->best_fitness >= -suite.incident_fixed_plan.ttt - 1e-9);
  CHECK(suite.incident_optimized.ga->trace[0].population[0] == suite.no_incident.genes);

  CHECK(*suite.incident_fixed_plan.vs_scenario1_pct ==
        Approx((suite.incident_fixed_plan.ttt / suite.no_incident.ttt - 1) * 100));
  CHECK(*suite.incident_optimized.vs_scenario2_pct ==
        Approx((suite.incident_optimized.ttt / suite.incident_fixed_plan.ttt - 1) * 100));

  for (const auto* r : {&suite.no_incident, &suite.incident_fixed_plan, &suite.incident_optimized}) {
    CHECK(r->converged);
    REQUIRE(r->routes.size() == 2);
    CHECK(r->routes[0].flow + r->routes[1].flow <= 750.0 + 1e-6);
    CHECK(r->routes[0].flow + r->routes[1].flow > 0.0);
    CHECK(r->lambdas.size() == net.links().size());
  }
  // the incident pushes traffic off its route
  const auto on_incident = [&](const ScenarioReport& r) {
    for (const auto& route : r.routes)
      if (std::count(route.links.begin(), route.links.end(), inc.link)) return route.flow;
    return -1.0;
  };
  CHECK(on_incident(suite.incident_fixed_plan) < on_incident(suite.no_incident));
}
