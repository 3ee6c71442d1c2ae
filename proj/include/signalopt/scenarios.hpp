#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "signalopt/assignment.hpp"
#include "signalopt/ga.hpp"
#include "signalopt/netmodel.hpp"
#include "signalopt/signals.hpp"

namespace signalopt {

// A lane blockage lasting the whole analysis hour.
struct IncidentSpec {
  std::size_t link = 0;
  int lanes_blocked = 1;
};

// (lanes - blocked) / lanes; throws if the incident closes every lane.
double capacity_multiplier(const Network& net, const IncidentSpec& incident);

// Copy of `net` with the incident link's capacity scaled; nothing else
// changes. Blocking zero lanes returns an identical network.
Network apply_incident(const Network& net, const IncidentSpec& incident);

IncidentSpec parse_incident(const Network& net, std::string_view document);
IncidentSpec testbed_incident(const Network& testbed);

enum class ScenarioKind {
  no_incident_optimized = 1,
  incident_unoptimized = 2,
  incident_optimized = 3,
};

std::string_view to_string(ScenarioKind kind);

struct ScenarioSetup {
  GaConfig ga;
  CostParams cost;
  SolverOptions solver;
  double min_green = kDefaultMinGreen;
  // OD pair whose route flows are reported (testbed: 7 -> 3).
  std::optional<std::pair<std::size_t, std::size_t>> route_pair;
  std::size_t max_routes = 2;
};

struct RouteReport {
  std::vector<std::size_t> links;
  double free_flow_time = 0.0;
  double flow = 0.0;  // veh/h, from the Frank-Wolfe path weights
  double travel_time = 0.0;  // seconds at equilibrium
};

struct ScenarioReport {
  ScenarioKind kind = ScenarioKind::no_incident_optimized;
  std::vector<SignalPlan> plan;
  Chromosome genes;
  double ttt = 0.0;  // vehicle-hours
  std::vector<double> link_flows;
  std::vector<double> lambdas;
  std::vector<double> travel_times;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = true;
  std::vector<RouteReport> routes;
  std::optional<GaResult> ga;
  std::optional<double> vs_scenario1_pct;  // percent change of ttt vs scenario 1
  std::optional<double> vs_scenario2_pct;
};

// Solve the equilibrium for fixed plans and fill the measurement fields.
ScenarioReport evaluate_plan(ScenarioKind kind, const Network& net,
                             std::vector<SignalPlan> plans, const ScenarioSetup& setup);

// Scenario 1 optimizes on `net`; scenario 2 re-evaluates the reference plan
// on `net` (the incident network); scenario 3 optimizes on `net` with the
// reference plan seeded into the initial population.
ScenarioReport run_scenario(ScenarioKind kind, const Network& net, const ScenarioSetup& setup,
                            const ScenarioReport* reference = nullptr,
                            const GenerationCallback& on_generation = {});

struct Delta {
  std::optional<double> percent_increase;  // (a - b) / b * 100
  std::optional<double> percent_saving;    // (b - a) / b * 100
};

// Relative change of `a` against `b`; empty when b's ttt is zero.
Delta compare(double ttt_a, double ttt_b);
Delta compare(const ScenarioReport& a, const ScenarioReport& b);

struct ScenarioSuite {
  ScenarioReport no_incident;
  ScenarioReport incident_fixed_plan;
  ScenarioReport incident_optimized;
};

// All three scenarios with cross deltas filled in.
ScenarioSuite run_all_scenarios(const Network& base, const IncidentSpec& incident,
                                const ScenarioSetup& setup);

}  // namespace signalopt
