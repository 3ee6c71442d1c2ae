#include "signalopt/scenarios.hpp"

#include <json.hpp>

namespace signalopt {

double capacity_multiplier(const Network& net, const IncidentSpec& incident) {
  const auto& link = net.link(incident.link);
  if (incident.lanes_blocked < 0) throw InputError("lanes_blocked must be non-negative");
  if (incident.lanes_blocked >= link.lanes)
    throw InputError("incident blocks all " + std::to_string(link.lanes) + " lanes of link '" +
                     link.id + "'; full closures are not supported");
  return static_cast<double>(link.lanes - incident.lanes_blocked) / link.lanes;
}

Network apply_incident(const Network& net, const IncidentSpec& incident) {
  if (incident.link >= net.links().size()) throw InputError("incident: missing link reference");
  const double m = capacity_multiplier(net, incident);
  if (incident.lanes_blocked == 0) return net;
  return net.with_capacity(incident.link, net.link(incident.link).capacity * m);
}

IncidentSpec parse_incident(const Network& net, std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("incident document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("link"))
    throw InputError("incident document needs a 'link' field");
  IncidentSpec spec;
  const auto& l = doc["link"];
  spec.link = net.link_index(l.is_string() ? l.get<std::string>() : l.dump());
  spec.lanes_blocked = doc.value("lanes_blocked", 1);
  capacity_multiplier(net, spec);
  return spec;
}

IncidentSpec testbed_incident(const Network& testbed) {
  return {testbed.link_index(testbed::incident_link), 1};
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::no_incident_optimized:
      return "no_incident_optimized";
    case ScenarioKind::incident_unoptimized:
      return "incident_unoptimized";
    case ScenarioKind::incident_optimized:
      return "incident_optimized";
  }
  return "no_incident_optimized";
}

ScenarioReport evaluate_plan(ScenarioKind kind, const Network& net,
                             std::vector<SignalPlan> plans, const ScenarioSetup& setup) {
  ScenarioReport report;
  report.kind = kind;
  report.lambdas = link_green_splits(net, plans);
  auto opts = setup.solver;
  opts.track_routes = setup.route_pair.has_value();
  auto r = solve_ue(net, report.lambdas, setup.cost, opts);
  report.ttt = r.total_travel_time;
  report.relative_gap = r.relative_gap;
  report.iterations = r.iterations;
  report.converged = r.converged;
  report.travel_times = link_travel_times(net, r.link_flows, report.lambdas, setup.cost);
  report.link_flows = std::move(r.link_flows);
  report.genes = encode_plans(plans);
  report.plan = std::move(plans);

  if (setup.route_pair) {
    const auto [o, d] = *setup.route_pair;
    const auto positive = net.od().positive();
    const std::vector<RouteFlow>* weights = nullptr;
    for (std::size_t i = 0; i < positive.size(); ++i)
      if (positive[i].origin == o && positive[i].destination == d) weights = &r.route_flows[i];
    for (auto& links : enumerate_routes(net, o, d, setup.max_routes)) {
      RouteReport route;
      for (auto a : links) {
        route.free_flow_time += net.link(a).free_flow_time;
        route.travel_time += report.travel_times[a];
      }
      if (weights)
        for (const auto& w : *weights)
          if (w.links == links) route.flow += w.flow;
      route.links = std::move(links);
      report.routes.push_back(std::move(route));
    }
  }
  return report;
}

ScenarioReport run_scenario(ScenarioKind kind, const Network& net, const ScenarioSetup& setup,
                            const ScenarioReport* reference,
                            const GenerationCallback& on_generation) {
  if (kind == ScenarioKind::incident_unoptimized) {
    if (!reference || reference->plan.empty())
      throw PreconditionError(
          "scenario 2 re-uses the scenario-1 plan; run scenario 1 first");
    return evaluate_plan(kind, net, reference->plan, setup);
  }

  const auto layout = ChromosomeLayout::from_network(net, setup.min_green);
  std::vector<Chromosome> seeds;
  if (kind == ScenarioKind::incident_optimized && reference && !reference->plan.empty())
    seeds.push_back(encode_plans(reference->plan));
  auto ga = run_ga(net, layout, setup.ga, setup.cost, setup.solver, seeds, on_generation);
  auto report = evaluate_plan(kind, net, decode_chromosome(ga.best_chromosome, layout, net), setup);
  report.ga = std::move(ga);
  return report;
}

Delta compare(double ttt_a, double ttt_b) {
  if (ttt_b == 0.0) return {};
  return {(ttt_a - ttt_b) / ttt_b * 100.0, (ttt_b - ttt_a) / ttt_b * 100.0};
}

Delta compare(const ScenarioReport& a, const ScenarioReport& b) { return compare(a.ttt, b.ttt); }

ScenarioSuite run_all_scenarios(const Network& base, const IncidentSpec& incident,
                                const ScenarioSetup& setup) {
  const auto incident_net = apply_incident(base, incident);
  ScenarioSuite suite;
  suite.no_incident = run_scenario(ScenarioKind::no_incident_optimized, base, setup);
  suite.incident_fixed_plan =
      run_scenario(ScenarioKind::incident_unoptimized, incident_net, setup, &suite.no_incident);
  suite.incident_optimized =
      run_scenario(ScenarioKind::incident_optimized, incident_net, setup, &suite.no_incident);

  suite.incident_fixed_plan.vs_scenario1_pct =
      compare(suite.incident_fixed_plan, suite.no_incident).percent_increase;
  suite.incident_optimized.vs_scenario1_pct =
      compare(suite.incident_optimized, suite.no_incident).percent_increase;
  suite.incident_optimized.vs_scenario2_pct =
      compare(suite.incident_optimized, suite.incident_fixed_plan).percent_increase;
  return suite;
}

}  // namespace signalopt
