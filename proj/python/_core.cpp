#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "signalopt/io.hpp"
#include "signalopt/scenarios.hpp"

namespace py = pybind11;
using namespace signalopt;

namespace {

// Results travel as JSON text; the Python wrapper decodes them.
std::string dumps(const nlohmann::json& j) { return j.dump(); }

GaConfig ga_config(std::size_t pop, std::size_t generations, double pc, double pm,
                   std::uint64_t seed, std::size_t threads) {
  GaConfig cfg;
  cfg.population_size = pop;
  cfg.max_generations = generations;
  cfg.p_crossover = pc;
  cfg.p_mutation = pm;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.validate();
  return cfg;
}

SolverOptions solver(double gap, int max_iterations) {
  SolverOptions o;
  o.gap_tolerance = gap;
  o.max_iterations = max_iterations;
  return o;
}

Provenance prov(std::uint64_t seed) { return {"", seed, std::string(kVersion)}; }

std::vector<SignalPlan> plans_for(const Network& net, const std::optional<std::string>& plan) {
  if (!plan) return initial_plans(net);
  try {
    return parse_plans(net, nlohmann::json::parse(*plan));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("plan is not valid JSON: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Signal timing optimisation with equilibrium traffic assignment";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<Network>(m, "Network")
      .def_static("testbed", &build_testbed)
      .def_static("from_json", [](const std::string& doc) { return load_network(doc); })
      .def("to_json", [](const Network& n) { return dump_network(n); })
      .def_property_readonly("link_ids",
                             [](const Network& n) {
                               std::vector<std::string> ids;
                               for (const auto& l : n.links()) ids.push_back(l.id);
                               return ids;
                             })
      .def_property_readonly("node_ids",
                             [](const Network& n) {
                               std::vector<std::string> ids;
                               for (const auto& v : n.nodes()) ids.push_back(v.id);
                               return ids;
                             })
      .def_property_readonly("total_demand", [](const Network& n) { return n.od().total(); })
      .def("with_incident",
           [](const Network& n, const std::string& link, int lanes_blocked) {
             return apply_incident(n, {n.link_index(link), lanes_blocked});
           },
           py::arg("link"), py::arg("lanes_blocked") = 1);

  m.def("link_travel_time",
        [](double free_flow_time, double capacity, double flow, double lambda, double alpha,
           double beta) {
          Link l;
          l.free_flow_time = free_flow_time;
          l.capacity = capacity;
          return link_travel_time(l, flow, lambda, {alpha, beta});
        },
        py::arg("free_flow_time"), py::arg("capacity"), py::arg("flow"), py::arg("green_split") = 1.0,
        py::arg("alpha") = 0.15, py::arg("beta") = 4.0);

  m.def("assign",
        [](const Network& net, std::optional<std::string> plan, double gap, int max_iterations) {
          const auto plans = plans_for(net, plan);
          const auto lambdas = link_green_splits(net, plans);
          AssignmentResult r;
          {
            py::gil_scoped_release release;
            r = solve_ue(net, lambdas, {}, solver(gap, max_iterations));
          }
          auto j = assignment_report_json(net, r, lambdas, prov(0));
          j["plan"] = plans_json(net, plans);
          return dumps(j);
        },
        py::arg("network"), py::arg("plan") = py::none(), py::arg("gap") = 1e-4,
        py::arg("max_iterations") = 500);

  m.def("optimize",
        [](const Network& net, std::size_t pop, std::size_t generations, double pc, double pm,
           std::uint64_t seed, double gap, std::size_t threads) {
          const auto cfg = ga_config(pop, generations, pc, pm, seed, threads);
          const auto layout = ChromosomeLayout::from_network(net);
          GaResult ga;
          {
            py::gil_scoped_release release;
            ga = run_ga(net, layout, cfg, {}, solver(gap, 500));
          }
          nlohmann::json trace = nlohmann::json::array();
          for (const auto& r : ga.trace)
            trace.push_back({{"generation", r.generation},
                             {"generation_best", r.generation_best},
                             {"best_so_far", r.best_so_far},
                             {"fitness", r.fitness}});
          return dumps({{"best_fitness", ga.best_fitness},
                        {"plan", plans_json(net, decode_chromosome(ga.best_chromosome, layout, net))},
                        {"evaluations", ga.evaluations},
                        {"cache_hits", ga.cache_hits},
                        {"unconverged", ga.unconverged},
                        {"trace", std::move(trace)}});
        },
        py::arg("network"), py::arg("population") = 75, py::arg("generations") = 20,
        py::arg("p_crossover") = 0.8, py::arg("p_mutation") = 0.1, py::arg("seed") = 42,
        py::arg("gap") = 1e-4, py::arg("threads") = 1);

  m.def("run_scenarios",
        [](const Network& net, const std::string& incident_link, int lanes_blocked,
           std::size_t pop, std::size_t generations, std::uint64_t seed,
           std::optional<std::pair<std::string, std::string>> route_pair, std::size_t threads) {
          ScenarioSetup setup;
          setup.ga = ga_config(pop, generations, 0.8, 0.1, seed, threads);
          if (route_pair)
            setup.route_pair = {{net.node_index(route_pair->first),
                                 net.node_index(route_pair->second)}};
          const IncidentSpec incident{net.link_index(incident_link), lanes_blocked};
          const auto incident_net = apply_incident(net, incident);
          ScenarioSuite suite;
          {
            py::gil_scoped_release release;
            suite = run_all_scenarios(net, incident, setup);
          }
          const auto p = prov(seed);
          return dumps({{"scenario1", scenario_report_json(net, suite.no_incident, p)},
                        {"scenario2", scenario_report_json(incident_net, suite.incident_fixed_plan, p)},
                        {"scenario3", scenario_report_json(incident_net, suite.incident_optimized, p)},
                        {"summary", scenario_summary_json(&suite.no_incident,
                                                          &suite.incident_fixed_plan,
                                                          &suite.incident_optimized, p)}});
        },
        py::arg("network"), py::arg("incident_link"), py::arg("lanes_blocked") = 1,
        py::arg("population") = 75, py::arg("generations") = 20, py::arg("seed") = 42,
        py::arg("route_pair") = py::none(), py::arg("threads") = 1);
}
