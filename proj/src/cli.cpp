#include "signalopt/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "signalopt/io.hpp"
#include "signalopt/plot.hpp"

namespace signalopt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Loaded {
  Network base;
  std::optional<IncidentSpec> incident;
  std::optional<std::pair<std::size_t, std::size_t>> route_pair;
};

Network load_source(const RunConfig& cfg) {
  if (cfg.testbed == !cfg.network_path.empty())
    throw InputError("give exactly one of --testbed or --network");
  if (cfg.testbed) return build_testbed();
  if (!fs::exists(cfg.network_path))
    throw InputError("network file not found: '" + cfg.network_path + "'");
  return load_network(read_file(cfg.network_path));
}

Loaded load(const RunConfig& cfg) {
  Loaded l{load_source(cfg), std::nullopt, std::nullopt};
  if (!cfg.incident_path.empty()) {
    if (!fs::exists(cfg.incident_path))
      throw InputError("incident file not found: '" + cfg.incident_path + "'");
    l.incident = parse_incident(l.base, read_file(cfg.incident_path));
  } else if (cfg.testbed) {
    l.incident = testbed_incident(l.base);
  }
  if (cfg.testbed)
    l.route_pair = {{l.base.node_index(testbed::route_origin),
                     l.base.node_index(testbed::route_destination)}};
  return l;
}

std::optional<json> load_plan_doc(const RunConfig& cfg) {
  if (cfg.plan_path.empty()) return std::nullopt;
  if (!fs::exists(cfg.plan_path)) throw InputError("plan file not found: '" + cfg.plan_path + "'");
  try {
    return json::parse(read_file(cfg.plan_path));
  } catch (const json::parse_error& e) {
    throw InputError("plan file '" + cfg.plan_path + "' is not valid JSON: " + e.what());
  }
}

// Everything that influences results. Thread count is left out on purpose:
// outputs must not depend on it.
Provenance provenance(const RunConfig& cfg, const Network& net, std::string_view command) {
  json c = {{"command", command},
            {"network", config_hash(dump_network(net))},
            {"incident", cfg.incident_path.empty() ? "" : read_file(cfg.incident_path)},
            {"plan", cfg.plan_path.empty() ? "" : config_hash(read_file(cfg.plan_path))},
            {"population", cfg.ga.population_size},
            {"generations", cfg.ga.max_generations},
            {"pc", cfg.ga.p_crossover},
            {"pm", cfg.ga.p_mutation},
            {"elitism", cfg.ga.elitism},
            {"seed", cfg.ga.seed},
            {"gap", cfg.solver.gap_tolerance},
            {"max_iterations", cfg.solver.max_iterations},
            {"alpha", cfg.cost.alpha},
            {"beta", cfg.cost.beta},
            {"min_green", cfg.min_green}};
  return {config_hash(c.dump()), cfg.ga.seed, std::string(kVersion)};
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& doc) {
  write_file(out_path(cfg, name).string(), doc.dump(2) + "\n");
}

ScenarioSetup setup_of(const RunConfig& cfg, const Loaded& l) {
  ScenarioSetup s;
  s.ga = cfg.ga;
  s.cost = cfg.cost;
  s.solver = cfg.solver;
  s.min_green = cfg.min_green;
  s.route_pair = l.route_pair;
  return s;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Streams trace rows as generations finish so a failed run keeps what it had.
struct TraceSink {
  std::ofstream trace, best;
  std::ostream& out;

  TraceSink(const RunConfig& cfg, const std::string& stem, const ChromosomeLayout& layout,
            const Network& net, const Provenance& p, std::ostream& o)
      : trace(out_path(cfg, stem + ".csv"), std::ios::binary),
        best(out_path(cfg, stem + "_best.csv"), std::ios::binary),
        out(o) {
    if (!trace || !best) throw InputError("cannot write trace files in '" + cfg.out_dir + "'");
    write_trace_header(trace, layout, net, p);
    write_best_header(best, layout, p);
  }

  GenerationCallback callback() {
    return [this](const GenerationRecord& r) {
      write_trace_rows(trace, r);
      write_best_row(best, r);
      trace.flush();
      best.flush();
      out << "generation " << r.generation << " best " << fixed(r.generation_best, 4)
          << " best-so-far " << fixed(r.best_so_far, 4) << " evaluations " << r.evaluations
          << '\n';
    };
  }
};

void write_flows(const RunConfig& cfg, const std::string& name, const Network& net,
                 const ScenarioReport& r, const Provenance& p) {
  std::ostringstream os;
  write_flows_csv(os, net, r.link_flows, r.lambdas, r.travel_times, p);
  write_file(out_path(cfg, name).string(), os.str());
}

int strict_status(const RunConfig& cfg, bool all_converged, std::ostream& out) {
  if (cfg.strict && !all_converged) {
    out << "error: equilibrium solver did not converge (--strict)\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

}  // namespace

int cmd_assign(const RunConfig& cfg, std::ostream& out) {
  const auto l = load(cfg);
  const Network net = cfg.incident_path.empty() ? l.base : apply_incident(l.base, *l.incident);
  const auto doc = load_plan_doc(cfg);
  auto plans = doc ? parse_plans(net, *doc) : initial_plans(net);
  const auto p = provenance(cfg, net, "assign");

  const auto lambdas = link_green_splits(net, plans);
  const auto r = solve_ue(net, lambdas, cfg.cost, cfg.solver);
  const auto times = link_travel_times(net, r.link_flows, lambdas, cfg.cost);

  std::ostringstream flows;
  write_flows_csv(flows, net, r.link_flows, lambdas, times, p);
  write_file(out_path(cfg, "flows.csv").string(), flows.str());
  auto report = assignment_report_json(net, r, lambdas, p);
  report["plan"] = plans_json(net, plans);
  write_json(cfg, "assignment.json", report);

  out << "TTT " << fixed(r.total_travel_time, 4) << " veh-h, relative gap " << r.relative_gap
      << " after " << r.iterations << " iterations" << (r.converged ? "" : " (not converged)")
      << '\n';
  return strict_status(cfg, r.converged, out);
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out) {
  cfg.ga.validate();
  const auto l = load(cfg);
  const Network net = cfg.incident_path.empty() ? l.base : apply_incident(l.base, *l.incident);
  const auto layout = ChromosomeLayout::from_network(net, cfg.min_green);
  const auto p = provenance(cfg, net, "optimize");

  std::vector<Chromosome> seeds;
  if (const auto doc = load_plan_doc(cfg)) seeds.push_back(encode_plans(parse_plans(net, *doc)));

  TraceSink sink(cfg, "trace", layout, net, p, out);
  const auto ga = run_ga(net, layout, cfg.ga, cfg.cost, cfg.solver, seeds, sink.callback());

  ScenarioSetup setup = setup_of(cfg, l);
  auto report = evaluate_plan(ScenarioKind::no_incident_optimized, net,
                              decode_chromosome(ga.best_chromosome, layout, net), setup);
  json best = {{"provenance", provenance_json(p)},
               {"best_fitness", ga.best_fitness},
               {"ttt_veh_h", report.ttt},
               {"plan", plans_json(net, report.plan)},
               {"generations", ga.trace.size()},
               {"evaluations", ga.evaluations},
               {"cache_hits", ga.cache_hits},
               {"unconverged", ga.unconverged}};
  write_json(cfg, "best_plan.json", best);
  write_flows(cfg, "flows.csv", net, report, p);

  out << "best fitness " << fixed(ga.best_fitness, 4) << " after " << ga.trace.size() - 1
      << " generations, " << ga.evaluations << " evaluations (" << ga.cache_hits
      << " cache hits)\n";
  if (ga.unconverged) out << ga.unconverged << " evaluations did not reach the gap tolerance\n";
  return strict_status(cfg, ga.unconverged == 0 && report.converged, out);
}

int cmd_scenario(const RunConfig& cfg, const std::string& which, std::ostream& out) {
  if (which != "1" && which != "2" && which != "3" && which != "all")
    throw InputError("scenario must be 1, 2, 3 or all, got '" + which + "'");
  cfg.ga.validate();
  const auto l = load(cfg);
  const bool needs_incident = which != "1";
  if (needs_incident && !l.incident)
    throw InputError("scenarios 2 and 3 need --incident (or --testbed)");
  const Network incident_net = l.incident ? apply_incident(l.base, *l.incident) : l.base;
  const auto setup = setup_of(cfg, l);
  const auto p = provenance(cfg, l.base, "scenario " + which);
  const auto plan_doc = load_plan_doc(cfg);

  std::optional<ScenarioReport> s1, s2, s3;
  bool converged = true;
  auto finish = [&](ScenarioReport& r, const Network& net, int k) {
    const auto name = "scenario" + std::to_string(k);
    write_json(cfg, name + ".json", scenario_report_json(net, r, p));
    write_flows(cfg, "flows_" + name + ".csv", net, r, p);
    converged = converged && r.converged && (!r.ga || r.ga->unconverged == 0);
    out << "scenario " << k << " (" << to_string(r.kind) << "): TTT " << fixed(r.ttt) << " veh-h";
    for (std::size_t i = 0; i < r.routes.size(); ++i)
      out << ", route " << i + 1 << " " << fixed(r.routes[i].flow, 1) << " veh/h";
    out << '\n';
  };
  auto optimise = [&](ScenarioKind kind, const Network& net, const ScenarioReport* ref, int k) {
    const auto layout = ChromosomeLayout::from_network(net, cfg.min_green);
    TraceSink sink(cfg, "trace_scenario" + std::to_string(k), layout, net, p, out);
    return run_scenario(kind, net, setup, ref, sink.callback());
  };

  // A plan file stands in for a scenario-1 run that happened elsewhere.
  std::optional<ScenarioReport> reference;
  if (plan_doc) {
    reference.emplace();
    reference->plan = parse_plans(l.base, *plan_doc);
    if (plan_doc->is_object() && plan_doc->value("scenario", 0) == 1)
      reference->ttt = plan_doc->value("ttt_veh_h", 0.0);
  }

  if (which == "1" || which == "all") {
    s1 = optimise(ScenarioKind::no_incident_optimized, l.base, nullptr, 1);
    reference = s1;
    finish(*s1, l.base, 1);
  }
  if (which == "2" || which == "all") {
    if (!reference)
      throw PreconditionError(
          "scenario 2 re-uses the scenario-1 plan; run scenario 1 first and pass its report "
          "with --plan");
    s2 = run_scenario(ScenarioKind::incident_unoptimized, incident_net, setup, &*reference);
    if (reference->ttt > 0) s2->vs_scenario1_pct = compare(s2->ttt, reference->ttt).percent_increase;
    finish(*s2, incident_net, 2);
  }
  if (which == "3" || which == "all") {
    s3 = optimise(ScenarioKind::incident_optimized, incident_net,
                  reference ? &*reference : nullptr, 3);
    if (reference && reference->ttt > 0)
      s3->vs_scenario1_pct = compare(s3->ttt, reference->ttt).percent_increase;
    if (s2) s3->vs_scenario2_pct = compare(*s3, *s2).percent_increase;
    finish(*s3, incident_net, 3);
  }

  if (which == "all") {
    const auto summary = scenario_summary_json(&*s1, &*s2, &*s3, p);
    write_json(cfg, "summary.json", summary);
    const auto& c = summary["comparisons"];
    out << "scenario 2 vs 1: " << fixed(c["s2_vs_s1_increase_pct"].get<double>(), 2)
        << "% more travel time\n"
        << "scenario 3 vs 1: " << fixed(c["s3_vs_s1_increase_pct"].get<double>(), 2)
        << "% more travel time\n"
        << "scenario 3 vs 2: " << fixed(c["s3_vs_s2_saving_pct"].get<double>(), 2)
        << "% less travel time\n";
  }
  return strict_status(cfg, converged, out);
}

int cmd_plot(const RunConfig& cfg, const std::string& trace_path, const std::string& flows_path,
             std::ostream& out) {
  if (trace_path.empty() && flows_path.empty())
    throw InputError("plot needs --trace and/or --flows");
  std::optional<Network> net;
  if (cfg.testbed || !cfg.network_path.empty()) net = load_source(cfg);
  Provenance p{"", cfg.ga.seed, std::string(kVersion)};

  std::size_t written = 0;
  if (!trace_path.empty()) {
    if (!fs::exists(trace_path)) throw InputError("trace file not found: '" + trace_path + "'");
    std::istringstream is(read_file(trace_path));
    auto trace = read_trace_csv(is);
    if (trace.layout.empty() && net)
      trace.layout = trace_layout(ChromosomeLayout::from_network(*net, 0.0), *net);
    p.config_hash = config_hash(read_file(trace_path));
    for (const auto& f : convergence_plots(trace, p)) {
      write_file(out_path(cfg, f.name).string(), f.content);
      ++written;
    }
  }
  if (!flows_path.empty()) {
    if (!net) throw InputError("the flow map needs --testbed or --network");
    if (!fs::exists(flows_path)) throw InputError("flows file not found: '" + flows_path + "'");
    std::istringstream is(read_file(flows_path));
    const auto rows = read_flows_csv(is);
    p.config_hash = config_hash(read_file(flows_path));
    const auto f = flow_map(*net, rows, p);
    write_file(out_path(cfg, f.name).string(), f.content);
    ++written;
  }
  out << "wrote " << written << " SVG file" << (written == 1 ? "" : "s") << " to " << cfg.out_dir
      << '\n';
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signal timing optimisation with equilibrium assignment"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  RunConfig cfg;
  cfg.ga.threads = 0;  // all cores, capped by SIGNALOPT_THREADS
  auto common = [&](CLI::App* sub) {
    sub->add_flag("--testbed", cfg.testbed, "Use the built-in 4-intersection network");
    sub->add_option("--network", cfg.network_path, "Network JSON document");
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", cfg.ga.seed, "Random seed")->capture_default_str();
  };
  auto solver = [&](CLI::App* sub) {
    sub->add_option("--incident", cfg.incident_path, "Incident JSON {link, lanes_blocked}");
    sub->add_option("--gap", cfg.solver.gap_tolerance, "Relative gap tolerance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", cfg.solver.max_iterations, "Frank-Wolfe iteration limit")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--plan", cfg.plan_path, "Plan JSON (best_plan.json or a scenario report)");
    sub->add_flag("--strict", cfg.strict, "Exit 4 when an equilibrium solve does not converge");
  };
  auto genetic = [&](CLI::App* sub) {
    sub->add_option("--pop", cfg.ga.population_size, "Population size")->capture_default_str();
    sub->add_option("--generations", cfg.ga.max_generations, "Generations after the initial one")
        ->capture_default_str();
    sub->add_option("--pc", cfg.ga.p_crossover, "Crossover probability")->capture_default_str();
    sub->add_option("--pm", cfg.ga.p_mutation, "Mutation probability")->capture_default_str();
    sub->add_option("--min-green", cfg.min_green, "Minimum phase duration (s)")
        ->capture_default_str();
  };

  auto* assign = app.add_subcommand("assign", "Equilibrium flows for a fixed plan");
  common(assign);
  solver(assign);
  auto* optimize = app.add_subcommand("optimize", "Run the genetic algorithm");
  common(optimize);
  solver(optimize);
  genetic(optimize);
  std::string which;
  auto* scenario = app.add_subcommand("scenario", "Incident scenarios 1, 2, 3 or all");
  scenario->add_option("which", which, "1, 2, 3 or all")->required();
  common(scenario);
  solver(scenario);
  genetic(scenario);
  std::string trace_path, flows_path;
  auto* plot = app.add_subcommand("plot", "Convergence scatter plots and flow map as SVG");
  common(plot);
  plot->add_option("--trace", trace_path, "Trace CSV from optimize or scenario");
  plot->add_option("--flows", flows_path, "Flows CSV from assign, optimize or scenario");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*assign) return cmd_assign(cfg, out);
    if (*optimize) return cmd_optimize(cfg, out);
    if (*scenario) return cmd_scenario(cfg, which, out);
    return cmd_plot(cfg, trace_path, flows_path, out);
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace signalopt
