#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "signalopt/scenarios.hpp"

namespace signalopt {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitPrecondition = 3,
  kExitNotConverged = 4,
};

struct RunConfig {
  bool testbed = false;
  std::string network_path;
  std::string incident_path;
  std::string plan_path;
  std::string out_dir = ".";
  GaConfig ga;
  SolverOptions solver;
  CostParams cost;
  double min_green = kDefaultMinGreen;
  bool strict = false;
};

int cmd_assign(const RunConfig& cfg, std::ostream& out);
int cmd_optimize(const RunConfig& cfg, std::ostream& out);
// which: "1", "2", "3" or "all"
int cmd_scenario(const RunConfig& cfg, const std::string& which, std::ostream& out);
// Either path may be empty. The network is only needed for the flow map or
// when the trace has no layout line.
int cmd_plot(const RunConfig& cfg, const std::string& trace_path, const std::string& flows_path,
             std::ostream& out);

// Full command line (args[0] is the program name). Errors are reported on
// `err` and mapped to the exit codes above.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace signalopt
